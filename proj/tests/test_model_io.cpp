#include <gtest/gtest.h>

#include <filesystem>

#include <unistd.h>

#include "grtt/file_io.hpp"
#include "grtt/model_io.hpp"
#include "oracles.hpp"

using namespace grtt;

namespace {

TTDecomposition sample_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return tt_svd(oracle::random_tensor({3, 5, 6, 4}, rng), 2, 0.4);
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("grtt_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(ModelIo, RoundTripIsBitExact) {
  const TTDecomposition d = sample_model(41);
  const auto bytes = serialize_model(d.model, d.projection);
  EXPECT_EQ(bytes.size(), 32 + 16 * 3 + 8 * static_cast<std::size_t>(storage_cost(d.model, d.projection)));
  const TTDecomposition back = deserialize_model(bytes);
  EXPECT_EQ(back.model.split(), d.model.split());
  EXPECT_EQ(back.model.ranks(), d.model.ranks());
  for (Index n = 0; n < 3; ++n) EXPECT_EQ(back.model.factor(n), d.model.factor(n));
  EXPECT_EQ(back.projection.tensor(), d.projection.tensor());
}

TEST(ModelIo, HeaderLayout) {
  const TTDecomposition d = sample_model(42);
  const auto bytes = serialize_model(d.model, d.projection);
  EXPECT_EQ(static_cast<char>(bytes[0]), 'G');
  EXPECT_EQ(static_cast<char>(bytes[3]), 'T');
  EXPECT_EQ(static_cast<int>(bytes[4]), 1);
  EXPECT_EQ(static_cast<int>(bytes[8]), 3);   // N
  EXPECT_EQ(static_cast<int>(bytes[16]), 2);  // split
  EXPECT_EQ(static_cast<int>(bytes[24]), 6);  // S
  EXPECT_EQ(static_cast<int>(bytes[32]), 3);  // I_1
}

TEST(ModelIo, RejectsCorruptInput) {
  const TTDecomposition d = sample_model(43);
  auto bytes = serialize_model(d.model, d.projection);
  auto bad_magic = bytes;
  bad_magic[0] = std::byte{'X'};
  EXPECT_THROW(deserialize_model(bad_magic), ModelFormatError);
  auto bad_version = bytes;
  bad_version[4] = std::byte{9};
  EXPECT_THROW(deserialize_model(bad_version), ModelFormatError);
  auto truncated = bytes;
  truncated.resize(truncated.size() - 8);
  EXPECT_THROW(deserialize_model(truncated), ModelFormatError);
  auto huge = bytes;
  huge[33 + 8] = std::byte{0x7f};
  EXPECT_THROW(deserialize_model(huge), ModelFormatError);
  EXPECT_THROW(deserialize_model(std::span<const std::byte>(bytes.data(), 10)), ModelFormatError);
}

TEST(ModelIo, FileRoundTripAndAtomicWrite) {
  const TTDecomposition d = sample_model(44);
  const auto path = temp_path("model.grtt");
  write_model(path, d.model, d.projection);
  const TTDecomposition back = read_model(path);
  EXPECT_EQ(back.projection.tensor(), d.projection.tensor());
  for (const auto& entry : std::filesystem::directory_iterator(path.parent_path()))
    EXPECT_EQ(entry.path().string().find(path.filename().string() + ".tmp"), std::string::npos);
  std::filesystem::remove(path);
  EXPECT_THROW(read_model(path), std::runtime_error);
}
