#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "grtt/tt_model.hpp"

namespace grtt {

/// Binary model container, all integers and floats little-endian:
///
///   offset 0   char[4]  "GRTT"
///          4   u32      format version (kModelFormatVersion)
///          8   u64      N, number of data modes
///         16   u64      split index k (modes left of the sample core)
///         24   u64      S, number of samples
///         32   u64[N]   mode sizes I_1..I_N
///    32 + 8N   u64[N]   ranks r_1..r_N (TTModel::ranks order)
///   32 + 16N   f64[]    factors 1..N, each first-index-fastest, then the
///                       projection tensor (r_k, S, r_k+1)
inline constexpr std::uint32_t kModelFormatVersion = 1;

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::byte> serialize_model(const TTModel& model, const ProjectionTensor& x);
TTDecomposition deserialize_model(std::span<const std::byte> bytes);

/// Number of f64 payload entries in a serialized container.
std::size_t serialized_scalar_count(std::span<const std::byte> bytes);

void write_model(const std::filesystem::path& path, const TTModel& model, const ProjectionTensor& x);
TTDecomposition read_model(const std::filesystem::path& path);

}  // namespace grtt
