#include "grtt/model_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>

#include "grtt/file_io.hpp"

namespace grtt {

namespace {

constexpr char kMagic[4] = {'G', 'R', 'T', 'T'};

template <typename T>
void put_le(std::vector<std::byte>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::array<std::byte, sizeof(T)> raw;
  std::memcpy(raw.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
  out.insert(out.end(), raw.begin(), raw.end());
}

class Reader {
 public:
  explicit Reader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  template <typename T>
  T get() {
    if (pos_ + sizeof(T) > bytes_.size()) throw ModelFormatError("model file truncated");
    std::array<std::byte, sizeof(T)> raw;
    std::memcpy(raw.data(), bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(raw.begin(), raw.end());
    pos_ += sizeof(T);
    T value;
    std::memcpy(&value, raw.data(), sizeof(T));
    return value;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

struct Header {
  std::uint64_t order = 0, split = 0, samples = 0;
  std::vector<Index> modes, ranks;
};

Header read_header(Reader& r) {
  char magic[4];
  for (char& c : magic) c = static_cast<char>(r.get<std::uint8_t>());
  if (std::memcmp(magic, kMagic, 4) != 0) throw ModelFormatError("not a GRTT model file (bad magic)");
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion)
    throw ModelFormatError("unsupported model format version " + std::to_string(version));
  Header h;
  h.order = r.get<std::uint64_t>();
  h.split = r.get<std::uint64_t>();
  h.samples = r.get<std::uint64_t>();
  if (h.order < 2 || h.order > 64 || h.split < 1 || h.split >= h.order || h.samples < 1)
    throw ModelFormatError("model header has inconsistent sizes");
  for (std::uint64_t i = 0; i < h.order; ++i) h.modes.push_back(static_cast<Index>(r.get<std::uint64_t>()));
  for (std::uint64_t i = 0; i < h.order; ++i) h.ranks.push_back(static_cast<Index>(r.get<std::uint64_t>()));
  constexpr Index kMaxDim = Index{1} << 24;
  for (std::size_t i = 0; i < h.modes.size(); ++i)
    if (h.modes[i] < 1 || h.modes[i] > kMaxDim || h.ranks[i] < 1 || h.ranks[i] > kMaxDim)
      throw ModelFormatError("model header has out-of-range mode sizes or ranks");
  if (h.samples > static_cast<std::uint64_t>(kMaxDim)) throw ModelFormatError("model header sample count out of range");
  return h;
}

}  // namespace

std::vector<std::byte> serialize_model(const TTModel& model, const ProjectionTensor& x) {
  if (x.left_rank() != model.core_left_rank() || x.right_rank() != model.core_right_rank())
    throw ShapeError("projection does not match model ranks");
  std::vector<std::byte> out;
  out.reserve(32 + 16 * model.mode_sizes().size() + 8 * static_cast<std::size_t>(storage_cost(model, x)));
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  put_le<std::uint32_t>(out, kModelFormatVersion);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.order()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.split()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(x.samples()));
  for (Index m : model.mode_sizes()) put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m));
  for (Index r : model.ranks()) put_le<std::uint64_t>(out, static_cast<std::uint64_t>(r));
  for (const DenseTensor& f : model.factors())
    for (double v : f.data()) put_le<double>(out, v);
  for (double v : x.tensor().data()) put_le<double>(out, v);
  return out;
}

TTDecomposition deserialize_model(std::span<const std::byte> bytes) {
  Reader r(bytes);
  const Header h = read_header(r);
  const auto n = static_cast<Index>(h.order);
  const auto k = static_cast<Index>(h.split);
  // Check the payload length before allocating anything sized by the header.
  std::uint64_t expected = 0;
  for (Index i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    const Index outer = i < k ? (i == 0 ? 1 : h.ranks[u - 1]) : (i == n - 1 ? 1 : h.ranks[u + 1]);
    expected += static_cast<std::uint64_t>(outer * h.modes[u] * h.ranks[u]);
  }
  expected += h.samples * static_cast<std::uint64_t>(h.ranks[static_cast<std::size_t>(k - 1)] *
                                                     h.ranks[static_cast<std::size_t>(k)]);
  if (expected * sizeof(double) != r.remaining())
    throw ModelFormatError("model payload length does not match the header");
  auto read_tensor = [&r](Shape shape) {
    DenseTensor t(std::move(shape));
    for (double& v : t.data()) v = r.get<double>();
    return t;
  };
  std::vector<DenseTensor> factors;
  for (Index i = 0; i < n; ++i) {
    const Index rank = h.ranks[static_cast<std::size_t>(i)];
    const Index mode = h.modes[static_cast<std::size_t>(i)];
    if (i < k) {
      const Index left = i == 0 ? 1 : h.ranks[static_cast<std::size_t>(i - 1)];
      factors.push_back(read_tensor({left, mode, rank}));
    } else {
      const Index right = i == n - 1 ? 1 : h.ranks[static_cast<std::size_t>(i + 1)];
      factors.push_back(read_tensor({rank, mode, right}));
    }
  }
  DenseTensor core = read_tensor({h.ranks[static_cast<std::size_t>(k - 1)], static_cast<Index>(h.samples),
                                  h.ranks[static_cast<std::size_t>(k)]});
  if (r.remaining() != 0) throw ModelFormatError("trailing bytes after model payload");
  TTDecomposition out;
  out.model = TTModel(h.modes, k, std::move(factors));
  out.projection = ProjectionTensor(std::move(core));
  return out;
}

std::size_t serialized_scalar_count(std::span<const std::byte> bytes) {
  Reader r(bytes);
  read_header(r);
  if (r.remaining() % sizeof(double) != 0) throw ModelFormatError("payload is not a whole number of f64 values");
  return r.remaining() / sizeof(double);
}

void write_model(const std::filesystem::path& path, const TTModel& model, const ProjectionTensor& x) {
  write_file_atomic(path, serialize_model(model, x));
}

TTDecomposition read_model(const std::filesystem::path& path) { return deserialize_model(read_file(path)); }

}  // namespace grtt
