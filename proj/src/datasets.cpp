#include "grtt/datasets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "grtt/file_io.hpp"

namespace grtt {

Index TensorDataset::class_count() const {
  return static_cast<Index>(std::set<Index>(labels.begin(), labels.end()).size());
}

DenseTensor TensorDataset::as_tensor() const {
  Shape shape = sample_shape;
  shape.push_back(samples.cols());
  return DenseTensor::from_matrix(samples, std::move(shape));
}

TensorDataset TensorDataset::subset(std::span<const Index> indices) const {
  TensorDataset out;
  out.sample_shape = sample_shape;
  out.samples.resize(samples.rows(), static_cast<Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    out.samples.col(static_cast<Index>(i)) = samples.col(indices[i]);
    if (!labels.empty()) out.labels.push_back(labels[static_cast<std::size_t>(indices[i])]);
  }
  return out;
}

namespace {

std::uint32_t be32(const std::byte* p) {
  return (std::to_integer<std::uint32_t>(p[0]) << 24) | (std::to_integer<std::uint32_t>(p[1]) << 16) |
         (std::to_integer<std::uint32_t>(p[2]) << 8) | std::to_integer<std::uint32_t>(p[3]);
}

void put_be32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::byte>((v >> shift) & 0xFFu));
}

struct IdxArray {
  std::uint8_t type = 0;
  std::vector<std::uint32_t> dims;
  std::vector<std::byte> bytes;
  std::size_t payload_offset = 0;
};

IdxArray read_idx(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DatasetError("IDX file not found: " + path.string());
  IdxArray a;
  a.bytes = read_file(path);
  if (a.bytes.size() < 4) throw DatasetError(path.string() + ": truncated IDX header");
  const std::uint32_t magic = be32(a.bytes.data());
  if ((magic >> 16) != 0) throw DatasetError(path.string() + ": bad IDX magic");
  a.type = static_cast<std::uint8_t>((magic >> 8) & 0xFFu);
  const std::uint32_t ndims = magic & 0xFFu;
  if (ndims == 0) throw DatasetError(path.string() + ": IDX file declares no dimensions");
  a.payload_offset = 4 + 4 * static_cast<std::size_t>(ndims);
  if (a.bytes.size() < a.payload_offset) throw DatasetError(path.string() + ": truncated IDX header");
  for (std::uint32_t d = 0; d < ndims; ++d) a.dims.push_back(be32(a.bytes.data() + 4 + 4 * d));
  std::size_t elem = 0;
  switch (a.type) {
    case 0x08: elem = 1; break;
    case 0x0D: elem = 4; break;
    default: throw DatasetError(path.string() + ": unsupported IDX element type");
  }
  std::size_t count = 1;
  for (std::uint32_t d : a.dims) count *= d;
  if (a.bytes.size() < a.payload_offset + count * elem) throw DatasetError(path.string() + ": truncated IDX payload");
  return a;
}

double idx_value(const IdxArray& a, std::size_t i) {
  const std::byte* p = a.bytes.data() + a.payload_offset;
  if (a.type == 0x08) return std::to_integer<unsigned>(p[i]) / 255.0;
  const std::uint32_t bits = be32(p + 4 * i);
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return static_cast<double>(f);
}

}  // namespace

std::vector<Index> read_idx_labels(const std::filesystem::path& labels) {
  const IdxArray lab = read_idx(labels);
  if (lab.type != 0x08 || lab.dims.size() != 1) throw DatasetError(labels.string() + ": bad IDX label magic");
  std::vector<Index> out(lab.dims[0]);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::to_integer<Index>(lab.bytes[lab.payload_offset + i]);
  return out;
}

TensorDataset ingest_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                         const DatasetSpec& spec) {
  const IdxArray img = read_idx(images);
  if (img.dims.size() < 2) throw DatasetError(images.string() + ": bad IDX image magic (need >= 2 dimensions)");
  std::vector<Index> lab = read_idx_labels(labels);
  const Index count = img.dims[0];
  if (static_cast<Index>(lab.size()) != count)
    throw DatasetError("image/label count mismatch: " + std::to_string(count) + " images, " +
                       std::to_string(lab.size()) + " labels");
  Index per_sample = 1;
  for (std::size_t d = 1; d < img.dims.size(); ++d) per_sample *= img.dims[d];

  TensorDataset out;
  if (spec.reshape.empty()) {
    out.sample_shape.assign(img.dims.rbegin(), img.dims.rend() - 1);
  } else {
    out.sample_shape = spec.reshape;
  }
  if (shape_product(out.sample_shape) != per_sample)
    throw DatasetError("reshape target " + shape_to_string(out.sample_shape) + " does not hold " +
                       std::to_string(per_sample) + " elements per sample");
  out.samples.resize(per_sample, count);
  for (Index s = 0; s < count; ++s)
    for (Index i = 0; i < per_sample; ++i)
      out.samples(i, s) = idx_value(img, static_cast<std::size_t>(s * per_sample + i));
  out.labels = std::move(lab);
  return out;
}

void write_idx_labels(const std::filesystem::path& labels, std::span<const Index> values) {
  std::vector<std::byte> out;
  put_be32(out, 0x00000801u);
  put_be32(out, static_cast<std::uint32_t>(values.size()));
  for (Index v : values) {
    if (v < 0 || v > 255) throw DatasetError("IDX labels must fit in one byte");
    out.push_back(static_cast<std::byte>(v));
  }
  write_file_atomic(labels, out);
}

void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels, const TensorDataset& data,
               std::span<const Index> image_dims) {
  if (shape_product(image_dims) != data.samples.rows()) throw DatasetError("image_dims do not match sample size");
  bool bytes_ok = true;
  for (Index j = 0; j < data.samples.cols() && bytes_ok; ++j)
    for (Index i = 0; i < data.samples.rows(); ++i) {
      const double v = data.samples(i, j) * 255.0;
      if (v < -1e-9 || v > 255.0 + 1e-9 || std::abs(v - std::round(v)) > 1e-9) {
        bytes_ok = false;
        break;
      }
    }
  std::vector<std::byte> out;
  const auto ndims = static_cast<std::uint32_t>(image_dims.size() + 1);
  put_be32(out, ((bytes_ok ? 0x08u : 0x0Du) << 8) | ndims);
  put_be32(out, static_cast<std::uint32_t>(data.samples.cols()));
  for (Index d : image_dims) put_be32(out, static_cast<std::uint32_t>(d));
  for (Index j = 0; j < data.samples.cols(); ++j)
    for (Index i = 0; i < data.samples.rows(); ++i) {
      if (bytes_ok) {
        out.push_back(static_cast<std::byte>(static_cast<unsigned>(std::lround(data.samples(i, j) * 255.0))));
      } else {
        const auto f = static_cast<float>(data.samples(i, j));
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof bits);
        put_be32(out, bits);
      }
    }
  write_file_atomic(images, out);
  write_idx_labels(labels, data.labels);
}

namespace {

struct Pgm {
  Index width = 0, height = 0;
  std::vector<double> pixels;  // row-major, scaled to [0, 1]
};

Pgm read_pgm(const std::filesystem::path& path) {
  const std::vector<std::byte> raw = read_file(path);
  std::size_t pos = 0;
  auto skip_space = [&] {
    while (pos < raw.size()) {
      const char c = static_cast<char>(raw[pos]);
      if (c == '#') {
        while (pos < raw.size() && static_cast<char>(raw[pos]) != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() -> long {
    skip_space();
    long v = 0;
    bool any = false;
    while (pos < raw.size() && std::isdigit(static_cast<unsigned char>(raw[pos]))) {
      v = v * 10 + (static_cast<char>(raw[pos]) - '0');
      ++pos;
      any = true;
    }
    if (!any) throw DatasetError(path.string() + ": malformed PGM header");
    return v;
  };
  if (raw.size() < 2 || static_cast<char>(raw[0]) != 'P' || static_cast<char>(raw[1]) != '5')
    throw DatasetError(path.string() + ": not a binary PGM (P5) file");
  pos = 2;
  Pgm img;
  img.width = read_int();
  img.height = read_int();
  const long maxval = read_int();
  if (maxval < 1 || maxval > 255) throw DatasetError(path.string() + ": only 8-bit PGM is supported");
  ++pos;  // single whitespace before the raster
  const auto count = static_cast<std::size_t>(img.width * img.height);
  if (raw.size() < pos + count) throw DatasetError(path.string() + ": truncated PGM raster");
  img.pixels.resize(count);
  for (std::size_t i = 0; i < count; ++i)
    img.pixels[i] = std::to_integer<unsigned>(raw[pos + i]) / static_cast<double>(maxval);
  return img;
}

}  // namespace

std::vector<double> block_average_2x2(std::span<const double> image, Index rows, Index cols) {
  if (rows % 2 != 0 || cols % 2 != 0) throw DatasetError("block averaging needs even image dimensions");
  if (static_cast<Index>(image.size()) != rows * cols) throw DatasetError("image size mismatch");
  std::vector<double> out(static_cast<std::size_t>(rows * cols / 4));
  const Index oc = cols / 2;
  for (Index r = 0; r < rows / 2; ++r)
    for (Index c = 0; c < oc; ++c) {
      const auto at = [&](Index rr, Index cc) { return image[static_cast<std::size_t>(rr * cols + cc)]; };
      out[static_cast<std::size_t>(r * oc + c)] =
          0.25 * (at(2 * r, 2 * c) + at(2 * r, 2 * c + 1) + at(2 * r + 1, 2 * c) + at(2 * r + 1, 2 * c + 1));
    }
  return out;
}

TensorDataset ingest_image_dir(const std::filesystem::path& dir, const DatasetSpec& spec) {
  if (!std::filesystem::is_directory(dir)) throw DatasetError("image directory not found: " + dir.string());
  if (spec.reshape.empty()) throw DatasetError("image-dir ingestion needs a reshape target");
  const Index target = shape_product(spec.reshape);

  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  std::map<std::string, Index> class_ids;
  for (const auto& f : files) {
    if (f.extension() != ".pgm") throw DatasetError(f.string() + ": not a .pgm file");
    const std::string stem = f.stem().string();
    const auto us = stem.find('_');
    if (us == std::string::npos || us == 0) throw DatasetError(f.string() + ": expected <class>_<instance>.pgm");
    class_ids.emplace(stem.substr(0, us), 0);
  }
  Index next = 0;
  for (auto& [name, id] : class_ids) id = next++;

  TensorDataset out;
  out.sample_shape = spec.reshape;
  out.samples.resize(target, static_cast<Index>(files.size()));
  for (std::size_t s = 0; s < files.size(); ++s) {
    Pgm img = read_pgm(files[s]);
    std::vector<double> px = std::move(img.pixels);
    if (img.width * img.height == 4 * target) {
      px = block_average_2x2(px, img.height, img.width);
    } else if (img.width * img.height != target) {
      throw DatasetError(files[s].string() + ": " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                         " image does not match reshape target " + shape_to_string(spec.reshape));
    }
    out.samples.col(static_cast<Index>(s)) = Eigen::Map<const Vector>(px.data(), target);
    const std::string stem = files[s].stem().string();
    out.labels.push_back(class_ids.at(stem.substr(0, stem.find('_'))));
  }
  return out;
}

TensorDataset synth_clusters(Index k, Index per_class, const Shape& shape, double noise_sigma, std::uint64_t seed) {
  if (!(noise_sigma >= 0.0)) throw std::invalid_argument("noise_sigma must be nonnegative");
  if (k < 1 || per_class < 1) throw std::invalid_argument("synth_clusters needs k >= 1 and per_class >= 1");
  const Index d = shape_product(shape);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Matrix prototypes(d, k);
  for (Index c = 0; c < k; ++c) {
    Vector proto = Vector::Ones(1);
    for (Index size : shape) {
      Vector factor(size);
      for (Index i = 0; i < size; ++i) factor(i) = normal(rng);
      // First-index-fastest outer product: new index = old + |old| * i.
      Vector next(proto.size() * size);
      for (Index i = 0; i < size; ++i) next.segment(i * proto.size(), proto.size()) = factor(i) * proto;
      proto = std::move(next);
    }
    prototypes.col(c) = proto * (std::sqrt(static_cast<double>(d)) / proto.norm());
  }

  TensorDataset out;
  out.sample_shape = shape;
  out.samples.resize(d, k * per_class);
  for (Index c = 0; c < k; ++c)
    for (Index j = 0; j < per_class; ++j) {
      const Index s = c * per_class + j;
      out.samples.col(s) = prototypes.col(c);
      if (noise_sigma > 0.0)
        for (Index i = 0; i < d; ++i) out.samples(i, s) += noise_sigma * normal(rng);
      out.labels.push_back(c);
    }
  return out;
}

DatasetSplit stratified_split(const TensorDataset& pool, Index per_class, Index validation_per_class,
                              std::uint64_t seed) {
  if (pool.labels.size() != static_cast<std::size_t>(pool.size()))
    throw DatasetError("stratified split needs one label per sample");
  if (per_class < 0 || validation_per_class < 0) throw std::invalid_argument("per-class counts must be nonnegative");
  std::map<Index, std::vector<Index>> by_class;
  for (Index s = 0; s < pool.size(); ++s) by_class[pool.labels[static_cast<std::size_t>(s)]].push_back(s);

  std::mt19937_64 rng(seed);
  std::vector<Index> train, validation;
  for (auto& [label, idx] : by_class) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const Index have = static_cast<Index>(idx.size());
    if (validation_per_class + per_class > have)
      throw DatasetError("class " + std::to_string(label) + " has " + std::to_string(have) + " samples, need " +
                         std::to_string(validation_per_class + per_class));
    validation.insert(validation.end(), idx.begin(), idx.begin() + validation_per_class);
    const Index take = per_class > 0 ? per_class : have - validation_per_class;
    train.insert(train.end(), idx.begin() + validation_per_class, idx.begin() + validation_per_class + take);
  }
  std::sort(train.begin(), train.end());
  std::sort(validation.begin(), validation.end());
  return {pool.subset(train), pool.subset(validation)};
}

std::uint64_t dataset_checksum(const TensorDataset& data) {
  // FNV-1a over the raw sample bytes, then the labels.
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(data.samples.data(), static_cast<std::size_t>(data.samples.size()) * sizeof(double));
  for (Index l : data.labels) mix(&l, sizeof l);
  return h;
}

}  // namespace grtt
