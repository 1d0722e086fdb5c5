#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "grtt/tensor.hpp"

namespace grtt {

class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Labelled samples; column s of `samples` is sample s vectorized
/// first-index-fastest over `sample_shape`.
struct TensorDataset {
  Shape sample_shape;
  Matrix samples;
  std::vector<Index> labels;

  Index size() const { return samples.cols(); }
  Index class_count() const;
  /// (I_1..I_N, S) tensor with the samples along the last mode.
  DenseTensor as_tensor() const;
  TensorDataset subset(std::span<const Index> indices) const;
};

enum class SourceKind { idx, image_dir, synthetic };

struct DatasetSpec {
  SourceKind source = SourceKind::idx;
  /// Target tensor shape for each sample, e.g. {4, 7, 4, 7}.
  Shape reshape;
  /// Samples per class kept for the experiment (0 keeps everything).
  Index per_class = 0;
  /// Samples per class held out for validation, disjoint from the above.
  Index validation_per_class = 0;
  std::uint64_t seed = 0;
};

struct DatasetSplit {
  TensorDataset train;
  TensorDataset validation;
};

/**
 * Reads an IDX image file and its label file. Image element types 0x08
 * (unsigned byte, scaled by 1/255) and 0x0D (float32, taken as is) are
 * accepted; the label file must be 0x00000801. Each image (row-major in
 * the file) is taken in file order as the first-index-fastest buffer of
 * `spec.reshape`, so for 28x28 and (4,7,4,7) the column index fills modes
 * 1-2 and the row index modes 3-4.
 */
TensorDataset ingest_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                         const DatasetSpec& spec);

/// Writes IDX files (unsigned-byte images when every value is an integer
/// multiple of 1/255 in [0,1], float32 otherwise) for `ingest_idx`.
void write_idx(const std::filesystem::path& images, const std::filesystem::path& labels, const TensorDataset& data,
               std::span<const Index> image_dims);
void write_idx_labels(const std::filesystem::path& labels, std::span<const Index> values);
std::vector<Index> read_idx_labels(const std::filesystem::path& labels);

/**
 * Loads binary PGM (P5, maxval <= 255) files named <class>_<instance>.pgm.
 * Images with 4x the target element count are reduced by 2x2 block
 * averaging first (e.g. 128x128 -> 64x64 for an (8,8,8,8) target). Labels
 * are assigned by sorted class name.
 */
TensorDataset ingest_image_dir(const std::filesystem::path& dir, const DatasetSpec& spec);

/// 2x2 block average of a row-major rows x cols image.
std::vector<double> block_average_2x2(std::span<const double> image, Index rows, Index cols);

/// K random rank-1 prototypes (outer products of Gaussian vectors scaled to
/// unit norm) plus i.i.d. N(0, noise_sigma^2) noise per entry.
TensorDataset synth_clusters(Index k, Index per_class, const Shape& shape, double noise_sigma, std::uint64_t seed);

/// Seeded stratified draw of `per_class` training and `validation_per_class`
/// validation samples per class, disjoint. 0 per_class keeps the remainder.
DatasetSplit stratified_split(const TensorDataset& pool, Index per_class, Index validation_per_class,
                              std::uint64_t seed);

/// FNV-1a checksum of the sample buffer and labels.
std::uint64_t dataset_checksum(const TensorDataset& data);

}  // namespace grtt
