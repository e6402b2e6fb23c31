#pragma once

// Dataset ingestion and synthetic data.
//
// On disk a dataset is a manifest JSON document plus a JSON-lines sample
// file. Manifest:
//   {"name": "...", "format_version": 1, "samples": "samples.jsonl",
//    "root_index": 0,
//    "split": {"train": [0, 2, ...], "test": [1, 3, ...]}}
// "split" may be replaced by
//   "split_rule": {"kind": "stratified_fraction", "train_fraction": 0.5}
// which assigns, per class and in file order, the first ceil(f·n) samples to
// train and the rest to test. Sample records:
//   {"label": "wave", "joints": [[[x, y, z], ...J], ...T]}

#include "kronfeat/descriptor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace kronfeat {

inline constexpr int kDatasetFormatVersion = 1;

struct DatasetManifest {
  std::string name;
  int format_version = kDatasetFormatVersion;
  int root_index = 0;
  std::vector<SkeletonSequence> samples;
  std::vector<int> train_indices;
  std::vector<int> test_indices;

  /// Structural checks: split indices in range and disjoint. Throws DataError.
  void validate() const;
  /// Additionally requires every class to appear in both splits.
  void validate_supervised() const;

  std::vector<std::string> labels() const;
};

/// Throws DataError with file/line context on malformed input.
DatasetManifest load_dataset(const std::filesystem::path& manifest_path);

/// Parses JSON-lines sample records. Throws DataError naming the line.
std::vector<SkeletonSequence> load_samples_jsonl(const std::filesystem::path& path, int root_index);

/// Writes `<stem>.jsonl` next to the manifest and records explicit splits.
void save_dataset(const DatasetManifest& m, const std::filesystem::path& manifest_path);

struct SynthOptions {
  int classes = 5;
  int per_class = 40;
  int joints = 6;
  int t_min = 30;
  int t_max = 60;
  double noise = 0.05;
  std::uint64_t seed = 0;
  double train_fraction = 0.5;
};

/// Each class is a smooth prototype motion: every non-root coordinate is a
/// class-specific random mixture of sinusoids in normalized time; samples add
/// i.i.d. Gaussian noise and a random global translation, with T uniform in
/// [t_min, t_max]. Splits are stratified by train_fraction.
DatasetManifest synth_dataset(const SynthOptions& opts);

struct RadialOptions {
  int classes = 5;
  int per_class = 40;
  int d = 4;
  /// Fraction of each angular band left empty on both sides.
  double margin = 0.1;
  std::uint64_t seed = 0;
  /// Draws with the same pole_seed share the pole, so independent train and
  /// test sets come from the same distribution.
  std::uint64_t pole_seed = 0;
};

struct DescriptorSet {
  std::vector<Matrix> inputs;
  std::vector<std::string> labels;
};

/// Unit-norm upper-triangular d×d matrices arranged in concentric angular
/// shells around a fixed pole: class k has geodesic angle to the pole inside
/// band k of [0, π] and a uniformly random direction otherwise.
DescriptorSet radial_descriptors(const RadialOptions& opts);

}  // namespace kronfeat
