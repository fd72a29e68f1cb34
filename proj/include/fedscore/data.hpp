#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fedscore {

/// Row-major feature matrix with integer class labels.
struct LabeledDataset {
  int dim = 0;
  int n_classes = 0;
  std::vector<double> features;  // size() * dim
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
  void push_back(std::span<const double> x, int label);

  /// Throws std::invalid_argument if lengths disagree or a label is out of range.
  void validate() const;
  std::vector<std::size_t> class_counts() const;
};

LabeledDataset subset(const LabeledDataset& data, std::span<const std::size_t> indices);

struct SyntheticSpec {
  int n_classes = 4;
  int dim = 8;
  int train_samples = 540;
  int test_samples_per_class = 50;
  // Distance scale of the class means from the origin; noise is unit variance.
  double separation = 1.5;
  // Class means come from this seed, so every run seed sees the same task.
  std::uint64_t means_seed = 2024;
};

struct SyntheticData {
  LabeledDataset train;
  LabeledDataset test;
};

/// Gaussian class clusters. Training labels are balanced up to remainder and
/// shuffled; the test set holds exactly test_samples_per_class per class.
SyntheticData generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Per-class Dirichlet(mu) proportions with largest-remainder rounding. Every
/// shard is nonempty: the whole draw is resampled up to 100 times, after which
/// one sample is moved from the largest shard into each empty one.
std::vector<LabeledDataset> dirichlet_partition(const LabeledDataset& train, int n_clients, double mu,
                                                std::uint64_t seed);

/// Shuffled near-equal split.
std::vector<LabeledDataset> iid_partition(const LabeledDataset& train, int n_clients, std::uint64_t seed);

enum class FlipMode {
  kUniformOther,  // uniformly random among the other k-1 classes
  kTargeted,      // label -> (label + 1) mod k
};

/// Each label is replaced independently with probability rate.
LabeledDataset flip_labels(const LabeledDataset& data, double rate, std::uint64_t seed,
                           FlipMode mode = FlipMode::kUniformOther);

/// CSV with header x0..x{d-1},label. read_dataset_csv needs n_classes since it
/// is not recoverable from a subset of labels.
void write_dataset_csv(std::ostream& out, const LabeledDataset& data);
LabeledDataset read_dataset_csv(std::istream& in, int n_classes);

}  // namespace fedscore
