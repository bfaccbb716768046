#ifndef ADVR_DATASETS_HPP
#define ADVR_DATASETS_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include "advr/numcore.hpp"

namespace advr {

/// Labelled examples with features in [0, 1].
struct Dataset {
  Tensor features;  // n x d
  std::vector<std::size_t> labels;
  std::size_t class_count = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.rank() == 2 ? features.cols() : 0; }
  Tensor example(std::size_t i) const;

  /// Checks the label/feature invariants; throws ErrorKind::Argument on violation.
  void validate() const;

  /// Rows in the given order.
  Dataset subset(const std::vector<std::size_t> &indices) const;
};

struct GaussianMixtureConfig {
  std::size_t classes = 10;
  std::size_t dim = 64;
  std::size_t n_per_class = 100;
  double spread = 0.1;
  std::uint64_t seed = 0;
};

Dataset gen_gaussian_mixture(const GaussianMixtureConfig &cfg);

Dataset load_idx(const std::filesystem::path &images_path, const std::filesystem::path &labels_path);

struct Split {
  Dataset train;
  Dataset test;
};

Split split(const Dataset &data, double test_fraction, std::uint64_t seed);

}  // namespace advr

#endif  // ADVR_DATASETS_HPP
