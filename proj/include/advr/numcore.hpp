#ifndef ADVR_NUMCORE_HPP
#define ADVR_NUMCORE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "advr/error.hpp"

namespace advr {

/// Dense row-major array of doubles with an explicit shape.
///
/// The data length always equals the product of the extents. Tensors are
/// plain values: copies are deep and operations return new tensors.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0);
  Tensor(std::vector<std::size_t> shape, std::vector<double> data);

  static Tensor vector(std::vector<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);

  const std::vector<std::size_t> &shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  std::size_t rows() const;
  std::size_t cols() const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }
  std::vector<double> &values() noexcept { return data_; }
  const std::vector<double> &values() const noexcept { return data_; }

  double &operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double &at(std::size_t r, std::size_t c) { return data_[r * shape_[1] + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * shape_[1] + c]; }

  /// Row r of a rank-2 tensor as a view.
  std::span<const double> row(std::size_t r) const;
  std::span<double> row(std::size_t r);

  bool operator==(const Tensor &other) const = default;

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

std::string shape_string(const std::vector<std::size_t> &shape);

/// splitmix64 generator. Pure: next() returns the value and advances a copy.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : state_(seed) {}

  std::uint64_t state() const noexcept { return state_; }

  struct Draw;
  Draw next() const;

  // Mutating conveniences over next().
  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double next_unit();
  /// Uniform in [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller; consumes two draws, uses the cosine branch.
  double normal();
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::uint64_t state_;
};

struct RngStream::Draw {
  std::uint64_t value;
  RngStream next;
};

/// Mixes a tag into a seed so independent consumers get independent streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

/// Seeded Fisher-Yates permutation of [0, n).
std::vector<std::size_t> permutation(std::size_t n, RngStream &rng);

Tensor matmul(const Tensor &a, const Tensor &b);
Tensor sign(const Tensor &t);
Tensor clip(const Tensor &t, double lo, double hi);

struct Norms {
  double l2 = 0.0;
  double linf = 0.0;
};
Norms norms(const Tensor &t);
Norms norms(std::span<const double> v);

Tensor softmax(const Tensor &logits);
std::vector<double> softmax(std::span<const double> logits);

struct CrossEntropy {
  double loss = 0.0;
  Tensor grad_logits;
};
CrossEntropy cross_entropy(const Tensor &logits, std::size_t label);

/// Index of the largest (smallest) entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> v);
std::size_t argmin(std::span<const double> v);

/// True when `label` is among the k largest entries, ties by lower index.
bool in_top_k(std::span<const double> v, std::size_t label, std::size_t k);

Tensor subtract(const Tensor &a, const Tensor &b);

using ScalarFn = std::function<double(const Tensor &)>;

/// Central differences (f(x + h e_i) - f(x - h e_i)) / 2h per coordinate.
Tensor finite_diff_grad(const ScalarFn &f, const Tensor &x, double h);

}  // namespace advr

#endif  // ADVR_NUMCORE_HPP
