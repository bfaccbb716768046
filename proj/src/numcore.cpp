#include "advr/numcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace advr {

namespace {

std::size_t extent_product(const std::vector<std::size_t> &shape) {
  std::size_t n = 1;
  for (std::size_t e : shape) {
    if (e == 0) {
      throw Error(ErrorKind::Dimension, "tensor extents must be positive, got " + shape_string(shape));
    }
    n *= e;
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(extent_product(shape_), fill) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (extent_product(shape_) != data_.size()) {
    throw Error(ErrorKind::Dimension, "tensor data length " + std::to_string(data_.size()) +
                                          " does not match shape " + shape_string(shape_));
  }
}

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto &row : rows) {
    if (row.size() != c) {
      throw Error(ErrorKind::Dimension, "ragged matrix literal");
    }
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor({r, c}, std::move(data));
}

std::size_t Tensor::rows() const {
  if (rank() != 2) throw Error(ErrorKind::Dimension, "rows() on tensor of shape " + shape_string(shape_));
  return shape_[0];
}

std::size_t Tensor::cols() const {
  if (rank() != 2) throw Error(ErrorKind::Dimension, "cols() on tensor of shape " + shape_string(shape_));
  return shape_[1];
}

std::span<const double> Tensor::row(std::size_t r) const {
  const std::size_t c = cols();
  return std::span<const double>(data_).subspan(r * c, c);
}

std::span<double> Tensor::row(std::size_t r) {
  const std::size_t c = cols();
  return std::span<double>(data_).subspan(r * c, c);
}

std::string shape_string(const std::vector<std::size_t> &shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

RngStream::Draw RngStream::next() const {
  std::uint64_t state = state_ + 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return {z ^ (z >> 31), RngStream(state)};
}

std::uint64_t RngStream::next_u64() {
  Draw d = next();
  state_ = d.next.state_;
  return d.value;
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) { return lo + (hi - lo) * next_unit(); }

double RngStream::normal() {
  // 1 - u lies in (0, 1], so the log is finite.
  const double u1 = 1.0 - next_unit();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t RngStream::below(std::size_t n) {
  if (n == 0) throw Error(ErrorKind::Argument, "below(0)");
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return static_cast<std::size_t>(v % n);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return RngStream(seed ^ (tag * 0xD1B54A32D192ED03ULL)).next().value;
}

std::vector<std::size_t> permutation(std::size_t n, RngStream &rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(idx[i - 1], idx[rng.below(i)]);
  }
  return idx;
}

Tensor matmul(const Tensor &a, const Tensor &b) {
  if (a.rank() != 2 || b.rank() != 2 || a.shape()[1] != b.shape()[0]) {
    throw Error(ErrorKind::Dimension, "matmul shape mismatch: " + shape_string(a.shape()) +
                                          " x " + shape_string(b.shape()));
  }
  const std::size_t m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  Tensor out({m, n});
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += a.at(i, p) * b.at(p, j);
      out.at(i, j) = acc;
    }
  }
  return out;
}

Tensor sign(const Tensor &t) {
  Tensor out = t;
  for (double &v : out.values()) v = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  return out;
}

Tensor clip(const Tensor &t, double lo, double hi) {
  if (!(lo <= hi)) {
    throw Error(ErrorKind::Argument, "clip bounds inverted: lo=" + std::to_string(lo) +
                                         " hi=" + std::to_string(hi));
  }
  Tensor out = t;
  for (double &v : out.values()) v = std::min(std::max(v, lo), hi);
  return out;
}

Norms norms(std::span<const double> v) {
  Norms n;
  double sq = 0.0;
  for (double x : v) {
    sq += x * x;
    n.linf = std::max(n.linf, std::abs(x));
  }
  n.l2 = std::sqrt(sq);
  return n;
}

Norms norms(const Tensor &t) { return norms(t.data()); }

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double &v : out) v /= total;
  return out;
}

Tensor softmax(const Tensor &logits) {
  if (logits.size() < 2) throw Error(ErrorKind::Dimension, "softmax needs at least two classes");
  return Tensor(logits.shape(), softmax(logits.data()));
}

CrossEntropy cross_entropy(const Tensor &logits, std::size_t label) {
  const auto z = logits.data();
  if (label >= z.size()) {
    throw Error(ErrorKind::Argument, "label " + std::to_string(label) + " out of range for " +
                                         std::to_string(z.size()) + " classes");
  }
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double v : z) total += std::exp(v - top);
  const double log_norm = top + std::log(total);

  CrossEntropy ce;
  ce.loss = log_norm - z[label];
  ce.grad_logits = Tensor(logits.shape());
  for (std::size_t i = 0; i < z.size(); ++i) ce.grad_logits[i] = std::exp(z[i] - log_norm);
  ce.grad_logits[label] -= 1.0;
  return ce;
}

std::size_t argmax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::size_t argmin(std::span<const double> v) {
  return static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
}

bool in_top_k(std::span<const double> v, std::size_t label, std::size_t k) {
  std::size_t rank = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] > v[label] || (v[i] == v[label] && i < label)) ++rank;
  }
  return rank < k;
}

Tensor subtract(const Tensor &a, const Tensor &b) {
  if (a.shape() != b.shape()) {
    throw Error(ErrorKind::Dimension, "subtract shape mismatch: " + shape_string(a.shape()) +
                                          " vs " + shape_string(b.shape()));
  }
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor finite_diff_grad(const ScalarFn &f, const Tensor &x, double h) {
  if (!(h > 0.0)) throw Error(ErrorKind::Argument, "finite difference step must be positive");
  Tensor grad(x.shape());
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

}  // namespace advr
