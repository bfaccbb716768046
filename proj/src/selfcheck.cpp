#include "advr/selfcheck.hpp"

#include <cmath>
#include <limits>

#include "advr/attacks.hpp"

namespace advr {

namespace {

void compare(std::span<const double> analytic, std::span<const double> numeric,
             const GradCheckTolerance &tol, GradCheck &out) {
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double diff = std::abs(analytic[i] - numeric[i]);
    if (std::abs(analytic[i]) > tol.small_threshold) {
      out.max_rel_error = std::max(out.max_rel_error, diff / std::abs(analytic[i]));
    } else {
      out.max_abs_error = std::max(out.max_abs_error, diff);
    }
    ++out.components;
  }
}

}  // namespace

GradCheck check_gradients(const MlpParams &p, const Tensor &x, std::size_t y, const GradCheckTolerance &tol) {
  const LossAndGrads analytic = loss_and_grads(p, x, y);
  GradCheck out;

  const Tensor fd_input = finite_diff_grad([&](const Tensor &v) { return loss(p, v, y); }, x, tol.h);
  compare(analytic.input_grad.data(), fd_input.data(), tol, out);

  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    for (int which = 0; which < 2; ++which) {
      const Tensor &param = which == 0 ? p.layers[l].weight : p.layers[l].bias;
      const Tensor &grad = which == 0 ? analytic.param_grads.layers[l].weight
                                      : analytic.param_grads.layers[l].bias;
      const Tensor fd = finite_diff_grad(
          [&](const Tensor &v) {
            MlpParams q = p;
            (which == 0 ? q.layers[l].weight : q.layers[l].bias) = v;
            return loss(q, x, y);
          },
          param, tol.h);
      compare(grad.data(), fd.data(), tol, out);
    }
  }
  out.passed = out.max_rel_error <= tol.rel && out.max_abs_error <= tol.abs;
  return out;
}

GradCase random_grad_case(std::uint64_t seed) {
  RngStream rng(seed);
  const std::size_t depth = 1 + rng.below(3);  // hidden layers
  MlpSpec spec;
  spec.id = "gradcheck";
  spec.layer_widths.push_back(3 + rng.below(6));
  for (std::size_t i = 0; i < depth; ++i) spec.layer_widths.push_back(3 + rng.below(8));
  spec.layer_widths.push_back(2 + rng.below(5));

  GradCase c;
  c.params = init_params(spec, derive_seed(seed, 1));
  for (DenseLayer &layer : c.params.layers) {
    for (double &b : layer.bias.values()) b = rng.uniform(-0.5, 0.5);
  }
  std::vector<double> x(spec.input_dim());
  for (double &v : x) v = rng.next_unit();
  c.x = Tensor::vector(std::move(x));
  c.y = rng.below(spec.class_count());
  return c;
}

DeepFoolCheck check_deepfool_affine(std::uint64_t seed, double step_tol, double residual_tol) {
  RngStream rng(seed);
  const std::size_t d = 2 + rng.below(8);
  const std::size_t classes = 2 + rng.below(5);
  MlpParams p = init_params(MlpSpec{{d, classes}, "affine"}, derive_seed(seed, 2));
  for (double &b : p.layers[0].bias.values()) b = rng.uniform(-0.5, 0.5);
  std::vector<double> xv(d);
  for (double &v : xv) v = rng.uniform(0.2, 0.8);
  const Tensor x = Tensor::vector(xv);
  const std::vector<double> z = logits(p, x.data());
  const std::size_t y = argmax(z);

  // Closed form: every class-difference direction is a difference of weight rows.
  const Tensor &w = p.layers[0].weight;
  double best_ratio = std::numeric_limits<double>::infinity();
  std::vector<double> best_r(d, 0.0);
  std::size_t best_k = y;
  for (std::size_t k = 0; k < classes; ++k) {
    if (k == y) continue;
    std::vector<double> wk(d);
    double sq = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      wk[j] = w.at(k, j) - w.at(y, j);
      sq += wk[j] * wk[j];
    }
    const double f = std::abs(z[k] - z[y]);
    const double ratio = f / std::sqrt(sq);
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best_k = k;
      for (std::size_t j = 0; j < d; ++j) best_r[j] = f / sq * wk[j];
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  const AttackResult one = deepfool(p, x, y, DeepFoolConfig{1, 0.0, -kInf, kInf});
  DeepFoolCheck out;
  for (std::size_t j = 0; j < d; ++j) {
    out.max_step_error = std::max(out.max_step_error, std::abs((one.x_adv[j] - x[j]) - best_r[j]));
  }
  const std::vector<double> z_adv = logits(p, one.x_adv.data());
  out.boundary_residual = std::abs(z_adv[best_k] - z_adv[y]);

  const AttackResult full = deepfool(p, x, y, DeepFoolConfig{50, 0.02, -kInf, kInf});
  out.one_iteration = full.iterations_used == 1 && full.success;
  out.passed = out.max_step_error <= step_tol && out.boundary_residual <= residual_tol && out.one_iteration;
  return out;
}

}  // namespace advr
