#ifndef ADVR_SELFCHECK_HPP
#define ADVR_SELFCHECK_HPP

#include <cstdint>
#include <string>

#include "advr/model.hpp"

namespace advr {

/// Analytic-versus-finite-difference comparison for one (model, x, y) triple.
struct GradCheck {
  double max_rel_error = 0.0;  // over components with |analytic| > small_threshold
  double max_abs_error = 0.0;  // over the remaining components
  std::size_t components = 0;
  bool passed = false;
};

struct GradCheckTolerance {
  double h = 1e-5;
  double rel = 1e-5;
  double abs = 1e-8;
  double small_threshold = 1e-6;
};

/// Checks the input gradient and every parameter gradient of the loss.
GradCheck check_gradients(const MlpParams &p, const Tensor &x, std::size_t y,
                          const GradCheckTolerance &tol = {});

/// Random model with nonzero biases plus an input and label, all from `seed`.
struct GradCase {
  MlpParams params;
  Tensor x;
  std::size_t y = 0;
};
GradCase random_grad_case(std::uint64_t seed);

/// One DeepFool step on a random affine classifier compared with the closed form
/// computed from the weight rows directly.
struct DeepFoolCheck {
  double max_step_error = 0.0;      // |r - r_closed_form|_inf
  double boundary_residual = 0.0;   // |z_k* - z_y| after the overshoot-free step
  bool one_iteration = false;       // with the default overshoot the label flips after one step
  bool passed = false;
};

DeepFoolCheck check_deepfool_affine(std::uint64_t seed, double step_tol = 1e-6, double residual_tol = 1e-9);

}  // namespace advr

#endif  // ADVR_SELFCHECK_HPP
