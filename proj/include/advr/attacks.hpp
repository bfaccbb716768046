#ifndef ADVR_ATTACKS_HPP
#define ADVR_ATTACKS_HPP

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "advr/datasets.hpp"
#include "advr/model.hpp"

namespace advr {

/// l-infinity budget shared by the sign-gradient attacks.
struct AttackBudget {
  double epsilon = 0.0;
  std::size_t steps = 1;
  std::optional<double> step_size;  // defaults to epsilon / steps
  double clip_lo = 0.0;
  double clip_hi = 1.0;
  // Iterative least-likely mode: by default the target class is computed once
  // on the clean input; set to re-derive it from the current iterate each step.
  bool recompute_ll_target = false;

  double alpha() const {
    return step_size ? *step_size : epsilon / static_cast<double>(steps);
  }
};

struct CwConfig {
  double c = 1.0;
  double confidence = 0.0;
  std::size_t steps = 200;
  double learning_rate = 0.05;
  std::size_t binary_search_steps = 0;  // 0: a single run at c
};

struct DeepFoolConfig {
  std::size_t max_iter = 50;
  double overshoot = 0.02;
  double clip_lo = 0.0;
  double clip_hi = 1.0;
};

struct AttackResult {
  Tensor x_adv;
  bool success = false;  // top-1 on x_adv differs from the true label
  double l2 = 0.0;
  double linf = 0.0;
  std::size_t iterations_used = 0;
};

enum class IterMode { Basic, LeastLikely };

AttackResult fgsm(const MlpParams &p, const Tensor &x, std::size_t y_true, const AttackBudget &budget);

/// Single step toward the least-likely class. y_true is only used for the success flag.
AttackResult step_ll(const MlpParams &p, const Tensor &x, std::size_t y_true, const AttackBudget &budget);

/// k sign-gradient steps of size alpha, each projected onto the epsilon ball
/// around x and then clipped to the feature domain. Always runs all k steps.
AttackResult iter_attack(const MlpParams &p, const Tensor &x, std::size_t y_true,
                         const AttackBudget &budget, IterMode mode);

/// Multiclass l2 DeepFool. Already-misclassified inputs are returned untouched.
AttackResult deepfool(const MlpParams &p, const Tensor &x, std::size_t y_true, const DeepFoolConfig &cfg);

/// Carlini-Wagner l2 over the tanh box reparameterisation.
AttackResult cw_l2(const MlpParams &p, const Tensor &x, std::size_t y_true, const CwConfig &cfg);

/// Box-constrained candidate 0.5 * (tanh(w) + 1).
Tensor cw_candidate(const Tensor &w);
/// max(Z_y - max_{i != y} Z_i, -confidence).
double cw_hinge(std::span<const double> logits, std::size_t y_true, double confidence);

/// Inputs are shrunk into [delta, 1 - delta] before arctanh.
inline constexpr double kCwBoxShrink = 1e-6;

enum class AttackKind { Fgsm, StepLl, IterBasic, IterLl, DeepFool, CwL2 };

std::string_view to_string(AttackKind kind);
/// Accepts the names produced by to_string; ErrorKind::Config otherwise.
AttackKind parse_attack_kind(std::string_view name);

struct AttackSpec {
  AttackKind kind = AttackKind::Fgsm;
  AttackBudget budget;
  CwConfig cw;
  DeepFoolConfig deepfool;
};

AttackResult run_attack(const MlpParams &p, const Tensor &x, std::size_t y_true, const AttackSpec &spec);

struct AttackReport {
  std::string attack_name;
  double epsilon = 0.0;
  std::size_t examples = 0;
  std::size_t clean_correct = 0;
  double clean_top1 = 0.0;
  std::optional<double> clean_top5;  // only when the model has >= 6 classes
  double adv_top1 = 0.0;
  std::optional<double> adv_top5;
  double success_rate = 0.0;             // over every example
  double success_rate_on_correct = 0.0;  // over cleanly-correct examples
  // Perturbation statistics over the cleanly-correct examples.
  double median_l2 = 0.0;
  double mean_l2 = 0.0;
  double median_linf = 0.0;
  double mean_linf = 0.0;
};

struct AttackEvaluation {
  AttackReport report;
  std::vector<AttackResult> results;  // dataset order
  std::vector<bool> clean_correct;
};

AttackEvaluation evaluate_attack_detailed(const MlpParams &p, const Dataset &data, const AttackSpec &spec);
AttackReport evaluate_attack(const MlpParams &p, const Dataset &data, const AttackSpec &spec);

double median(std::vector<double> values);

}  // namespace advr

#endif  // ADVR_ATTACKS_HPP
