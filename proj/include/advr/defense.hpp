#ifndef ADVR_DEFENSE_HPP
#define ADVR_DEFENSE_HPP

#include <optional>
#include <string>
#include <vector>

#include "advr/attacks.hpp"
#include "advr/model.hpp"

namespace advr {

struct AdvTrainConfig {
  TrainConfig base;
  AttackKind attack = AttackKind::StepLl;  // fgsm, step_ll, iter_basic or iter_ll
  AttackBudget budget;
  double adv_fraction = 0.5;
};

/// Minibatch SGD where ceil(adv_fraction * batch) examples of each batch are
/// replaced by adversarial versions crafted against the current parameters.
TrainResult adversarial_train(const MlpSpec &spec, const AdvTrainConfig &cfg, const Dataset &data);

struct RobustnessRow {
  double epsilon = 0.0;
  double top1 = 0.0;
  std::optional<double> top5;
  double success_rate = 0.0;
  double median_l2 = 0.0;

  bool operator==(const RobustnessRow &) const = default;
};

/// A clean row followed by one row per epsilon. Iterative attacks use the
/// default step size epsilon / steps at every grid point.
std::vector<RobustnessRow> robustness_curve(const MlpParams &p, const Dataset &data,
                                            const AttackSpec &attack, const std::vector<double> &eps_list);

/// Columns: epsilon, top1, top5, success_rate, median_l2.
std::string robustness_csv(const std::vector<RobustnessRow> &rows);

}  // namespace advr

#endif  // ADVR_DEFENSE_HPP
