#include "advr/defense.hpp"

#include <cmath>

#include "advr/io.hpp"
#include "advr/training.hpp"

namespace advr {

TrainResult adversarial_train(const MlpSpec &spec, const AdvTrainConfig &cfg, const Dataset &data) {
  if (!(cfg.adv_fraction >= 0.0 && cfg.adv_fraction <= 1.0)) {
    throw Error(ErrorKind::Argument, "adv_fraction must lie in [0, 1]");
  }
  switch (cfg.attack) {
    case AttackKind::Fgsm:
    case AttackKind::StepLl:
    case AttackKind::IterBasic:
    case AttackKind::IterLl:
      break;
    default:
      throw Error(ErrorKind::Argument, "adversarial training supports fgsm, step_ll, iter_basic, iter_ll");
  }
  if (cfg.adv_fraction == 0.0) return sgd_train(spec, cfg.base, data);

  AttackSpec attack;
  attack.kind = cfg.attack;
  attack.budget = cfg.budget;
  RngStream choice_rng(derive_seed(cfg.base.seed, 0x414456ULL));

  BatchHook hook = [&](const MlpParams &current, const BatchInfo &, std::vector<Tensor> &xs,
                       std::vector<std::size_t> &ys) {
    const std::size_t n = xs.size();
    const auto n_adv = static_cast<std::size_t>(std::ceil(cfg.adv_fraction * static_cast<double>(n)));
    const std::vector<std::size_t> order = permutation(n, choice_rng);
    for (std::size_t j = 0; j < std::min(n_adv, n); ++j) {
      const std::size_t i = order[j];
      xs[i] = run_attack(current, xs[i], ys[i], attack).x_adv;
    }
  };
  return train_minibatch(spec, cfg.base, data, hook);
}

std::vector<RobustnessRow> robustness_curve(const MlpParams &p, const Dataset &data,
                                            const AttackSpec &attack, const std::vector<double> &eps_list) {
  if (eps_list.empty()) throw Error(ErrorKind::Argument, "epsilon list is empty");
  if (data.size() == 0) throw Error(ErrorKind::Argument, "robustness curve needs a nonempty dataset");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] >= 0.0)) throw Error(ErrorKind::Argument, "epsilon must be non-negative");
    if (i > 0 && eps_list[i] < eps_list[i - 1]) {
      throw Error(ErrorKind::Argument, "epsilon list must be ascending");
    }
  }

  std::vector<RobustnessRow> rows;
  // The clean row uses the same accounting as an attack that leaves x unchanged.
  std::size_t correct1 = 0, correct5 = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> z = logits(p, data.features.row(i));
    correct1 += argmax(z) == data.labels[i];
    correct5 += p.spec.class_count() >= 6 && in_top_k(z, data.labels[i], 5);
  }
  const auto n = static_cast<double>(data.size());
  RobustnessRow clean;
  clean.top1 = static_cast<double>(correct1) / n;
  if (p.spec.class_count() >= 6) clean.top5 = static_cast<double>(correct5) / n;
  clean.success_rate = static_cast<double>(data.size() - correct1) / n;
  rows.push_back(clean);

  for (double eps : eps_list) {
    AttackSpec spec = attack;
    spec.budget.epsilon = eps;
    spec.budget.step_size.reset();
    const AttackReport rep = evaluate_attack(p, data, spec);
    rows.push_back({eps, rep.adv_top1, rep.adv_top5, rep.success_rate, rep.median_l2});
  }
  return rows;
}

std::string robustness_csv(const std::vector<RobustnessRow> &rows) {
  CsvTable table({"epsilon", "top1", "top5", "success_rate", "median_l2"});
  for (const RobustnessRow &r : rows) {
    table.add_row({format_number(r.epsilon), format_number(r.top1), format_number(r.top5),
                   format_number(r.success_rate), format_number(r.median_l2)});
  }
  return table.str();
}

}  // namespace advr
