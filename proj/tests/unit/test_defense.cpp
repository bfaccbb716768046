#include "doctest.h"

#include "advr/datasets.hpp"
#include "advr/defense.hpp"
#include "advr/training.hpp"

using namespace advr;

namespace {

Dataset data() { return gen_gaussian_mixture({4, 8, 15, 0.1, 12}); }

const MlpSpec kSpec{{8, 10, 4}, "d"};

}  // namespace

TEST_CASE("zero adversarial fraction is plain training") {
  AdvTrainConfig cfg;
  cfg.base = {5, 10, 0.1, 3};
  cfg.budget.epsilon = 0.1;
  cfg.adv_fraction = 0.0;
  CHECK(adversarial_train(kSpec, cfg, data()).params == sgd_train(kSpec, cfg.base, data()).params);
}

TEST_CASE("an identity hook reproduces plain training") {
  const TrainConfig tc{4, 7, 0.1, 8};
  const TrainResult hooked = train_minibatch(kSpec, tc, data(), [](auto &, auto &, auto &, auto &) {});
  CHECK(hooked.params == sgd_train(kSpec, tc, data()).params);
}

TEST_CASE("adversarial training is deterministic and changes the model") {
  AdvTrainConfig cfg;
  cfg.base = {5, 10, 0.1, 3};
  cfg.budget.epsilon = 0.1;
  for (AttackKind k : {AttackKind::Fgsm, AttackKind::StepLl, AttackKind::IterBasic, AttackKind::IterLl}) {
    cfg.attack = k;
    cfg.budget.steps = k == AttackKind::IterBasic || k == AttackKind::IterLl ? 3 : 1;
    const TrainResult a = adversarial_train(kSpec, cfg, data());
    CHECK(a.params == adversarial_train(kSpec, cfg, data()).params);
    CHECK_FALSE(a.params == sgd_train(kSpec, cfg.base, data()).params);
    CHECK(a.history.size() == 5);
  }
  cfg.attack = AttackKind::DeepFool;
  CHECK_THROWS_AS(adversarial_train(kSpec, cfg, data()), Error);
  cfg.attack = AttackKind::Fgsm;
  cfg.adv_fraction = 1.5;
  CHECK_THROWS_AS(adversarial_train(kSpec, cfg, data()), Error);
}

TEST_CASE("robustness curve") {
  const Dataset d = data();
  const MlpParams p = sgd_train(kSpec, {10, 10, 0.1, 1}, d).params;
  AttackSpec spec;
  const auto rows = robustness_curve(p, d, spec, {0.0, 0.05, 0.1, 0.2});
  REQUIRE(rows.size() == 5);
  CHECK(rows[0].epsilon == 0.0);
  CHECK(rows[1] == rows[0]);
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) CHECK(rows[i + 1].epsilon > rows[i].epsilon);
  CHECK_FALSE(rows[0].top5.has_value());
  CHECK(rows[0].top1 == evaluate(p, d, 1).top1);

  const std::string csv = robustness_csv(rows);
  CHECK(csv.rfind("epsilon,top1,top5,success_rate,median_l2\n", 0) == 0);
  CHECK(csv == robustness_csv(robustness_curve(p, d, spec, {0.0, 0.05, 0.1, 0.2})));

  CHECK_THROWS_AS(robustness_curve(p, d, spec, {}), Error);
  CHECK_THROWS_AS(robustness_curve(p, d, spec, {0.2, 0.1}), Error);
}
