#include "advr/attacks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace advr {

namespace {

void check_budget(const AttackBudget &b) {
  if (!(b.epsilon >= 0.0)) throw Error(ErrorKind::Argument, "epsilon must be non-negative");
  if (!(b.clip_lo <= b.clip_hi)) throw Error(ErrorKind::Argument, "clip bounds inverted");
}

AttackResult finish(const MlpParams &p, const Tensor &x, Tensor x_adv, std::size_t y_true,
                    std::size_t iterations) {
  AttackResult r;
  const Norms n = norms(subtract(x_adv, x));
  r.l2 = n.l2;
  r.linf = n.linf;
  r.success = predict(p, x_adv.data()) != y_true;
  r.x_adv = std::move(x_adv);
  r.iterations_used = iterations;
  return r;
}

// x + step * sign(grad), clipped to the domain.
Tensor signed_step(const Tensor &x, const Tensor &grad, double step, double lo, double hi) {
  Tensor out = x;
  const Tensor s = sign(grad);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + step * s[i];
  return clip(out, lo, hi);
}

}  // namespace

AttackResult fgsm(const MlpParams &p, const Tensor &x, std::size_t y_true, const AttackBudget &budget) {
  check_budget(budget);
  const Tensor g = loss_input_grad(p, x, y_true);
  return finish(p, x, signed_step(x, g, budget.epsilon, budget.clip_lo, budget.clip_hi), y_true, 1);
}

AttackResult step_ll(const MlpParams &p, const Tensor &x, std::size_t y_true, const AttackBudget &budget) {
  check_budget(budget);
  const std::size_t target = least_likely_class(p, x);
  const Tensor g = loss_input_grad(p, x, target);
  return finish(p, x, signed_step(x, g, -budget.epsilon, budget.clip_lo, budget.clip_hi), y_true, 1);
}

AttackResult iter_attack(const MlpParams &p, const Tensor &x, std::size_t y_true,
                         const AttackBudget &budget, IterMode mode) {
  check_budget(budget);
  if (budget.steps == 0) throw Error(ErrorKind::Argument, "iterative attack needs at least one step");
  const double alpha = budget.alpha();
  if (alpha > budget.epsilon) {
    throw Error(ErrorKind::Argument, "step size " + std::to_string(alpha) + " exceeds epsilon " +
                                         std::to_string(budget.epsilon));
  }
  if (alpha < 0.0) throw Error(ErrorKind::Argument, "step size must be non-negative");

  Tensor x_adv = x;
  std::size_t target = mode == IterMode::LeastLikely ? least_likely_class(p, x) : y_true;
  for (std::size_t t = 0; t < budget.steps; ++t) {
    Tensor stepped;
    if (mode == IterMode::Basic) {
      const Tensor g = loss_input_grad(p, x_adv, y_true);
      stepped = x_adv;
      const Tensor s = sign(g);
      for (std::size_t i = 0; i < stepped.size(); ++i) stepped[i] = x_adv[i] + alpha * s[i];
    } else {
      if (budget.recompute_ll_target && t > 0) target = least_likely_class(p, x_adv);
      const Tensor g = loss_input_grad(p, x_adv, target);
      stepped = x_adv;
      const Tensor s = sign(g);
      for (std::size_t i = 0; i < stepped.size(); ++i) stepped[i] = x_adv[i] - alpha * s[i];
    }
    for (std::size_t i = 0; i < stepped.size(); ++i) {
      stepped[i] = std::min(std::max(stepped[i], x[i] - budget.epsilon), x[i] + budget.epsilon);
    }
    x_adv = clip(stepped, budget.clip_lo, budget.clip_hi);
  }
  return finish(p, x, std::move(x_adv), y_true, budget.steps);
}

AttackResult deepfool(const MlpParams &p, const Tensor &x, std::size_t y_true, const DeepFoolConfig &cfg) {
  if (cfg.max_iter == 0) throw Error(ErrorKind::Argument, "deepfool needs max_iter >= 1");
  if (!(cfg.clip_lo <= cfg.clip_hi)) throw Error(ErrorKind::Argument, "clip bounds inverted");
  const std::size_t classes = p.spec.class_count();
  if (y_true >= classes) throw Error(ErrorKind::Argument, "label out of range");

  Tensor x_i = x;
  if (predict(p, x.data()) != y_true) return finish(p, x, std::move(x_i), y_true, 0);

  std::vector<double> r_total(x.size(), 0.0);
  std::vector<double> onehot(classes, 0.0);
  std::size_t iter = 0;
  for (; iter < cfg.max_iter; ++iter) {
    const ForwardTrace trace = forward(p, x_i);
    const auto z = trace.logits.data();
    if (argmax(z) != y_true) break;

    std::vector<Tensor> grads;
    grads.reserve(classes);
    for (std::size_t k = 0; k < classes; ++k) {
      std::fill(onehot.begin(), onehot.end(), 0.0);
      onehot[k] = 1.0;
      grads.push_back(input_vjp(p, trace, onehot));
    }

    double best_ratio = std::numeric_limits<double>::infinity();
    std::size_t best_k = classes;
    double best_f = 0.0, best_wnorm = 0.0;
    for (std::size_t k = 0; k < classes; ++k) {
      if (k == y_true) continue;
      const Norms wn = norms(subtract(grads[k], grads[y_true]));
      if (wn.l2 == 0.0) continue;
      const double f = std::abs(z[k] - z[y_true]);
      const double ratio = f / wn.l2;
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best_k = k;
        best_f = f;
        best_wnorm = wn.l2;
      }
    }
    if (best_k == classes) {
      throw Error(ErrorKind::DegenerateGradient, "deepfool: every class-difference gradient is zero");
    }

    const double scale = best_f / (best_wnorm * best_wnorm);
    for (std::size_t i = 0; i < r_total.size(); ++i) {
      r_total[i] += scale * (grads[best_k][i] - grads[y_true][i]);
    }
    for (std::size_t i = 0; i < x_i.size(); ++i) {
      x_i[i] = std::clamp(x[i] + (1.0 + cfg.overshoot) * r_total[i], cfg.clip_lo, cfg.clip_hi);
    }
  }
  return finish(p, x, std::move(x_i), y_true, iter);
}

Tensor cw_candidate(const Tensor &w) {
  Tensor out = w;
  for (double &v : out.values()) v = 0.5 * (std::tanh(v) + 1.0);
  return out;
}

double cw_hinge(std::span<const double> z, std::size_t y_true, double confidence) {
  double other = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (i != y_true) other = std::max(other, z[i]);
  }
  return std::max(z[y_true] - other, -confidence);
}

AttackResult cw_l2(const MlpParams &p, const Tensor &x, std::size_t y_true, const CwConfig &cfg) {
  if (cfg.steps == 0) throw Error(ErrorKind::Argument, "C&W needs steps >= 1");
  if (!(cfg.c > 0.0)) throw Error(ErrorKind::Argument, "C&W constant c must be positive");
  if (!(cfg.confidence >= 0.0)) throw Error(ErrorKind::Argument, "C&W confidence must be non-negative");
  const std::size_t classes = p.spec.class_count();
  if (y_true >= classes) throw Error(ErrorKind::Argument, "label out of range");

  const std::size_t n = x.size();
  Tensor w0 = x;
  for (double &v : w0.values()) {
    v = std::atanh(2.0 * std::clamp(v, kCwBoxShrink, 1.0 - kCwBoxShrink) - 1.0);
  }

  constexpr double kUpperInit = 1e10;
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kAdamEps = 1e-8;
  double lower = 0.0, upper = kUpperInit, c = cfg.c;

  std::optional<Tensor> best;
  double best_l2 = std::numeric_limits<double>::infinity();
  Tensor last;
  std::size_t total_iters = 0;
  std::vector<double> upstream(classes, 0.0);
  const std::size_t runs = std::max<std::size_t>(1, cfg.binary_search_steps);

  for (std::size_t run = 0; run < runs; ++run) {
    Tensor w = w0;
    std::vector<double> m(n, 0.0), v(n, 0.0);
    bool run_success = false;
    for (std::size_t step = 0; step <= cfg.steps; ++step) {
      const Tensor cand = cw_candidate(w);
      const ForwardTrace trace = forward(p, cand);
      const auto z = trace.logits.data();
      double dist_sq = 0.0;
      for (std::size_t i = 0; i < n; ++i) dist_sq += (cand[i] - x[i]) * (cand[i] - x[i]);
      if (argmax(z) != y_true) {
        run_success = true;
        if (std::sqrt(dist_sq) < best_l2) {
          best_l2 = std::sqrt(dist_sq);
          best = cand;
        }
      }
      last = cand;
      // The final pass only scores the last iterate.
      if (step == cfg.steps) break;
      ++total_iters;

      std::vector<double> grad_x(n);
      for (std::size_t i = 0; i < n; ++i) grad_x[i] = 2.0 * (cand[i] - x[i]);
      std::size_t runner_up = y_true == 0 ? 1 : 0;
      for (std::size_t i = 0; i < classes; ++i) {
        if (i != y_true && z[i] > z[runner_up]) runner_up = i;
      }
      if (z[y_true] - z[runner_up] > -cfg.confidence) {
        std::fill(upstream.begin(), upstream.end(), 0.0);
        upstream[y_true] = 1.0;
        upstream[runner_up] = -1.0;
        const Tensor g = input_vjp(p, trace, upstream);
        for (std::size_t i = 0; i < n; ++i) grad_x[i] += c * g[i];
      }

      const double t = static_cast<double>(step + 1);
      const double bias1 = 1.0 - std::pow(kBeta1, t);
      const double bias2 = 1.0 - std::pow(kBeta2, t);
      for (std::size_t i = 0; i < n; ++i) {
        const double th = std::tanh(w[i]);
        const double gw = grad_x[i] * 0.5 * (1.0 - th * th);
        m[i] = kBeta1 * m[i] + (1.0 - kBeta1) * gw;
        v[i] = kBeta2 * v[i] + (1.0 - kBeta2) * gw * gw;
        w[i] -= cfg.learning_rate * (m[i] / bias1) / (std::sqrt(v[i] / bias2) + kAdamEps);
      }
    }

    if (run_success) {
      upper = std::min(upper, c);
      c = 0.5 * (lower + upper);
    } else {
      lower = std::max(lower, c);
      c = upper < kUpperInit ? 0.5 * (lower + upper) : c * 10.0;
    }
  }
  return finish(p, x, best ? *best : last, y_true, total_iters);
}

std::string_view to_string(AttackKind kind) {
  switch (kind) {
    case AttackKind::Fgsm: return "fgsm";
    case AttackKind::StepLl: return "step_ll";
    case AttackKind::IterBasic: return "iter_basic";
    case AttackKind::IterLl: return "iter_ll";
    case AttackKind::DeepFool: return "deepfool";
    case AttackKind::CwL2: return "cw_l2";
  }
  return "unknown";
}

AttackKind parse_attack_kind(std::string_view name) {
  for (AttackKind k : {AttackKind::Fgsm, AttackKind::StepLl, AttackKind::IterBasic, AttackKind::IterLl,
                       AttackKind::DeepFool, AttackKind::CwL2}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::Config, "unknown attack '" + std::string(name) + "'");
}

AttackResult run_attack(const MlpParams &p, const Tensor &x, std::size_t y_true, const AttackSpec &spec) {
  switch (spec.kind) {
    case AttackKind::Fgsm: return fgsm(p, x, y_true, spec.budget);
    case AttackKind::StepLl: return step_ll(p, x, y_true, spec.budget);
    case AttackKind::IterBasic: return iter_attack(p, x, y_true, spec.budget, IterMode::Basic);
    case AttackKind::IterLl: return iter_attack(p, x, y_true, spec.budget, IterMode::LeastLikely);
    case AttackKind::DeepFool: return deepfool(p, x, y_true, spec.deepfool);
    case AttackKind::CwL2: return cw_l2(p, x, y_true, spec.cw);
  }
  throw Error(ErrorKind::Argument, "unhandled attack kind");
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

AttackEvaluation evaluate_attack_detailed(const MlpParams &p, const Dataset &data, const AttackSpec &spec) {
  if (data.size() == 0) throw Error(ErrorKind::Argument, "attack evaluation needs a nonempty dataset");
  const bool with_top5 = p.spec.class_count() >= 6;

  AttackEvaluation ev;
  AttackReport &rep = ev.report;
  rep.attack_name = std::string(to_string(spec.kind));
  rep.epsilon = spec.budget.epsilon;
  rep.examples = data.size();

  std::size_t clean1 = 0, clean5 = 0, adv1 = 0, adv5 = 0, fooled = 0, fooled_correct = 0;
  std::vector<double> l2s, linfs;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const Tensor x = data.example(i);
    const std::size_t y = data.labels[i];
    const std::vector<double> z_clean = logits(p, x.data());
    const bool correct = argmax(z_clean) == y;
    clean1 += correct;
    if (with_top5) clean5 += in_top_k(z_clean, y, 5);

    AttackResult r = run_attack(p, x, y, spec);
    const std::vector<double> z_adv = logits(p, r.x_adv.data());
    adv1 += argmax(z_adv) == y;
    if (with_top5) adv5 += in_top_k(z_adv, y, 5);
    fooled += r.success;
    if (correct) {
      fooled_correct += r.success;
      l2s.push_back(r.l2);
      linfs.push_back(r.linf);
    }
    ev.clean_correct.push_back(correct);
    ev.results.push_back(std::move(r));
  }

  const auto n = static_cast<double>(data.size());
  rep.clean_correct = clean1;
  rep.clean_top1 = static_cast<double>(clean1) / n;
  rep.adv_top1 = static_cast<double>(adv1) / n;
  if (with_top5) {
    rep.clean_top5 = static_cast<double>(clean5) / n;
    rep.adv_top5 = static_cast<double>(adv5) / n;
  }
  rep.success_rate = static_cast<double>(fooled) / n;
  rep.success_rate_on_correct =
      clean1 ? static_cast<double>(fooled_correct) / static_cast<double>(clean1) : 0.0;
  if (!l2s.empty()) {
    double s2 = 0.0, sinf = 0.0;
    for (std::size_t i = 0; i < l2s.size(); ++i) {
      s2 += l2s[i];
      sinf += linfs[i];
    }
    rep.mean_l2 = s2 / static_cast<double>(l2s.size());
    rep.mean_linf = sinf / static_cast<double>(linfs.size());
    rep.median_l2 = median(l2s);
    rep.median_linf = median(linfs);
  }
  return ev;
}

AttackReport evaluate_attack(const MlpParams &p, const Dataset &data, const AttackSpec &spec) {
  return evaluate_attack_detailed(p, data, spec).report;
}

}  // namespace advr
