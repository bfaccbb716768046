#include "advr/transfer.hpp"

#include <cmath>
#include <sstream>

#include "advr/io.hpp"

namespace advr {

std::vector<MlpParams> train_zoo(const std::vector<MlpSpec> &specs, const TrainConfig &cfg,
                                 const Dataset &data, const std::vector<std::uint64_t> &seeds) {
  if (specs.empty() || specs.size() != seeds.size()) {
    throw Error(ErrorKind::Argument, "zoo needs one seed per spec and at least one spec");
  }
  std::vector<MlpParams> zoo;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    TrainConfig c = cfg;
    c.seed = seeds[i];
    zoo.push_back(sgd_train(specs[i], c, data).params);
  }
  return zoo;
}

std::string_view to_string(TransferMetric metric) {
  return metric == TransferMetric::Top1 ? "top1" : "top5";
}

std::optional<double> TransferMatrix::mean_off_diagonal() const {
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t s = 0; s < rates.size(); ++s) {
    for (std::size_t t = 0; t < rates[s].size(); ++t) {
      if (s != t && rates[s][t]) {
        sum += *rates[s][t];
        ++count;
      }
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

TransferMatrix transfer_matrix(const std::vector<MlpParams> &zoo, const AttackSpec &attack,
                               const Dataset &eval, TransferMetric metric) {
  if (zoo.empty()) throw Error(ErrorKind::Argument, "transfer needs a nonempty zoo");
  if (eval.size() == 0) throw Error(ErrorKind::Argument, "transfer needs a nonempty evaluation set");
  const std::size_t k = metric == TransferMetric::Top1 ? 1 : 5;
  for (const MlpParams &p : zoo) {
    if (p.spec.class_count() < k) throw Error(ErrorKind::Argument, "top-5 transfer needs >= 5 classes");
  }
  auto correct_under = [k](const MlpParams &p, std::span<const double> x, std::size_t y) {
    return in_top_k(logits(p, x), y, k);
  };

  TransferMatrix m;
  m.attack_name = std::string(to_string(attack.kind));
  m.budget = attack.budget;
  m.metric = metric;
  for (const MlpParams &p : zoo) m.model_ids.push_back(p.spec.id);

  const std::size_t n = zoo.size();
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<Tensor> fooling;
    std::vector<std::size_t> labels;
    for (std::size_t i = 0; i < eval.size(); ++i) {
      const std::size_t y = eval.labels[i];
      if (!correct_under(zoo[s], eval.features.row(i), y)) continue;
      AttackResult r = run_attack(zoo[s], eval.example(i), y, attack);
      if (correct_under(zoo[s], r.x_adv.data(), y)) continue;
      fooling.push_back(std::move(r.x_adv));
      labels.push_back(y);
    }
    m.source_fooled.push_back(fooling.size());

    std::vector<std::optional<double>> row(n);
    if (!fooling.empty()) {
      for (std::size_t t = 0; t < n; ++t) {
        std::size_t fooled = 0;
        for (std::size_t j = 0; j < fooling.size(); ++j) {
          fooled += !correct_under(zoo[t], fooling[j].data(), labels[j]);
        }
        row[t] = 100.0 * static_cast<double>(fooled) / static_cast<double>(fooling.size());
      }
    }
    m.rates.push_back(std::move(row));
  }
  return m;
}

std::string transfer_csv(const TransferMatrix &m) {
  std::vector<std::string> header{"source"};
  header.insert(header.end(), m.model_ids.begin(), m.model_ids.end());
  CsvTable table(header);
  for (std::size_t s = 0; s < m.rates.size(); ++s) {
    std::vector<std::string> cells{m.model_ids[s]};
    for (const auto &v : m.rates[s]) cells.push_back(format_number(v));
    table.add_row(std::move(cells));
  }
  return table.str();
}

std::string transfer_markdown(const TransferMatrix &m) {
  std::ostringstream os;
  os << "### " << m.attack_name << " (" << to_string(m.metric) << ", epsilon "
     << format_number(m.budget.epsilon) << ")\n\n";
  os << "| source \\ target |";
  for (const auto &id : m.model_ids) os << ' ' << id << " |";
  os << "\n|---|";
  for (std::size_t i = 0; i < m.model_ids.size(); ++i) os << "---:|";
  os << '\n';
  for (std::size_t s = 0; s < m.rates.size(); ++s) {
    os << "| " << m.model_ids[s] << " |";
    for (const auto &v : m.rates[s]) {
      if (v) {
        os << ' ' << std::lround(*v) << " |";
      } else {
        os << " - |";
      }
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace advr
