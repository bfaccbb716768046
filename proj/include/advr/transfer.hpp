#ifndef ADVR_TRANSFER_HPP
#define ADVR_TRANSFER_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "advr/attacks.hpp"
#include "advr/model.hpp"

namespace advr {

/// One sgd_train per (spec, seed) on the shared training set; cfg.seed is replaced per model.
std::vector<MlpParams> train_zoo(const std::vector<MlpSpec> &specs, const TrainConfig &cfg,
                                 const Dataset &data, const std::vector<std::uint64_t> &seeds);

enum class TransferMetric { Top1, Top5 };

std::string_view to_string(TransferMetric metric);

struct TransferMatrix {
  std::vector<std::string> model_ids;
  // rates[s][t] in percent; nullopt when source s fooled none of the eval examples.
  std::vector<std::vector<std::optional<double>>> rates;
  std::vector<std::size_t> source_fooled;  // denominator per source row
  std::string attack_name;
  AttackBudget budget;
  TransferMetric metric = TransferMetric::Top1;

  /// Mean of the defined off-diagonal entries; nullopt when there are none.
  std::optional<double> mean_off_diagonal() const;
};

/// Entry (s, t): percentage of the examples that s classifies correctly and
/// whose adversarial version (crafted on s) fools s, that also fool t.
TransferMatrix transfer_matrix(const std::vector<MlpParams> &zoo, const AttackSpec &attack,
                               const Dataset &eval, TransferMetric metric = TransferMetric::Top1);

/// Header row and first column carry the model ids; undefined entries are empty cells.
std::string transfer_csv(const TransferMatrix &m);
std::string transfer_markdown(const TransferMatrix &m);

}  // namespace advr

#endif  // ADVR_TRANSFER_HPP
