#ifndef ADVR_CLI_HPP
#define ADVR_CLI_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "advr/attacks.hpp"
#include "advr/datasets.hpp"
#include "advr/defense.hpp"
#include "advr/model.hpp"
#include "advr/transfer.hpp"
#include "advr/vulnscore.hpp"

namespace advr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

struct DatasetSection {
  std::string source = "gaussian_mixture";  // or "idx"
  GaussianMixtureConfig mixture;
  std::filesystem::path images;
  std::filesystem::path labels;
  double test_fraction = 0.3;
  std::uint64_t split_seed = 0;
};

struct ModelSection {
  MlpSpec spec;
  TrainConfig train;
  std::optional<std::filesystem::path> weights;
};

struct AttackSection {
  AttackSpec spec;
  std::vector<double> eps_list;
  std::size_t max_examples = 0;  // 0: whole test split
};

struct DefenseSection {
  AdvTrainConfig config;
};

struct ZooEntry {
  MlpSpec spec;
  std::uint64_t seed = 0;
};

struct TransferSection {
  std::vector<ZooEntry> models;
  std::vector<AttackKind> attacks;
  TransferMetric metric = TransferMetric::Top1;
  std::optional<double> epsilon;  // overrides the attack section's budget
};

struct ScoreInput {
  std::string title;
  vuln::ThreatModel threat_model = vuln::ThreatModel::WhiteBox;
  std::filesystem::path input;
  std::string attack;  // selects the matrix in a transfer summary
  std::string narrative;
};

struct ScoreSection {
  std::vector<ScoreInput> records;
  vuln::MappingThresholds thresholds;
};

/// Parsed run configuration. Sections are optional; each subcommand checks
/// for the ones it needs. Unknown keys anywhere are rejected.
struct RunConfig {
  std::filesystem::path output_dir = "out";
  std::optional<DatasetSection> dataset;
  std::optional<ModelSection> model;
  std::optional<AttackSection> attack;
  std::optional<DefenseSection> defense;
  std::optional<TransferSection> transfer;
  std::optional<ScoreSection> score;
};

/// Relative paths inside the document resolve against `base_dir`.
RunConfig parse_run_config(const std::string &json_text, const std::filesystem::path &base_dir = {});
RunConfig load_run_config(const std::filesystem::path &path);

/// Entry point behind the executable; returns the process exit code.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);

/// Gradient finite-difference and closed-form DeepFool checks. True when all pass.
bool selftest(std::ostream &out);

}  // namespace advr::cli

#endif  // ADVR_CLI_HPP
