#ifndef ADVR_VULNSCORE_HPP
#define ADVR_VULNSCORE_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace advr::vuln {

enum class AttackVector { Network, Adjacent, Local, Physical };
enum class AttackComplexity { Low, High };
enum class PrivilegesRequired { None, Low, High };
enum class UserInteraction { None, Required };
enum class Scope { Unchanged, Changed };
enum class Impact { None, Low, High };

/// The eight CVSS v3 base metrics. All are required.
struct BaseMetrics {
  AttackVector attack_vector = AttackVector::Network;
  AttackComplexity attack_complexity = AttackComplexity::Low;
  PrivilegesRequired privileges_required = PrivilegesRequired::None;
  UserInteraction user_interaction = UserInteraction::None;
  Scope scope = Scope::Unchanged;
  Impact confidentiality = Impact::None;
  Impact integrity = Impact::None;
  Impact availability = Impact::None;

  bool operator==(const BaseMetrics &) const = default;
};

enum class Severity { None, Low, Medium, High, Critical };

std::string_view to_string(Severity s);

struct ScoreReport {
  double base_score = 0.0;  // one decimal, 0.0 to 10.0
  double exploitability = 0.0;
  double impact = 0.0;
  Severity severity = Severity::None;
  std::string vector;
};

/// "CVSS:3.0/AV:_/AC:_/PR:_/UI:_/S:_/C:_/I:_/A:_", metric groups in any order.
BaseMetrics parse_vector(std::string_view s);
/// Canonical order AV, AC, PR, UI, S, C, I, A.
std::string render_vector(const BaseMetrics &m);

/// CVSS v3.0 base score equations with the v3.0 round-up (ceil to one decimal).
ScoreReport base_score(const BaseMetrics &m);
Severity severity_for(double score);

enum class ThreatModel { WhiteBox, BlackBoxTransfer };

std::string_view to_string(ThreatModel t);
ThreatModel parse_threat_model(std::string_view s);

/// What the mapping needs from an attack evaluation or transfer experiment.
struct EvaluationSummary {
  std::string attack_name;
  double success_rate = 0.0;  // fraction in [0, 1]; transfer rate for black-box records
  std::optional<double> epsilon;
};

struct MappingThresholds {
  double high_integrity = 0.5;  // success rate at or above: I:H
  double low_integrity = 0.1;   // at or above: I:L, else I:N
  double easy_transfer = 0.5;   // black-box transfer rate at or above: AC:L
};

/// white_box: PR:H, AC:L. black_box_transfer: PR:N, AC:L when the transfer
/// rate reaches easy_transfer, else AC:H. Always AV:N, UI:N, S:U, C:N, A:N;
/// integrity from the success rate.
BaseMetrics map_evaluation_to_metrics(const EvaluationSummary &summary, ThreatModel threat,
                                      const MappingThresholds &thresholds = {});

struct MlVulnRecord {
  std::string title;
  ThreatModel threat_model = ThreatModel::WhiteBox;
  std::string attack_name;
  EvaluationSummary report;
  BaseMetrics metrics;
  ScoreReport score;
  std::string narrative;
};

MlVulnRecord make_record(std::string title, ThreatModel threat, const EvaluationSummary &summary,
                         std::string narrative, const MappingThresholds &thresholds = {});

struct RenderedReport {
  std::string markdown;
  std::string json;
};

/// Records sorted by descending base score, then title.
RenderedReport render_report(std::vector<MlVulnRecord> records);

}  // namespace advr::vuln

#endif  // ADVR_VULNSCORE_HPP
