#include "advr/vulnscore.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "advr/error.hpp"
#include "advr/io.hpp"

namespace advr::vuln {

namespace {

// Weights from the CVSS v3.0 specification.
double weight(AttackVector v) {
  switch (v) {
    case AttackVector::Network: return 0.85;
    case AttackVector::Adjacent: return 0.62;
    case AttackVector::Local: return 0.55;
    case AttackVector::Physical: return 0.2;
  }
  return 0.0;
}

double weight(AttackComplexity v) { return v == AttackComplexity::Low ? 0.77 : 0.44; }

double weight(PrivilegesRequired v, Scope s) {
  switch (v) {
    case PrivilegesRequired::None: return 0.85;
    case PrivilegesRequired::Low: return s == Scope::Changed ? 0.68 : 0.62;
    case PrivilegesRequired::High: return s == Scope::Changed ? 0.50 : 0.27;
  }
  return 0.0;
}

double weight(UserInteraction v) { return v == UserInteraction::None ? 0.85 : 0.62; }

double weight(Impact v) {
  switch (v) {
    case Impact::None: return 0.0;
    case Impact::Low: return 0.22;
    case Impact::High: return 0.56;
  }
  return 0.0;
}

double round_up(double d) { return std::ceil(d * 10.0) / 10.0; }

char code(AttackVector v) { return "NALP"[static_cast<int>(v)]; }
char code(AttackComplexity v) { return "LH"[static_cast<int>(v)]; }
char code(PrivilegesRequired v) { return "NLH"[static_cast<int>(v)]; }
char code(UserInteraction v) { return "NR"[static_cast<int>(v)]; }
char code(Scope v) { return "UC"[static_cast<int>(v)]; }
char code(Impact v) { return "NLH"[static_cast<int>(v)]; }

// Position of `c` in `codes`, or -1.
int decode(std::string_view value, std::string_view codes) {
  if (value.size() != 1) return -1;
  const auto pos = codes.find(value[0]);
  return pos == std::string_view::npos ? -1 : static_cast<int>(pos);
}

constexpr std::string_view kPrefix = "CVSS:3.0/";
constexpr std::array<std::string_view, 8> kMetricNames = {"AV", "AC", "PR", "UI", "S", "C", "I", "A"};
constexpr std::array<std::string_view, 8> kMetricCodes = {"NALP", "LH", "NLH", "NR", "UC", "NLH", "NLH", "NLH"};

}  // namespace

std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::None: return "None";
    case Severity::Low: return "Low";
    case Severity::Medium: return "Medium";
    case Severity::High: return "High";
    case Severity::Critical: return "Critical";
  }
  return "None";
}

BaseMetrics parse_vector(std::string_view s) {
  if (s.substr(0, kPrefix.size()) != kPrefix) {
    throw Error(ErrorKind::BadPrefix, "vector must start with 'CVSS:3.0/': " + std::string(s));
  }
  std::array<int, 8> values;
  values.fill(-1);
  std::string_view rest = s.substr(kPrefix.size());
  while (!rest.empty()) {
    const auto slash = rest.find('/');
    const std::string_view part = rest.substr(0, slash);
    rest = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash + 1);

    const auto colon = part.find(':');
    if (colon == std::string_view::npos) {
      throw Error(ErrorKind::UnknownCode, "malformed metric '" + std::string(part) + "'");
    }
    const std::string_view name = part.substr(0, colon);
    const std::string_view value = part.substr(colon + 1);
    const auto it = std::find(kMetricNames.begin(), kMetricNames.end(), name);
    if (it == kMetricNames.end()) {
      throw Error(ErrorKind::UnknownCode, "unknown metric '" + std::string(name) + "'");
    }
    const auto idx = static_cast<std::size_t>(it - kMetricNames.begin());
    if (values[idx] != -1) {
      throw Error(ErrorKind::DuplicateMetric, "metric " + std::string(name) + " given twice");
    }
    values[idx] = decode(value, kMetricCodes[idx]);
    if (values[idx] == -1) {
      throw Error(ErrorKind::UnknownCode, "unknown code '" + std::string(value) + "' for metric " + std::string(name));
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == -1) {
      throw Error(ErrorKind::MissingMetric, "metric " + std::string(kMetricNames[i]) + " is missing");
    }
  }

  BaseMetrics m;
  m.attack_vector = static_cast<AttackVector>(values[0]);
  m.attack_complexity = static_cast<AttackComplexity>(values[1]);
  m.privileges_required = static_cast<PrivilegesRequired>(values[2]);
  m.user_interaction = static_cast<UserInteraction>(values[3]);
  m.scope = static_cast<Scope>(values[4]);
  m.confidentiality = static_cast<Impact>(values[5]);
  m.integrity = static_cast<Impact>(values[6]);
  m.availability = static_cast<Impact>(values[7]);
  return m;
}

std::string render_vector(const BaseMetrics &m) {
  std::string out(kPrefix);
  auto add = [&out](std::string_view name, char c, bool last = false) {
    out += name;
    out += ':';
    out += c;
    if (!last) out += '/';
  };
  add("AV", code(m.attack_vector));
  add("AC", code(m.attack_complexity));
  add("PR", code(m.privileges_required));
  add("UI", code(m.user_interaction));
  add("S", code(m.scope));
  add("C", code(m.confidentiality));
  add("I", code(m.integrity));
  add("A", code(m.availability), true);
  return out;
}

Severity severity_for(double score) {
  if (score == 0.0) return Severity::None;
  if (score < 4.0) return Severity::Low;
  if (score < 7.0) return Severity::Medium;
  if (score < 9.0) return Severity::High;
  return Severity::Critical;
}

ScoreReport base_score(const BaseMetrics &m) {
  const bool changed = m.scope == Scope::Changed;
  const double isc_base = 1.0 - ((1.0 - weight(m.confidentiality)) * (1.0 - weight(m.integrity)) *
                                 (1.0 - weight(m.availability)));
  const double impact = changed ? 7.52 * (isc_base - 0.029) - 3.25 * std::pow(isc_base - 0.02, 15)
                                : 6.42 * isc_base;
  const double exploitability = 8.22 * weight(m.attack_vector) * weight(m.attack_complexity) *
                                weight(m.privileges_required, m.scope) * weight(m.user_interaction);

  ScoreReport r;
  r.impact = impact;
  r.exploitability = exploitability;
  if (impact <= 0.0) {
    r.base_score = 0.0;
  } else if (changed) {
    r.base_score = round_up(std::min(1.08 * (impact + exploitability), 10.0));
  } else {
    r.base_score = round_up(std::min(impact + exploitability, 10.0));
  }
  r.severity = severity_for(r.base_score);
  r.vector = render_vector(m);
  return r;
}

std::string_view to_string(ThreatModel t) {
  return t == ThreatModel::WhiteBox ? "white_box" : "black_box_transfer";
}

ThreatModel parse_threat_model(std::string_view s) {
  if (s == "white_box") return ThreatModel::WhiteBox;
  if (s == "black_box_transfer") return ThreatModel::BlackBoxTransfer;
  throw Error(ErrorKind::Config, "unknown threat model '" + std::string(s) + "'");
}

BaseMetrics map_evaluation_to_metrics(const EvaluationSummary &summary, ThreatModel threat,
                                      const MappingThresholds &thresholds) {
  BaseMetrics m;
  m.attack_vector = AttackVector::Network;
  m.user_interaction = UserInteraction::None;
  m.scope = Scope::Unchanged;
  m.confidentiality = Impact::None;
  m.availability = Impact::None;
  if (threat == ThreatModel::WhiteBox) {
    m.privileges_required = PrivilegesRequired::High;
    m.attack_complexity = AttackComplexity::Low;
  } else {
    m.privileges_required = PrivilegesRequired::None;
    m.attack_complexity = summary.success_rate >= thresholds.easy_transfer ? AttackComplexity::Low
                                                                           : AttackComplexity::High;
  }
  if (summary.success_rate >= thresholds.high_integrity) {
    m.integrity = Impact::High;
  } else if (summary.success_rate >= thresholds.low_integrity) {
    m.integrity = Impact::Low;
  } else {
    m.integrity = Impact::None;
  }
  return m;
}

MlVulnRecord make_record(std::string title, ThreatModel threat, const EvaluationSummary &summary,
                         std::string narrative, const MappingThresholds &thresholds) {
  MlVulnRecord r;
  r.title = std::move(title);
  r.threat_model = threat;
  r.attack_name = summary.attack_name;
  r.report = summary;
  r.metrics = map_evaluation_to_metrics(summary, threat, thresholds);
  r.score = base_score(r.metrics);
  r.narrative = std::move(narrative);
  return r;
}

RenderedReport render_report(std::vector<MlVulnRecord> records) {
  std::stable_sort(records.begin(), records.end(), [](const MlVulnRecord &a, const MlVulnRecord &b) {
    if (a.score.base_score != b.score.base_score) return a.score.base_score > b.score.base_score;
    return a.title < b.title;
  });

  std::ostringstream md;
  md << "# ML vulnerability report\n\n";
  md << "Scores use the CVSS v3.0 base equations. Success rates are empirical and reported alongside;\n"
        "they are not folded into the score.\n\n";
  md << "| Title | Threat model | Attack | Success rate | Score | Severity | Vector |\n";
  md << "|---|---|---|---:|---:|---|---|\n";

  nlohmann::json doc;
  doc["scoring"] = "CVSS:3.0";
  doc["records"] = nlohmann::json::array();
  for (const MlVulnRecord &r : records) {
    std::ostringstream score;
    score.setf(std::ios::fixed);
    score.precision(1);
    score << r.score.base_score;
    md << "| " << r.title << " | " << to_string(r.threat_model) << " | " << r.attack_name << " | "
       << format_number(r.report.success_rate) << " | " << score.str() << " | "
       << to_string(r.score.severity) << " | `" << r.score.vector << "` |\n";

    nlohmann::json rec;
    rec["title"] = r.title;
    rec["threat_model"] = to_string(r.threat_model);
    rec["attack_name"] = r.attack_name;
    rec["report"] = {{"attack_name", r.report.attack_name}, {"success_rate", r.report.success_rate}};
    if (r.report.epsilon) rec["report"]["epsilon"] = *r.report.epsilon;
    rec["metrics"] = r.score.vector;
    rec["score"] = {{"base_score", r.score.base_score},
                    {"exploitability_sub", r.score.exploitability},
                    {"impact_sub", r.score.impact},
                    {"severity", to_string(r.score.severity)},
                    {"vector", r.score.vector}};
    rec["narrative"] = r.narrative;
    doc["records"].push_back(std::move(rec));
  }
  if (records.empty()) md << "\n_No records._\n";
  for (const MlVulnRecord &r : records) {
    if (!r.narrative.empty()) md << "\n## " << r.title << "\n\n" << r.narrative << "\n";
  }
  return {md.str(), doc.dump(2) + "\n"};
}

}  // namespace advr::vuln
