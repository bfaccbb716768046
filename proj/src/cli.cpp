#include "advr/cli.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "advr/io.hpp"
#include "advr/selfcheck.hpp"

namespace advr::cli {

using nlohmann::json;

namespace {

// Strict accessor over one JSON object: every key must be consumed or listed.
class Section {
 public:
  Section(const json &doc, std::string name) : doc_(doc), name_(std::move(name)) {
    if (!doc_.is_object()) throw Error(ErrorKind::Config, name_ + " must be an object");
  }

  void allow(std::initializer_list<const char *> keys) {
    for (const char *k : keys) allowed_.insert(k);
    for (const auto &item : doc_.items()) {
      if (!allowed_.count(item.key())) {
        throw Error(ErrorKind::Config, "unknown key '" + item.key() + "' in " + name_);
      }
    }
  }

  bool has(const char *key) const { return doc_.contains(key) && !doc_.at(key).is_null(); }

  const json &raw(const char *key) const {
    if (!has(key)) throw Error(ErrorKind::Config, name_ + "." + key + " is required");
    return doc_.at(key);
  }

  template <typename T>
  T get(const char *key) const {
    try {
      return raw(key).get<T>();
    } catch (const json::exception &) {
      throw Error(ErrorKind::Config, name_ + "." + key + " has the wrong type");
    }
  }

  template <typename T>
  T get(const char *key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  Section child(const char *key) const { return Section(raw(key), name_ + "." + key); }

  const std::string &name() const { return name_; }

 private:
  const json &doc_;
  std::string name_;
  std::set<std::string> allowed_;
};

std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

TrainConfig parse_train(const Section &s) {
  Section t = s;
  t.allow({"epochs", "batch_size", "learning_rate", "seed"});
  TrainConfig c;
  c.epochs = t.get<std::size_t>("epochs");
  c.batch_size = t.get<std::size_t>("batch_size");
  c.learning_rate = t.get<double>("learning_rate");
  c.seed = t.get<std::uint64_t>("seed");
  if (!(c.learning_rate > 0.0)) throw Error(ErrorKind::Config, t.name() + ".learning_rate must be positive");
  if (c.batch_size == 0) throw Error(ErrorKind::Config, t.name() + ".batch_size must be positive");
  return c;
}

MlpSpec parse_spec(const Section &s) {
  MlpSpec spec;
  spec.id = s.get<std::string>("id");
  spec.layer_widths = s.get<std::vector<std::size_t>>("layer_widths");
  try {
    spec.validate();
  } catch (const Error &e) {
    throw Error(ErrorKind::Config, s.name() + ": " + e.what());
  }
  return spec;
}

AttackBudget parse_budget(const Section &s) {
  AttackBudget b;
  b.epsilon = s.get<double>("epsilon", 0.0);
  b.steps = s.get<std::size_t>("steps", 10);
  if (s.has("step_size")) b.step_size = s.get<double>("step_size");
  b.clip_lo = s.get<double>("clip_lo", 0.0);
  b.clip_hi = s.get<double>("clip_hi", 1.0);
  b.recompute_ll_target = s.get<bool>("recompute_ll_target", b.recompute_ll_target);
  if (b.epsilon < 0.0) throw Error(ErrorKind::Config, s.name() + ".epsilon must be non-negative");
  if (b.steps == 0) throw Error(ErrorKind::Config, s.name() + ".steps must be at least 1");
  if (b.clip_lo > b.clip_hi) throw Error(ErrorKind::Config, s.name() + " clip bounds are inverted");
  return b;
}

}  // namespace

RunConfig parse_run_config(const std::string &json_text, const std::filesystem::path &base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception &e) {
    throw Error(ErrorKind::Config, std::string("config is not valid JSON: ") + e.what());
  }
  Section root(doc, "config");
  root.allow({"output_dir", "dataset", "model", "attack", "defense", "transfer", "score"});

  RunConfig cfg;
  if (root.has("output_dir")) cfg.output_dir = resolve(base_dir, root.get<std::string>("output_dir"));

  if (root.has("dataset")) {
    Section s = root.child("dataset");
    s.allow({"source", "classes", "dim", "n_per_class", "spread", "seed", "images", "labels",
             "test_fraction", "split_seed"});
    DatasetSection d;
    d.source = s.get<std::string>("source");
    if (d.source == "gaussian_mixture") {
      d.mixture.classes = s.get<std::size_t>("classes");
      d.mixture.dim = s.get<std::size_t>("dim");
      d.mixture.n_per_class = s.get<std::size_t>("n_per_class");
      d.mixture.spread = s.get<double>("spread");
      d.mixture.seed = s.get<std::uint64_t>("seed");
    } else if (d.source == "idx") {
      d.images = resolve(base_dir, s.get<std::string>("images"));
      d.labels = resolve(base_dir, s.get<std::string>("labels"));
    } else {
      throw Error(ErrorKind::Config, "dataset.source must be 'gaussian_mixture' or 'idx'");
    }
    d.test_fraction = s.get<double>("test_fraction");
    d.split_seed = s.get<std::uint64_t>("split_seed");
    cfg.dataset = d;
  }

  if (root.has("model")) {
    Section s = root.child("model");
    s.allow({"id", "layer_widths", "train", "weights"});
    ModelSection m;
    m.spec = parse_spec(s);
    m.train = parse_train(s.child("train"));
    if (s.has("weights")) m.weights = resolve(base_dir, s.get<std::string>("weights"));
    cfg.model = m;
  }

  if (root.has("attack")) {
    Section s = root.child("attack");
    s.allow({"name", "epsilon", "steps", "step_size", "clip_lo", "clip_hi", "recompute_ll_target",
             "eps_list", "max_examples", "cw", "deepfool"});
    AttackSection a;
    a.spec.kind = parse_attack_kind(s.get<std::string>("name"));
    a.spec.budget = parse_budget(s);
    a.eps_list = s.get<std::vector<double>>("eps_list", {});
    a.max_examples = s.get<std::size_t>("max_examples", 0);
    if (s.has("cw")) {
      Section c = s.child("cw");
      c.allow({"c", "confidence", "steps", "learning_rate", "binary_search_steps"});
      a.spec.cw.c = c.get<double>("c", a.spec.cw.c);
      a.spec.cw.confidence = c.get<double>("confidence", a.spec.cw.confidence);
      a.spec.cw.steps = c.get<std::size_t>("steps", a.spec.cw.steps);
      a.spec.cw.learning_rate = c.get<double>("learning_rate", a.spec.cw.learning_rate);
      a.spec.cw.binary_search_steps = c.get<std::size_t>("binary_search_steps", a.spec.cw.binary_search_steps);
    }
    if (s.has("deepfool")) {
      Section c = s.child("deepfool");
      c.allow({"max_iter", "overshoot"});
      a.spec.deepfool.max_iter = c.get<std::size_t>("max_iter", a.spec.deepfool.max_iter);
      a.spec.deepfool.overshoot = c.get<double>("overshoot", a.spec.deepfool.overshoot);
    }
    a.spec.deepfool.clip_lo = a.spec.budget.clip_lo;
    a.spec.deepfool.clip_hi = a.spec.budget.clip_hi;
    cfg.attack = a;
  }

  if (root.has("defense")) {
    Section s = root.child("defense");
    s.allow({"attack", "epsilon", "steps", "step_size", "clip_lo", "clip_hi", "recompute_ll_target",
             "adv_fraction", "train"});
    DefenseSection d;
    d.config.attack = parse_attack_kind(s.get<std::string>("attack", "step_ll"));
    d.config.budget = parse_budget(s);
    d.config.adv_fraction = s.get<double>("adv_fraction", 0.5);
    if (d.config.adv_fraction < 0.0 || d.config.adv_fraction > 1.0) {
      throw Error(ErrorKind::Config, "defense.adv_fraction must lie in [0, 1]");
    }
    if (s.has("train")) {
      d.config.base = parse_train(s.child("train"));
    } else if (cfg.model) {
      d.config.base = cfg.model->train;
    } else {
      throw Error(ErrorKind::Config, "defense.train is required when there is no model section");
    }
    cfg.defense = d;
  }

  if (root.has("transfer")) {
    Section s = root.child("transfer");
    s.allow({"models", "attacks", "metric", "epsilon"});
    TransferSection t;
    if (s.has("epsilon")) {
      t.epsilon = s.get<double>("epsilon");
      if (*t.epsilon < 0.0) throw Error(ErrorKind::Config, "transfer.epsilon must be non-negative");
    }
    const json &models = s.raw("models");
    if (!models.is_array() || models.empty()) throw Error(ErrorKind::Config, "transfer.models must be a nonempty array");
    for (std::size_t i = 0; i < models.size(); ++i) {
      Section m(models[i], "transfer.models[" + std::to_string(i) + "]");
      m.allow({"id", "layer_widths", "seed"});
      t.models.push_back({parse_spec(m), m.get<std::uint64_t>("seed")});
    }
    for (const auto &name : s.get<std::vector<std::string>>("attacks")) {
      t.attacks.push_back(parse_attack_kind(name));
    }
    const std::string metric = s.get<std::string>("metric", "top1");
    if (metric == "top1") {
      t.metric = TransferMetric::Top1;
    } else if (metric == "top5") {
      t.metric = TransferMetric::Top5;
    } else {
      throw Error(ErrorKind::Config, "transfer.metric must be 'top1' or 'top5'");
    }
    cfg.transfer = t;
  }

  if (root.has("score")) {
    Section s = root.child("score");
    s.allow({"records", "thresholds"});
    ScoreSection sc;
    const json &records = s.raw("records");
    if (!records.is_array()) throw Error(ErrorKind::Config, "score.records must be an array");
    for (std::size_t i = 0; i < records.size(); ++i) {
      Section r(records[i], "score.records[" + std::to_string(i) + "]");
      r.allow({"title", "threat_model", "input", "attack", "narrative"});
      ScoreInput in;
      in.title = r.get<std::string>("title");
      in.threat_model = vuln::parse_threat_model(r.get<std::string>("threat_model"));
      in.input = resolve(base_dir, r.get<std::string>("input"));
      in.attack = r.get<std::string>("attack", "");
      in.narrative = r.get<std::string>("narrative", "");
      sc.records.push_back(std::move(in));
    }
    if (s.has("thresholds")) {
      Section t = s.child("thresholds");
      t.allow({"high_integrity", "low_integrity", "easy_transfer"});
      sc.thresholds.high_integrity = t.get<double>("high_integrity", sc.thresholds.high_integrity);
      sc.thresholds.low_integrity = t.get<double>("low_integrity", sc.thresholds.low_integrity);
      sc.thresholds.easy_transfer = t.get<double>("easy_transfer", sc.thresholds.easy_transfer);
    }
    cfg.score = sc;
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path &path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const Error &e) {
    throw Error(ErrorKind::Config, e.what());
  }
  return parse_run_config(text, path.parent_path());
}

namespace {

template <typename T>
const T &need(const std::optional<T> &section, const char *name, const char *command) {
  if (!section) {
    throw Error(ErrorKind::Config, std::string(command) + " needs a '" + name + "' section");
  }
  return *section;
}

Split load_split(const DatasetSection &d) {
  Dataset data = d.source == "idx" ? load_idx(d.images, d.labels) : gen_gaussian_mixture(d.mixture);
  return split(data, d.test_fraction, d.split_seed);
}

Dataset limit(const Dataset &data, std::size_t max_examples) {
  if (max_examples == 0 || max_examples >= data.size()) return data;
  std::vector<std::size_t> idx(max_examples);
  for (std::size_t i = 0; i < max_examples; ++i) idx[i] = i;
  return data.subset(idx);
}

std::string history_csv(const std::vector<EpochStats> &history) {
  CsvTable table({"epoch", "loss", "top1"});
  for (const EpochStats &e : history) {
    table.add_row({std::to_string(e.epoch), format_number(e.loss), format_number(e.top1)});
  }
  return table.str();
}

json report_to_json(const AttackReport &r) {
  json j;
  j["attack_name"] = r.attack_name;
  j["epsilon"] = r.epsilon;
  j["examples"] = r.examples;
  j["clean_correct"] = r.clean_correct;
  j["clean_top1"] = r.clean_top1;
  j["clean_top5"] = r.clean_top5 ? json(*r.clean_top5) : json(nullptr);
  j["adv_top1"] = r.adv_top1;
  j["adv_top5"] = r.adv_top5 ? json(*r.adv_top5) : json(nullptr);
  j["success_rate"] = r.success_rate;
  j["success_rate_on_correct"] = r.success_rate_on_correct;
  j["median_l2"] = r.median_l2;
  j["mean_l2"] = r.mean_l2;
  j["median_linf"] = r.median_linf;
  j["mean_linf"] = r.mean_linf;
  return j;
}

void ensure_dir(const std::filesystem::path &dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create output directory " + dir.string());
}

std::filesystem::path weights_path(const RunConfig &cfg) {
  if (cfg.model && cfg.model->weights) return *cfg.model->weights;
  return cfg.output_dir / "weights.json";
}

void cmd_train(const RunConfig &cfg, std::ostream &out) {
  const DatasetSection &ds = need(cfg.dataset, "dataset", "train");
  const ModelSection &ms = need(cfg.model, "model", "train");
  const Split sp = load_split(ds);
  const TrainResult tr = sgd_train(ms.spec, ms.train, sp.train);
  ensure_dir(cfg.output_dir);
  save_weights(tr.params, cfg.output_dir / "weights.json");
  write_file_atomic(cfg.output_dir / "history.csv", history_csv(tr.history));
  const Accuracy acc = evaluate(tr.params, sp.test, 1);
  out << "trained " << ms.spec.id << ": test top1 " << format_number(acc.top1) << "\n";
}

void cmd_adv_train(const RunConfig &cfg, std::ostream &out) {
  const DatasetSection &ds = need(cfg.dataset, "dataset", "adv-train");
  const ModelSection &ms = need(cfg.model, "model", "adv-train");
  const DefenseSection &def = need(cfg.defense, "defense", "adv-train");
  const Split sp = load_split(ds);
  const TrainResult tr = adversarial_train(ms.spec, def.config, sp.train);
  ensure_dir(cfg.output_dir);
  save_weights(tr.params, cfg.output_dir / "weights.json");
  write_file_atomic(cfg.output_dir / "history.csv", history_csv(tr.history));
  const Accuracy acc = evaluate(tr.params, sp.test, 1);
  out << "adversarially trained " << ms.spec.id << " (" << to_string(def.config.attack)
      << "): test top1 " << format_number(acc.top1) << "\n";
}

void cmd_attack(const RunConfig &cfg, std::ostream &out) {
  const DatasetSection &ds = need(cfg.dataset, "dataset", "attack");
  const AttackSection &as = need(cfg.attack, "attack", "attack");
  const MlpParams p = load_weights(weights_path(cfg));
  const Dataset test = limit(load_split(ds).test, as.max_examples);
  ensure_dir(cfg.output_dir);

  const bool sign_attack = as.spec.kind != AttackKind::DeepFool && as.spec.kind != AttackKind::CwL2;
  if (sign_attack && !as.eps_list.empty()) {
    const auto rows = robustness_curve(p, test, as.spec, as.eps_list);
    write_file_atomic(cfg.output_dir / "robustness.csv", robustness_csv(rows));
  }
  const AttackReport rep = evaluate_attack(p, test, as.spec);
  write_file_atomic(cfg.output_dir / "attack_report.json", report_to_json(rep).dump(2) + "\n");
  out << rep.attack_name << ": clean top1 " << format_number(rep.clean_top1) << ", adversarial top1 "
      << format_number(rep.adv_top1) << ", success " << format_number(rep.success_rate) << "\n";
}

void cmd_transfer(const RunConfig &cfg, std::ostream &out) {
  const DatasetSection &ds = need(cfg.dataset, "dataset", "transfer");
  const ModelSection &ms = need(cfg.model, "model", "transfer");
  const TransferSection &ts = need(cfg.transfer, "transfer", "transfer");
  const AttackSection &as = need(cfg.attack, "attack", "transfer");
  if (ts.attacks.empty()) throw Error(ErrorKind::Config, "transfer.attacks is empty");
  const Split sp = load_split(ds);

  std::vector<MlpSpec> specs;
  std::vector<std::uint64_t> seeds;
  for (const ZooEntry &z : ts.models) {
    specs.push_back(z.spec);
    seeds.push_back(z.seed);
  }
  const std::vector<MlpParams> zoo = train_zoo(specs, ms.train, sp.train, seeds);
  const Dataset eval = limit(sp.test, as.max_examples);

  std::vector<std::string> header{"attack", "source"};
  for (const MlpSpec &s : specs) header.push_back(s.id);
  CsvTable csv(header);
  std::string markdown = "# Transfer rates (percent)\n\n";
  json summary;
  summary["metric"] = std::string(to_string(ts.metric));
  summary["matrices"] = json::array();
  for (AttackKind kind : ts.attacks) {
    AttackSpec spec = as.spec;
    spec.kind = kind;
    if (ts.epsilon) {
      spec.budget.epsilon = *ts.epsilon;
      spec.budget.step_size.reset();
    }
    const TransferMatrix m = transfer_matrix(zoo, spec, eval, ts.metric);
    for (std::size_t s = 0; s < m.rates.size(); ++s) {
      std::vector<std::string> cells{m.attack_name, m.model_ids[s]};
      for (const auto &v : m.rates[s]) cells.push_back(format_number(v));
      csv.add_row(std::move(cells));
    }
    markdown += transfer_markdown(m) + "\n";
    const auto mean = m.mean_off_diagonal();
    json entry;
    entry["attack_name"] = m.attack_name;
    entry["epsilon"] = m.budget.epsilon;
    entry["mean_off_diagonal"] = mean ? json(*mean) : json(nullptr);
    entry["source_fooled"] = m.source_fooled;
    summary["matrices"].push_back(entry);
    out << m.attack_name << ": mean off-diagonal transfer " << format_number(mean) << "%\n";
  }
  ensure_dir(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "transfer.csv", csv.str());
  write_file_atomic(cfg.output_dir / "transfer.md", markdown);
  write_file_atomic(cfg.output_dir / "transfer_summary.json", summary.dump(2) + "\n");
}

vuln::EvaluationSummary read_summary(const ScoreInput &in) {
  json doc;
  try {
    doc = json::parse(read_file(in.input));
  } catch (const json::exception &e) {
    throw Error(ErrorKind::MalformedPayload, in.input.string() + ": " + e.what());
  }
  vuln::EvaluationSummary s;
  try {
    if (doc.contains("matrices")) {
      for (const json &m : doc.at("matrices")) {
        if (!in.attack.empty() && m.at("attack_name").get<std::string>() != in.attack) continue;
        s.attack_name = m.at("attack_name").get<std::string>();
        s.epsilon = m.at("epsilon").get<double>();
        s.success_rate = m.at("mean_off_diagonal").is_null() ? 0.0 : m.at("mean_off_diagonal").get<double>() / 100.0;
        return s;
      }
      throw Error(ErrorKind::Config, in.input.string() + " has no matrix for attack '" + in.attack + "'");
    }
    s.attack_name = doc.at("attack_name").get<std::string>();
    s.epsilon = doc.at("epsilon").get<double>();
    s.success_rate = doc.at("success_rate").get<double>();
  } catch (const json::exception &e) {
    throw Error(ErrorKind::MalformedPayload, in.input.string() + ": " + e.what());
  }
  return s;
}

void cmd_score(const RunConfig &cfg, std::ostream &out) {
  const ScoreSection &sc = need(cfg.score, "score", "score");
  std::vector<vuln::MlVulnRecord> records;
  for (const ScoreInput &in : sc.records) {
    records.push_back(vuln::make_record(in.title, in.threat_model, read_summary(in), in.narrative, sc.thresholds));
  }
  const vuln::RenderedReport rendered = vuln::render_report(records);
  ensure_dir(cfg.output_dir);
  write_file_atomic(cfg.output_dir / "report.md", rendered.markdown);
  write_file_atomic(cfg.output_dir / "report.json", rendered.json);
  out << "scored " << records.size() << " record(s)\n";
}

}  // namespace

bool selftest(std::ostream &out) {
  bool ok = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const GradCase c = random_grad_case(seed);
    const GradCheck g = check_gradients(c.params, c.x, c.y);
    out << (g.passed ? "ok   " : "FAIL ") << "gradient case " << seed << ": max rel "
        << format_number(g.max_rel_error) << ", max abs " << format_number(g.max_abs_error) << "\n";
    ok = ok && g.passed;
  }
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const DeepFoolCheck d = check_deepfool_affine(seed);
    out << (d.passed ? "ok   " : "FAIL ") << "deepfool affine case " << seed << ": step error "
        << format_number(d.max_step_error) << ", residual " << format_number(d.boundary_residual) << "\n";
    ok = ok && d.passed;
  }
  return ok;
}

int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  CLI::App app{"Adversarial robustness toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string eps;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"train", "train a model and save weights + history.csv"},
      {"attack", "evaluate an attack; writes robustness.csv and attack_report.json"},
      {"adv-train", "adversarially train a model"},
      {"transfer", "train a zoo and measure transfer rates"},
      {"score", "build a vulnerability report from earlier outputs"},
  };
  for (const auto &[name, help] : commands) {
    CLI::App *sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "JSON run configuration")->required();
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "override model.train.seed");
    sub->add_option("--eps", eps, "comma-separated epsilon list (overrides attack.eps_list)");
  }
  app.add_subcommand("selftest", "gradient and DeepFool consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError &e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  const CLI::App *chosen = app.get_subcommands().front();
  const std::string name = chosen->get_name();
  if (name == "selftest") return selftest(out) ? kExitOk : kExitRuntime;

  RunConfig cfg;
  try {
    cfg = load_run_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (seed) {
      if (cfg.model) cfg.model->train.seed = *seed;
      if (cfg.defense) cfg.defense->config.base.seed = *seed;
    }
    if (!eps.empty()) {
      if (!cfg.attack) throw Error(ErrorKind::Config, "--eps needs an 'attack' section");
      cfg.attack->eps_list.clear();
      std::stringstream ss(eps);
      std::string item;
      while (std::getline(ss, item, ',')) {
        try {
          std::size_t used = 0;
          cfg.attack->eps_list.push_back(std::stod(item, &used));
          if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception &) {
          throw Error(ErrorKind::Config, "--eps entry '" + item + "' is not a number");
        }
      }
    }
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    if (name == "train") cmd_train(cfg, out);
    else if (name == "attack") cmd_attack(cfg, out);
    else if (name == "adv-train") cmd_adv_train(cfg, out);
    else if (name == "transfer") cmd_transfer(cfg, out);
    else if (name == "score") cmd_score(cfg, out);
  } catch (const Error &e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Config || e.kind() == ErrorKind::Argument ? kExitValidation : kExitRuntime;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace advr::cli
