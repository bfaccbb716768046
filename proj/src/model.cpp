#include "advr/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "advr/datasets.hpp"
#include "advr/io.hpp"
#include "advr/training.hpp"

namespace advr {

using nlohmann::json;

void MlpSpec::validate() const {
  if (layer_widths.size() < 2) {
    throw Error(ErrorKind::Argument, "model needs at least input and output widths");
  }
  for (std::size_t w : layer_widths) {
    if (w == 0) throw Error(ErrorKind::Argument, "layer widths must be positive");
  }
  if (class_count() < 2) throw Error(ErrorKind::Argument, "model needs at least 2 classes");
}

MlpParams init_params(const MlpSpec &spec, std::uint64_t seed) {
  spec.validate();
  MlpParams p;
  p.spec = spec;
  p.seed = seed;
  RngStream rng(seed);
  for (std::size_t l = 0; l < spec.layer_count(); ++l) {
    const std::size_t fan_in = spec.layer_widths[l];
    const std::size_t fan_out = spec.layer_widths[l + 1];
    const double s = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    DenseLayer layer{Tensor({fan_out, fan_in}), Tensor({fan_out})};
    for (double &w : layer.weight.values()) w = rng.uniform(-s, s);
    p.layers.push_back(std::move(layer));
  }
  return p;
}

namespace {

void affine(const DenseLayer &layer, std::span<const double> in, std::span<double> out) {
  const std::size_t n_out = layer.weight.rows();
  const std::size_t n_in = layer.weight.cols();
  const double *w = layer.weight.data().data();
  for (std::size_t o = 0; o < n_out; ++o) {
    double acc = layer.bias[o];
    const double *row = w + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
    out[o] = acc;
  }
}

void check_input(const MlpParams &p, std::size_t n) {
  if (n != p.spec.input_dim()) {
    throw Error(ErrorKind::Dimension, "input has " + std::to_string(n) + " features, model " +
                                          p.spec.id + " expects " +
                                          std::to_string(p.spec.input_dim()));
  }
}

// Backward pass shared by loss_and_grads and input_vjp. `param_grads` may be null.
Tensor backward(const MlpParams &p, const ForwardTrace &trace, std::span<const double> upstream,
                ParamGrads *param_grads) {
  std::vector<double> delta(upstream.begin(), upstream.end());
  const std::size_t n_layers = p.layers.size();
  for (std::size_t l = n_layers; l-- > 0;) {
    const DenseLayer &layer = p.layers[l];
    const std::size_t n_out = layer.weight.rows();
    const std::size_t n_in = layer.weight.cols();
    const auto in = trace.activations[l].data();
    if (param_grads != nullptr) {
      DenseLayer &g = param_grads->layers[l];
      for (std::size_t o = 0; o < n_out; ++o) {
        g.bias[o] = delta[o];
        double *row = g.weight.data().data() + o * n_in;
        for (std::size_t i = 0; i < n_in; ++i) row[i] = delta[o] * in[i];
      }
    }
    std::vector<double> prev(n_in, 0.0);
    const double *w = layer.weight.data().data();
    for (std::size_t o = 0; o < n_out; ++o) {
      const double d = delta[o];
      if (d == 0.0) continue;
      const double *row = w + o * n_in;
      for (std::size_t i = 0; i < n_in; ++i) prev[i] += d * row[i];
    }
    if (l > 0) {
      // ReLU derivative at the previous layer's pre-activation (0 at exactly 0).
      const auto pre = trace.pre_activations[l - 1].data();
      for (std::size_t i = 0; i < n_in; ++i) {
        if (!(pre[i] > 0.0)) prev[i] = 0.0;
      }
    }
    delta = std::move(prev);
  }
  return Tensor::vector(std::move(delta));
}

}  // namespace

ForwardTrace forward(const MlpParams &p, const Tensor &x) {
  check_input(p, x.size());
  ForwardTrace trace;
  trace.activations.push_back(Tensor::vector(x.values()));
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const DenseLayer &layer = p.layers[l];
    Tensor pre({layer.weight.rows()});
    affine(layer, trace.activations.back().data(), pre.data());
    if (l + 1 < p.layers.size()) {
      Tensor act = pre;
      for (double &v : act.values()) v = std::max(v, 0.0);
      trace.activations.push_back(std::move(act));
    }
    trace.pre_activations.push_back(std::move(pre));
  }
  trace.logits = trace.pre_activations.back();
  return trace;
}

std::vector<double> logits(const MlpParams &p, std::span<const double> x) {
  check_input(p, x.size());
  std::vector<double> cur(x.begin(), x.end());
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    std::vector<double> next(p.layers[l].weight.rows());
    affine(p.layers[l], cur, next);
    if (l + 1 < p.layers.size()) {
      for (double &v : next) v = std::max(v, 0.0);
    }
    cur = std::move(next);
  }
  return cur;
}

Tensor input_vjp(const MlpParams &p, const ForwardTrace &trace, std::span<const double> upstream) {
  if (upstream.size() != p.spec.class_count()) {
    throw Error(ErrorKind::Dimension, "upstream gradient length does not match class count");
  }
  return backward(p, trace, upstream, nullptr);
}

ParamGrads zero_grads(const MlpParams &p) {
  ParamGrads g;
  for (const DenseLayer &layer : p.layers) {
    g.layers.push_back({Tensor(layer.weight.shape()), Tensor(layer.bias.shape())});
  }
  return g;
}

LossAndGrads loss_and_grads(const MlpParams &p, const Tensor &x, std::size_t label) {
  const ForwardTrace trace = forward(p, x);
  CrossEntropy ce = cross_entropy(trace.logits, label);
  LossAndGrads out;
  out.loss = ce.loss;
  out.param_grads = zero_grads(p);
  out.input_grad = backward(p, trace, ce.grad_logits.data(), &out.param_grads);
  out.input_grad = Tensor(x.shape(), std::move(out.input_grad.values()));
  return out;
}

Tensor loss_input_grad(const MlpParams &p, const Tensor &x, std::size_t label) {
  const ForwardTrace trace = forward(p, x);
  const CrossEntropy ce = cross_entropy(trace.logits, label);
  Tensor g = backward(p, trace, ce.grad_logits.data(), nullptr);
  return Tensor(x.shape(), std::move(g.values()));
}

double loss(const MlpParams &p, const Tensor &x, std::size_t label) {
  const std::vector<double> z = logits(p, x.data());
  return cross_entropy(Tensor::vector(z), label).loss;
}

std::size_t predict(const MlpParams &p, std::span<const double> x) { return argmax(logits(p, x)); }

std::size_t least_likely_class(const MlpParams &p, const Tensor &x) {
  return argmin(logits(p, x.data()));
}

void accumulate(ParamGrads &into, const ParamGrads &g) {
  for (std::size_t l = 0; l < into.layers.size(); ++l) {
    auto &w = into.layers[l].weight.values();
    const auto &gw = g.layers[l].weight.values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += gw[i];
    auto &b = into.layers[l].bias.values();
    const auto &gb = g.layers[l].bias.values();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += gb[i];
  }
}

void apply_update(MlpParams &p, const ParamGrads &g, double scale) {
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto &w = p.layers[l].weight.values();
    const auto &gw = g.layers[l].weight.values();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] += scale * gw[i];
    auto &b = p.layers[l].bias.values();
    const auto &gb = g.layers[l].bias.values();
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += scale * gb[i];
  }
}

TrainResult train_minibatch(const MlpSpec &spec, const TrainConfig &cfg, const Dataset &data,
                            const BatchHook &hook) {
  spec.validate();
  if (data.size() == 0) throw Error(ErrorKind::Argument, "training set is empty");
  if (cfg.batch_size == 0 || cfg.batch_size > data.size()) {
    throw Error(ErrorKind::Argument, "batch size must be in [1, training-set size]");
  }
  if (!(cfg.learning_rate > 0.0)) throw Error(ErrorKind::Argument, "learning rate must be positive");
  if (cfg.epochs == 0) throw Error(ErrorKind::Argument, "epochs must be positive");
  if (data.dim() != spec.input_dim()) {
    throw Error(ErrorKind::Dimension, "dataset dimension " + std::to_string(data.dim()) +
                                          " does not match model input " +
                                          std::to_string(spec.input_dim()));
  }
  for (std::size_t y : data.labels) {
    if (y >= spec.class_count()) throw Error(ErrorKind::Argument, "label exceeds model class count");
  }

  TrainResult result;
  result.params = init_params(spec, cfg.seed);
  MlpParams &p = result.params;
  RngStream shuffle_rng(derive_seed(cfg.seed, 0x5348554646ULL));

  std::vector<Tensor> xs;
  std::vector<std::size_t> ys;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> order = permutation(data.size(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size, ++batch_index) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, end - start);
      xs.clear();
      ys.clear();
      for (std::size_t idx : batch) {
        xs.push_back(data.example(idx));
        ys.push_back(data.labels[idx]);
      }
      if (hook) hook(p, BatchInfo{epoch, batch_index, batch}, xs, ys);

      ParamGrads total = zero_grads(p);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const LossAndGrads lg = loss_and_grads(p, xs[i], ys[i]);
        loss_sum += lg.loss;
        accumulate(total, lg.param_grads);
      }
      apply_update(p, total, -cfg.learning_rate / static_cast<double>(xs.size()));
    }
    result.history.push_back(
        {epoch + 1, loss_sum / static_cast<double>(data.size()), evaluate(p, data, 1).top1});
  }
  return result;
}

TrainResult sgd_train(const MlpSpec &spec, const TrainConfig &cfg, const Dataset &data) {
  return train_minibatch(spec, cfg, data, BatchHook{});
}

Accuracy evaluate(const MlpParams &p, const Dataset &data, std::size_t k) {
  if (k == 0 || k > p.spec.class_count()) {
    throw Error(ErrorKind::Argument, "k must be in [1, class count]");
  }
  Accuracy acc;
  if (data.size() == 0) return acc;
  std::size_t top1 = 0, topk = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::vector<double> z = logits(p, data.features.row(i));
    if (argmax(z) == data.labels[i]) ++top1;
    if (in_top_k(z, data.labels[i], k)) ++topk;
  }
  acc.top1 = static_cast<double>(top1) / static_cast<double>(data.size());
  acc.topk = static_cast<double>(topk) / static_cast<double>(data.size());
  return acc;
}

std::string weights_to_json(const MlpParams &p) {
  json doc;
  doc["spec"] = {{"layer_widths", p.spec.layer_widths}, {"id", p.spec.id}};
  doc["seed"] = p.seed;
  json layers = json::array();
  for (const DenseLayer &layer : p.layers) {
    json w = json::array();
    for (std::size_t r = 0; r < layer.weight.rows(); ++r) {
      const auto row = layer.weight.row(r);
      w.push_back(std::vector<double>(row.begin(), row.end()));
    }
    layers.push_back({{"w", std::move(w)}, {"b", layer.bias.values()}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump();
}

MlpParams weights_from_json(const std::string &text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception &e) {
    throw Error(ErrorKind::MalformedPayload, std::string("weights file is not valid JSON: ") + e.what());
  }

  MlpParams p;
  std::vector<json> layer_docs;
  try {
    p.spec.layer_widths = doc.at("spec").at("layer_widths").get<std::vector<std::size_t>>();
    p.spec.id = doc.at("spec").at("id").get<std::string>();
    p.seed = doc.at("seed").get<std::uint64_t>();
    layer_docs = doc.at("layers").get<std::vector<json>>();
  } catch (const json::exception &e) {
    throw Error(ErrorKind::MalformedPayload, std::string("weights file missing fields: ") + e.what());
  }
  try {
    p.spec.validate();
  } catch (const Error &e) {
    throw Error(ErrorKind::ShapeInconsistency, e.what());
  }
  if (layer_docs.size() != p.spec.layer_count()) {
    throw Error(ErrorKind::ShapeInconsistency,
                "weights file has " + std::to_string(layer_docs.size()) + " layers, spec implies " +
                    std::to_string(p.spec.layer_count()));
  }

  for (std::size_t l = 0; l < layer_docs.size(); ++l) {
    const std::size_t n_in = p.spec.layer_widths[l];
    const std::size_t n_out = p.spec.layer_widths[l + 1];
    std::vector<std::vector<double>> w;
    std::vector<double> b;
    try {
      w = layer_docs[l].at("w").get<std::vector<std::vector<double>>>();
      b = layer_docs[l].at("b").get<std::vector<double>>();
    } catch (const json::exception &e) {
      throw Error(ErrorKind::MalformedPayload, "layer " + std::to_string(l) + ": " + e.what());
    }
    if (w.size() != n_out || b.size() != n_out) {
      throw Error(ErrorKind::ShapeInconsistency, "layer " + std::to_string(l) + " has wrong output width");
    }
    std::vector<double> flat;
    flat.reserve(n_out * n_in);
    for (const auto &row : w) {
      if (row.size() != n_in) {
        throw Error(ErrorKind::ShapeInconsistency, "layer " + std::to_string(l) + " has wrong input width");
      }
      flat.insert(flat.end(), row.begin(), row.end());
    }
    p.layers.push_back({Tensor({n_out, n_in}, std::move(flat)), Tensor({n_out}, std::move(b))});
  }
  return p;
}

void save_weights(const MlpParams &p, const std::filesystem::path &path) {
  write_file_atomic(path, weights_to_json(p));
}

MlpParams load_weights(const std::filesystem::path &path) {
  return weights_from_json(read_file(path));
}

}  // namespace advr
