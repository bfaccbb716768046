#ifndef ADVR_MODEL_HPP
#define ADVR_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "advr/numcore.hpp"

namespace advr {

struct Dataset;

/// Fully connected ReLU classifier architecture.
struct MlpSpec {
  std::vector<std::size_t> layer_widths;  // input dim, hidden dims..., class count
  std::string id;

  std::size_t input_dim() const { return layer_widths.front(); }
  std::size_t class_count() const { return layer_widths.back(); }
  std::size_t layer_count() const { return layer_widths.size() - 1; }

  /// Throws ErrorKind::Argument unless there are >= 2 positive widths and >= 2 classes.
  void validate() const;

  bool operator==(const MlpSpec &) const = default;
};

struct DenseLayer {
  Tensor weight;  // out x in
  Tensor bias;    // out

  bool operator==(const DenseLayer &) const = default;
};

struct MlpParams {
  MlpSpec spec;
  std::uint64_t seed = 0;
  std::vector<DenseLayer> layers;

  bool operator==(const MlpParams &) const = default;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

struct ForwardTrace {
  std::vector<Tensor> pre_activations;  // one per layer; last one is the logits
  std::vector<Tensor> activations;      // activations[0] is the input
  Tensor logits;
};

struct ParamGrads {
  std::vector<DenseLayer> layers;
};

struct LossAndGrads {
  double loss = 0.0;
  ParamGrads param_grads;
  Tensor input_grad;
};

struct EpochStats {
  std::size_t epoch = 0;
  double loss = 0.0;  // mean training loss over the epoch's minibatches
  double top1 = 0.0;  // training-set accuracy after the epoch
};

struct TrainResult {
  MlpParams params;
  std::vector<EpochStats> history;
};

struct Accuracy {
  double top1 = 0.0;
  double topk = 0.0;
};

MlpParams init_params(const MlpSpec &spec, std::uint64_t seed);

ForwardTrace forward(const MlpParams &p, const Tensor &x);
/// Logits only, without keeping the trace.
std::vector<double> logits(const MlpParams &p, std::span<const double> x);

/// Vector-Jacobian product: d(upstream . logits)/dx through an existing trace.
Tensor input_vjp(const MlpParams &p, const ForwardTrace &trace, std::span<const double> upstream);

LossAndGrads loss_and_grads(const MlpParams &p, const Tensor &x, std::size_t label);
/// Input gradient of the cross-entropy loss only (skips parameter gradients).
Tensor loss_input_grad(const MlpParams &p, const Tensor &x, std::size_t label);
double loss(const MlpParams &p, const Tensor &x, std::size_t label);

std::size_t predict(const MlpParams &p, std::span<const double> x);
std::size_t least_likely_class(const MlpParams &p, const Tensor &x);

/// Minibatch SGD. The update step is exposed so other trainers can share it.
TrainResult sgd_train(const MlpSpec &spec, const TrainConfig &cfg, const Dataset &data);
void accumulate(ParamGrads &into, const ParamGrads &g);
void apply_update(MlpParams &p, const ParamGrads &g, double scale);
ParamGrads zero_grads(const MlpParams &p);

Accuracy evaluate(const MlpParams &p, const Dataset &data, std::size_t k);

void save_weights(const MlpParams &p, const std::filesystem::path &path);
MlpParams load_weights(const std::filesystem::path &path);
std::string weights_to_json(const MlpParams &p);
MlpParams weights_from_json(const std::string &text);

}  // namespace advr

#endif  // ADVR_MODEL_HPP
