#ifndef ADVR_TRAINING_HPP
#define ADVR_TRAINING_HPP

#include <functional>
#include <span>
#include <vector>

#include "advr/model.hpp"

namespace advr {

struct BatchInfo {
  std::size_t epoch = 0;
  std::size_t batch = 0;
  std::span<const std::size_t> indices;  // dataset rows in this minibatch
};

/// Called once per minibatch before the gradient step; may rewrite the batch inputs.
using BatchHook = std::function<void(const MlpParams &current, const BatchInfo &info,
                                     std::vector<Tensor> &xs, std::vector<std::size_t> &ys)>;

/// The shared minibatch SGD loop. Shuffles every epoch from cfg.seed.
TrainResult train_minibatch(const MlpSpec &spec, const TrainConfig &cfg, const Dataset &data,
                            const BatchHook &hook);

}  // namespace advr

#endif  // ADVR_TRAINING_HPP
