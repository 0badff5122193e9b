#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "path24/nn.hpp"

namespace path24 {

enum class OptimizerKind { kRmsProp, kSgdMomentum };

OptimizerKind parse_optimizer(const std::string& name);
std::string to_string(OptimizerKind kind);

struct OptimizerParams {
  double rmsprop_smoothing = 0.99;
  double rmsprop_epsilon = 1e-8;
  double momentum = 0.9;  // sgd_momentum only
};

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  // Applies one update from the tensors' accumulated grads, then clears them.
  virtual void step(std::vector<Tensor*>& params) = 0;
};

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind,
                                          double learning_rate,
                                          const OptimizerParams& params);

}  // namespace path24
