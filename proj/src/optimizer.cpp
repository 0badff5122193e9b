#include "path24/optimizer.hpp"

namespace path24 {

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "rmsprop") return OptimizerKind::kRmsProp;
  if (name == "sgd_momentum" || name == "sgd") {
    return OptimizerKind::kSgdMomentum;
  }
  throw ConfigError("unknown optimizer '" + name +
                    "' (want rmsprop or sgd_momentum)");
}

std::string to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kRmsProp ? "rmsprop" : "sgd_momentum";
}

namespace {

class RmsProp final : public Optimizer {
 public:
  RmsProp(double lr, double alpha, double eps)
      : lr_(lr), alpha_(alpha), eps_(eps) {}

  void step(std::vector<Tensor*>& params) override {
    if (state_.empty()) {
      for (Tensor* p : params) {
        state_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      }
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor& p = *params[i];
      Matrix& v = state_[i];
      v = alpha_ * v + (1.0 - alpha_) * p.grad.cwiseProduct(p.grad);
      p.value.array() -=
          lr_ * p.grad.array() / (v.array().sqrt() + eps_);
      p.zero_grad();
    }
  }

 private:
  double lr_, alpha_, eps_;
  std::vector<Matrix> state_;
};

class SgdMomentum final : public Optimizer {
 public:
  SgdMomentum(double lr, double momentum) : lr_(lr), momentum_(momentum) {}

  void step(std::vector<Tensor*>& params) override {
    if (state_.empty()) {
      for (Tensor* p : params) {
        state_.push_back(Matrix::Zero(p->value.rows(), p->value.cols()));
      }
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
      Tensor& p = *params[i];
      Matrix& u = state_[i];
      u = momentum_ * u + p.grad;
      p.value -= lr_ * u;
      p.zero_grad();
    }
  }

 private:
  double lr_, momentum_;
  std::vector<Matrix> state_;
};

}  // namespace

std::unique_ptr<Optimizer> make_optimizer(OptimizerKind kind,
                                          double learning_rate,
                                          const OptimizerParams& params) {
  if (!(learning_rate > 0.0)) {
    throw ConfigError("learning rate must be > 0");
  }
  if (kind == OptimizerKind::kRmsProp) {
    return std::make_unique<RmsProp>(learning_rate, params.rmsprop_smoothing,
                                     params.rmsprop_epsilon);
  }
  return std::make_unique<SgdMomentum>(learning_rate, params.momentum);
}

}  // namespace path24
