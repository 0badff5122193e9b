#pragma once

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "path24/types.hpp"

namespace path24 {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// A parameter with its gradient accumulator.
struct Tensor {
  std::string name;
  Matrix value;
  Matrix grad;

  Tensor() = default;
  Tensor(std::string name_, Matrix value_)
      : name(std::move(name_)),
        value(std::move(value_)),
        grad(Matrix::Zero(value.rows(), value.cols())) {}

  void zero_grad() { grad.setZero(); }
  Eigen::Index size() const { return value.size(); }
};

// y = x W^T + b, rows of x are samples.
class Linear {
 public:
  Linear(int in_features, int out_features, const std::string& name,
         std::mt19937_64& rng);

  Matrix forward(const Matrix& x);
  Matrix backward(const Matrix& dy);

  Tensor weight;  // out x in
  Tensor bias;    // out x 1

 private:
  Matrix input_;
};

// 1-d batch normalization over feature columns with running statistics.
class BatchNorm1d {
 public:
  BatchNorm1d(int features, double momentum, double epsilon,
              const std::string& name);

  Matrix forward(const Matrix& x, bool training);
  Matrix backward(const Matrix& dy);

  Tensor gamma;
  Tensor beta;
  Vector running_mean;
  Vector running_var;

 private:
  double momentum_;
  double epsilon_;
  Matrix x_hat_;
  Matrix centered_;
  Vector inv_std_;
};

// Inverted dropout; identity in eval mode.
class Dropout {
 public:
  explicit Dropout(double rate);

  Matrix forward(const Matrix& x, bool training, std::mt19937_64& rng);
  Matrix backward(const Matrix& dy);

  double rate() const { return rate_; }

 private:
  double rate_;
  Matrix mask_;
  bool identity_ = true;
};

}  // namespace path24
