#include "path24/nn.hpp"

#include <cmath>

namespace path24 {

Linear::Linear(int in_features, int out_features, const std::string& name,
               std::mt19937_64& rng) {
  if (in_features < 1 || out_features < 1) {
    throw Error("linear layer dims must be positive");
  }
  // Fan-in-scaled uniform init for weight and bias.
  const double bound = 1.0 / std::sqrt(static_cast<double>(in_features));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix w(out_features, in_features);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
  }
  Matrix b(out_features, 1);
  for (Eigen::Index i = 0; i < b.rows(); ++i) b(i, 0) = dist(rng);
  weight = Tensor(name + ".weight", std::move(w));
  bias = Tensor(name + ".bias", std::move(b));
}

Matrix Linear::forward(const Matrix& x) {
  if (x.cols() != weight.value.cols()) {
    throw Error("linear forward: expected " +
                std::to_string(weight.value.cols()) + " features, got " +
                std::to_string(x.cols()));
  }
  input_ = x;
  return (x * weight.value.transpose()).rowwise() +
         bias.value.col(0).transpose();
}

Matrix Linear::backward(const Matrix& dy) {
  weight.grad += dy.transpose() * input_;
  bias.grad += dy.colwise().sum().transpose();
  return dy * weight.value;
}

BatchNorm1d::BatchNorm1d(int features, double momentum, double epsilon,
                         const std::string& name)
    : gamma(name + ".gamma", Matrix::Ones(features, 1)),
      beta(name + ".beta", Matrix::Zero(features, 1)),
      running_mean(Vector::Zero(features)),
      running_var(Vector::Ones(features)),
      momentum_(momentum),
      epsilon_(epsilon) {
  if (!(epsilon > 0.0)) throw Error("batch norm epsilon must be > 0");
}

Matrix BatchNorm1d::forward(const Matrix& x, bool training) {
  if (x.cols() != gamma.value.rows()) {
    throw Error("batch norm forward: expected " +
                std::to_string(gamma.value.rows()) + " features, got " +
                std::to_string(x.cols()));
  }
  const auto n = static_cast<double>(x.rows());
  Vector mean, var;
  if (training) {
    mean = x.colwise().mean();
    centered_ = x.rowwise() - mean.transpose();
    var = centered_.array().square().colwise().mean();  // biased
    running_mean = (1.0 - momentum_) * running_mean + momentum_ * mean;
    running_var = (1.0 - momentum_) * running_var + momentum_ * var;
  } else {
    mean = running_mean;
    var = running_var;
    centered_ = x.rowwise() - mean.transpose();
  }
  inv_std_ = (var.array() + epsilon_).rsqrt().matrix();
  x_hat_ =
      (centered_.array().rowwise() * inv_std_.transpose().array()).matrix();
  (void)n;
  Matrix scaled =
      (x_hat_.array().rowwise() * gamma.value.col(0).transpose().array())
          .matrix();
  return scaled.rowwise() + beta.value.col(0).transpose();
}

Matrix BatchNorm1d::backward(const Matrix& dy) {
  const auto n = static_cast<double>(dy.rows());
  gamma.grad += (dy.array() * x_hat_.array()).colwise().sum().transpose().matrix();
  beta.grad += dy.colwise().sum().transpose();

  // Training-mode backward through the batch statistics.
  Matrix dxhat =
      (dy.array().rowwise() * gamma.value.col(0).transpose().array()).matrix();
  Vector dvar = ((dxhat.array() * centered_.array()).colwise().sum() * (-0.5) *
                 inv_std_.transpose().array().cube())
                    .matrix()
                    .transpose();
  Vector dmean =
      ((dxhat.colwise().sum().array() * -inv_std_.transpose().array())
           .matrix()
           .transpose() +
       (dvar.array() * (centered_.colwise().sum().array() * (-2.0 / n))
                           .matrix()
                           .transpose()
                           .array())
           .matrix());
  Matrix dx =
      (dxhat.array().rowwise() * inv_std_.transpose().array()).matrix() +
      (centered_.array().rowwise() *
       (dvar.transpose().array() * (2.0 / n)))
          .matrix();
  dx.rowwise() += (dmean.transpose() / n);
  return dx;
}

Dropout::Dropout(double rate) : rate_(rate) {
  if (rate < 0.0 || rate >= 1.0) {
    throw Error("dropout rate must be in [0,1), got " + std::to_string(rate));
  }
}

Matrix Dropout::forward(const Matrix& x, bool training, std::mt19937_64& rng) {
  if (!training || rate_ == 0.0) {
    identity_ = true;
    return x;
  }
  identity_ = false;
  std::bernoulli_distribution keep(1.0 - rate_);
  const double scale = 1.0 / (1.0 - rate_);
  mask_ = Matrix(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      mask_(i, j) = keep(rng) ? scale : 0.0;
    }
  }
  return x.cwiseProduct(mask_);
}

Matrix Dropout::backward(const Matrix& dy) {
  if (identity_) return dy;
  return dy.cwiseProduct(mask_);
}

}  // namespace path24
