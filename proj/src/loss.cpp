#include "path24/loss.hpp"

#include <cmath>

namespace path24 {

namespace {

void check_labels(const Matrix& logits, const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != logits.rows()) {
    throw Error("cross_entropy: batch size mismatch");
  }
  for (int label : labels) {
    if (label < 0 || label >= logits.cols()) {
      throw Error("cross_entropy: label " + std::to_string(label) +
                  " outside [0," + std::to_string(logits.cols()) + ")");
    }
  }
}

}  // namespace

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    probs.row(i) = e / e.sum();
  }
  return probs;
}

double cross_entropy(const Matrix& logits, const std::vector<int>& labels) {
  check_labels(logits, labels);
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse =
        m + std::log((logits.row(i).array() - m).exp().sum());
    total += lse - logits(i, labels[i]);
  }
  return total / static_cast<double>(logits.rows());
}

double cross_entropy_with_grad(const Matrix& logits,
                               const std::vector<int>& labels,
                               Matrix& dlogits) {
  check_labels(logits, labels);
  dlogits = softmax_rows(logits);
  const auto n = static_cast<double>(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    dlogits(i, labels[i]) -= 1.0;
  }
  dlogits /= n;
  return cross_entropy(logits, labels);
}

}  // namespace path24
