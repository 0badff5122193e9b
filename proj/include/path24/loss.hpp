#pragma once

#include <vector>

#include "path24/nn.hpp"

namespace path24 {

// Row-wise softmax in the log-sum-exp stable form.
Matrix softmax_rows(const Matrix& logits);

// Mean over the batch of -log softmax(logits)[label].
double cross_entropy(const Matrix& logits, const std::vector<int>& labels);

// Same, also filling d(loss)/d(logits).
double cross_entropy_with_grad(const Matrix& logits,
                               const std::vector<int>& labels,
                               Matrix& dlogits);

}  // namespace path24
