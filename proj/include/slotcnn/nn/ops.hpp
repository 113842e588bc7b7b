#pragma once

// Dense forward kernels shared by the layer-level API and the tape.
// Everything here is templated on the scalar type and takes Eigen
// expressions, so callers can pass blocks/maps without copies.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "slotcnn/nn/tensor.hpp"

namespace slotcnn::nn {

enum class Activation { tanh, sigmoid, identity };

/// m filters of width w over D-dimensional rows. Row i of `filters` holds
/// filter i flattened as [j * D + k] for window offset j and feature k.
template <typename Scalar>
struct ConvLayer {
  Tensor2<Scalar> filters;
  Vector<Scalar> bias;
  Index width = 1;

  Index num_filters() const { return filters.rows(); }
  Index input_dim() const { return width > 0 ? filters.cols() / width : 0; }
};

/// out = activation(weights * x + bias); weights are stored out x in.
template <typename Scalar>
struct DenseLayer {
  Tensor2<Scalar> weights;
  Vector<Scalar> bias;

  Index input_dim() const { return weights.cols(); }
  Index output_dim() const { return weights.rows(); }
};

template <typename Scalar>
struct KMaxResult {
  Tensor2<Scalar> values;  // m x k
  IndexMatrix indices;     // source column of each value, increasing per row
};

/// Sliding windows of `width` consecutive rows, one window per output row:
/// result(t, j * D + k) = input(t + j, k).
template <typename Derived>
Tensor2<typename Derived::Scalar> im2col(const Eigen::MatrixBase<Derived>& input,
                                         Index width) {
  using Scalar = typename Derived::Scalar;
  const Index rows = input.rows();
  const Index dim = input.cols();
  require_shape(width >= 1, "filter width must be >= 1");
  require_shape(rows >= width, "input length " + std::to_string(rows) +
                                   " shorter than filter width " +
                                   std::to_string(width));
  const Index out_rows = rows - width + 1;
  Tensor2<Scalar> windows(out_rows, width * dim);
  for (Index t = 0; t < out_rows; ++t)
    for (Index j = 0; j < width; ++j)
      windows.row(t).segment(j * dim, dim) = input.row(t + j);
  return windows;
}

/// C[i, t] = tanh(sum_{j,k} filters[i][j, k] * input[t + j, k] + bias[i]).
template <typename Derived, typename Scalar = typename Derived::Scalar>
Tensor2<Scalar> conv_forward(const Eigen::MatrixBase<Derived>& input,
                             const ConvLayer<Scalar>& layer) {
  require_shape(layer.filters.cols() == layer.width * input.cols(),
                "filters have " + std::to_string(layer.filters.cols()) +
                    " columns, expected width*D = " +
                    std::to_string(layer.width * input.cols()));
  require_shape(layer.bias.size() == layer.filters.rows(),
                "conv bias length must equal filter count");
  const Tensor2<Scalar> windows = im2col(input, layer.width);
  Tensor2<Scalar> pre = layer.filters * windows.transpose();
  pre.colwise() += layer.bias;
  return pre.array().tanh().matrix();
}

/// Keeps the k largest entries of each row in their original column order.
/// Equal values are ranked by earlier column first.
template <typename Derived>
KMaxResult<typename Derived::Scalar> kmax_pool(const Eigen::MatrixBase<Derived>& c,
                                               Index k) {
  using Scalar = typename Derived::Scalar;
  require_shape(k >= 1, "k must be >= 1");
  require_shape(c.cols() >= k, "cannot take " + std::to_string(k) +
                                   "-max over " + std::to_string(c.cols()) +
                                   " columns");
  KMaxResult<Scalar> out;
  out.values.resize(c.rows(), k);
  out.indices.resize(c.rows(), k);
  std::vector<Index> order(static_cast<size_t>(c.cols()));
  for (Index i = 0; i < c.rows(); ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](Index a, Index b) {
                        if (c(i, a) != c(i, b)) return c(i, a) > c(i, b);
                        return a < b;
                      });
    std::sort(order.begin(), order.begin() + k);
    for (Index j = 0; j < k; ++j) {
      out.indices(i, j) = order[static_cast<size_t>(j)];
      out.values(i, j) = c(i, order[static_cast<size_t>(j)]);
    }
  }
  return out;
}

template <typename Derived>
auto apply_activation(const Eigen::MatrixBase<Derived>& z, Activation act) {
  using Scalar = typename Derived::Scalar;
  using Plain = typename Derived::PlainObject;
  switch (act) {
    case Activation::tanh:
      return Plain(z.array().tanh().matrix());
    case Activation::sigmoid:
      return Plain((Scalar(1) / (Scalar(1) + (-z.array()).exp())).matrix());
    case Activation::identity:
      break;
  }
  return Plain(z);
}

template <typename Derived, typename Scalar = typename Derived::Scalar>
Vector<Scalar> dense_forward(const Eigen::MatrixBase<Derived>& x,
                             const DenseLayer<Scalar>& layer, Activation act) {
  require_shape(x.size() == layer.input_dim(),
                "dense input length " + std::to_string(x.size()) +
                    " != " + std::to_string(layer.input_dim()));
  require_shape(layer.bias.size() == layer.output_dim(),
                "dense bias length must equal output dim");
  Vector<Scalar> z = layer.weights * x + layer.bias;
  return apply_activation(z, act);
}

template <typename Scalar>
Scalar sigmoid(Scalar z) {
  return Scalar(1) / (Scalar(1) + std::exp(-z));
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  const Scalar top = z.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((z.array() - top).exp().sum());
}

template <typename Derived>
Vector<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  Vector<Scalar> e = (z.array() - z.maxCoeff()).exp().matrix();
  return e / e.sum();
}

/// -log probs[gold].
template <typename Derived>
typename Derived::Scalar softmax_nll(const Eigen::MatrixBase<Derived>& probs,
                                     Index gold) {
  if (gold < 0 || gold >= probs.size())
    throw LabelError("gold index " + std::to_string(gold) +
                     " out of range for " + std::to_string(probs.size()) +
                     " classes");
  return -std::log(probs(gold));
}

/// Sum of per-element binary cross-entropies. Terms with zero target weight
/// are skipped so exact 0/1 predictions give exactly zero loss.
template <typename DerivedP, typename DerivedT>
typename DerivedP::Scalar binary_cross_entropy(
    const Eigen::MatrixBase<DerivedP>& pred,
    const Eigen::MatrixBase<DerivedT>& target) {
  using Scalar = typename DerivedP::Scalar;
  if (pred.size() != target.size())
    throw LabelError("target length " + std::to_string(target.size()) +
                     " != prediction length " + std::to_string(pred.size()));
  Scalar loss = 0;
  for (Index i = 0; i < pred.size(); ++i) {
    const Scalar t = target(i);
    if (t < 0 || t > 1) throw LabelError("binary target outside [0, 1]");
    if (t > 0) loss -= t * std::log(pred(i));
    if (t < 1) loss -= (1 - t) * std::log1p(-pred(i));
  }
  return loss;
}

/// p <- p - lr * (g + l2 * p), entrywise.
template <typename DerivedP, typename DerivedG>
void sgd_step(Eigen::MatrixBase<DerivedP>& params,
              const Eigen::MatrixBase<DerivedG>& grads,
              typename DerivedP::Scalar lr, typename DerivedP::Scalar l2) {
  require_shape(params.rows() == grads.rows() && params.cols() == grads.cols(),
                "gradient shape does not match parameter shape");
  params -= lr * (grads + l2 * params);
}

}  // namespace slotcnn::nn
