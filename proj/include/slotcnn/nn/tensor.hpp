#pragma once

#include <Eigen/Dense>

#include <string>

#include "slotcnn/error.hpp"

namespace slotcnn::nn {

using Index = Eigen::Index;

template <typename Scalar>
using Tensor2 =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Matrix = Tensor2<double>;
using Vec = Vector<double>;

using IndexMatrix =
    Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError("invalid shape: " + what);
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

}  // namespace slotcnn::nn
