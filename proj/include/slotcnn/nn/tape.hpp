#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "slotcnn/crf/chain_crf.hpp"
#include "slotcnn/nn/params.hpp"
#include "slotcnn/nn/tensor.hpp"

namespace slotcnn::nn {

/// One value in a forward pass. Parameter nodes alias the Param and
/// accumulate straight into its gradient buffer.
class Node {
 public:
  explicit Node(Matrix value) : value_(std::move(value)) {
    grad_.setZero(value_.rows(), value_.cols());
  }
  explicit Node(Param& p) : param_(&p) {}

  const Matrix& value() const { return param_ ? param_->value : value_; }
  Matrix& grad() { return param_ ? param_->grad : grad_; }

 private:
  Matrix value_;
  Matrix grad_;
  Param* param_ = nullptr;
};

using Var = std::shared_ptr<Node>;

/// Reverse-mode record of the operations the model variants need. Each op
/// computes its value eagerly and, when recording, appends the closure
/// that propagates its output gradient to its inputs. backward() replays
/// the closures newest-first.
class Tape {
 public:
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var param(Param& p);
  Var constant(Matrix value);

  /// Rows of `table` for each id, stacked: ids.size() x D.
  Var embed(Param& table, const std::vector<int>& ids);
  /// tanh(convolution + bias), output m x (T - width + 1).
  Var conv_tanh(const Var& input, const Var& filters, const Var& bias,
                Index width);
  Var kmax(const Var& c, Index k);
  /// Row-major flatten into a column vector.
  Var flatten(const Var& x);
  /// Concatenate column vectors.
  Var concat(const std::vector<Var>& parts);
  /// sum_i weights_i * inputs_i + bias.
  Var affine(const std::vector<std::pair<Var, Var>>& terms, const Var& bias);
  Var tanh(const Var& x);
  Var sigmoid(const Var& x);

  /// log-sum-exp(z) - z[gold]; 1x1.
  Var softmax_nll(const Var& logits, Index gold);
  /// sum_i softplus(z_i) - t_i z_i, i.e. BCE on sigmoid(z); 1x1.
  Var sigmoid_bce(const Var& logits, const Vec& target);
  /// Chain CRF negative log-likelihood; emissions and transitions are all
  /// tape values.
  Var crf_nll(const Var& e1, const Var& rel, const Var& e2, const Var& begin,
              const Var& ent_rel, const Var& rel_ent, const Var& end,
              const crf::ChainLabels& gold);
  /// sum_i w_i * x_i over 1x1 values.
  Var weighted_sum(const std::vector<std::pair<double, Var>>& terms);

  /// Seeds d(loss) = seed and replays the record. A tape replays once;
  /// a second call throws NumericError.
  void backward(const Var& loss, double seed = 1.0);

 private:
  Var make(Matrix value);
  void on_backward(std::function<void()> step);

  bool record_;
  bool replayed_ = false;
  std::vector<Var> nodes_;
  std::vector<std::function<void()>> steps_;
};

}  // namespace slotcnn::nn
