#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "slotcnn/nn/tensor.hpp"

namespace slotcnn::nn {

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
};

/// Named, ordered collection of learnable tensors with matching gradient
/// buffers. Insertion order is the serialization order.
class ParamSet {
 public:
  Param& add(const std::string& name, Index rows, Index cols);

  Param& at(std::string_view name);
  const Param& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  void zero_grad();
  Index num_entries() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  size_t size() const { return params_.size(); }

  /// p <- p - lr * (g + l2 * p) over every parameter.
  void sgd_step(double lr, double l2);

 private:
  std::vector<Param> params_;
  std::map<std::string, size_t, std::less<>> index_;
};

/// Deterministic sub-generator derived from a master seed and a stream
/// name ("init", "shuffle", "subsample", "synth", ...).
std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream);

/// Uniform in [-r, r] with r = sqrt(6 / (fan_in + fan_out)).
void glorot_uniform(Matrix& m, Index fan_in, Index fan_out,
                    std::mt19937_64& rng);

}  // namespace slotcnn::nn
