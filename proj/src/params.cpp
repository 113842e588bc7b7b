#include "slotcnn/nn/params.hpp"

#include <cmath>

#include "slotcnn/nn/ops.hpp"

namespace slotcnn::nn {

Param& ParamSet::add(const std::string& name, Index rows, Index cols) {
  if (index_.count(name)) throw ConfigError("duplicate parameter " + name);
  index_.emplace(name, params_.size());
  params_.push_back(
      Param{name, Matrix::Zero(rows, cols), Matrix::Zero(rows, cols)});
  return params_.back();
}

Param& ParamSet::at(std::string_view name) {
  auto it = index_.find(name);
  if (it == index_.end())
    throw ConfigError("unknown parameter " + std::string(name));
  return params_[it->second];
}

const Param& ParamSet::at(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    throw ConfigError("unknown parameter " + std::string(name));
  return params_[it->second];
}

bool ParamSet::contains(std::string_view name) const {
  return index_.find(name) != index_.end();
}

void ParamSet::zero_grad() {
  for (auto& p : params_) p.grad.setZero();
}

Index ParamSet::num_entries() const {
  Index n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamSet::sgd_step(double lr, double l2) {
  for (auto& p : params_) nn::sgd_step(p.value, p.grad, lr, l2);
}

std::mt19937_64 make_rng(std::uint64_t seed, std::string_view stream) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed),
                                   static_cast<std::uint32_t>(seed >> 32)};
  for (char ch : stream) words.push_back(static_cast<unsigned char>(ch));
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

void glorot_uniform(Matrix& m, Index fan_in, Index fan_out,
                    std::mt19937_64& rng) {
  const double r = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-r, r);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
}

}  // namespace slotcnn::nn
