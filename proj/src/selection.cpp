#include "slotcnn/data/selection.hpp"

#include <algorithm>
#include <numeric>

#include "slotcnn/data/vocab.hpp"
#include "slotcnn/error.hpp"
#include "slotcnn/nn/ops.hpp"
#include "slotcnn/nn/tape.hpp"

namespace slotcnn::data {

using nn::Matrix;
using nn::Vec;

BagOfEmbeddingsScorer::BagOfEmbeddingsScorer(Matrix embeddings, int num_labels,
                                             BagOfEmbeddingsOptions options)
    : embeddings_(std::move(embeddings)), num_labels_(num_labels), options_(options) {
  if (num_labels_ < 2) throw ConfigError("scorer needs at least two labels");
  const auto dim = 3 * embeddings_.cols() + 1;
  params_.add("W", num_labels_, dim);
  params_.add("b", num_labels_, 1);
}

Vec BagOfEmbeddingsScorer::features(const EncodedExample& ex) const {
  const auto dim = embeddings_.cols();
  Vec f = Vec::Zero(3 * dim + 1);
  int block = 0;
  for (const auto* ctx : {&ex.left, &ex.middle, &ex.right}) {
    int n = 0;
    for (int id : *ctx) {
      if (id == kPadId) continue;
      if (id < 0 || id >= embeddings_.rows())
        throw ShapeError("token id " + std::to_string(id) + " outside scorer embeddings");
      f.segment(block * dim, dim) += embeddings_.row(id).transpose();
      ++n;
    }
    if (n > 0) f.segment(block * dim, dim) /= n;
    ++block;
  }
  f(3 * dim) = ex.order_flag;
  return f;
}

void BagOfEmbeddingsScorer::train(const std::vector<EncodedExample>& examples) {
  for (auto& p : params_) p.value.setZero();
  std::vector<Matrix> feats;
  for (const auto& ex : examples) {
    if (ex.gold < 0 || ex.gold >= num_labels_)
      throw LabelError("scorer example '" + ex.id + "' has label outside the scorer's range");
    const Vec f = features(ex);
    feats.push_back(Eigen::Map<const Matrix>(f.data(), f.size(), 1));
  }
  std::vector<size_t> order(examples.size());
  std::iota(order.begin(), order.end(), size_t{0});
  auto rng = nn::make_rng(options_.seed, "scorer");
  for (int epoch = 0; epoch < options_.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i : order) {
      params_.zero_grad();
      nn::Tape tape;
      auto logits = tape.affine({{tape.param(params_.at("W")), tape.constant(feats[i])}},
                                tape.param(params_.at("b")));
      tape.backward(tape.softmax_nll(logits, examples[i].gold));
      params_.sgd_step(options_.lr, options_.l2);
    }
  }
}

Vec BagOfEmbeddingsScorer::probabilities(const EncodedExample& ex) const {
  const Vec logits = params_.at("W").value * features(ex) +
                     Eigen::Map<const Vec>(params_.at("b").value.data(), num_labels_);
  return nn::softmax(logits);
}

std::pair<int, double> BagOfEmbeddingsScorer::predict(const EncodedExample& ex) const {
  const Vec p = probabilities(ex);
  Eigen::Index best = 0;
  p.maxCoeff(&best);
  return {static_cast<int>(best), p(best)};
}

SelectionResult select_training_data(const std::vector<std::vector<EncodedExample>>& batches,
                                     const std::vector<EncodedExample>& seed_set,
                                     ConfidenceScorer& scorer, double tau) {
  if (seed_set.empty()) throw ConfigError("training data selection needs a non-empty seed set");
  if (batches.empty()) throw ConfigError("training data selection needs k >= 1 batches");
  SelectionResult result;
  result.training = seed_set;
  result.num_seed = seed_set.size();
  scorer.train(result.training);
  for (const auto& batch : batches) {
    size_t kept = 0;
    for (const auto& candidate : batch) {
      const auto [label, confidence] = scorer.predict(candidate);
      if (label == candidate.gold && confidence >= tau) {
        result.training.push_back(candidate);
        ++kept;
      }
    }
    result.kept_per_batch.push_back(kept);
    if (kept > 0) scorer.train(result.training);
  }
  return result;
}

std::vector<std::vector<EncodedExample>> split_batches(const std::vector<EncodedExample>& examples,
                                                       int k) {
  if (k < 1) throw ConfigError("number of batches must be >= 1");
  std::vector<std::vector<EncodedExample>> batches(static_cast<size_t>(k));
  const size_t n = examples.size();
  for (size_t b = 0; b < static_cast<size_t>(k); ++b) {
    const size_t begin = n * b / static_cast<size_t>(k);
    const size_t end = n * (b + 1) / static_cast<size_t>(k);
    batches[b].assign(examples.begin() + static_cast<std::ptrdiff_t>(begin),
                      examples.begin() + static_cast<std::ptrdiff_t>(end));
  }
  return batches;
}

}  // namespace slotcnn::data
