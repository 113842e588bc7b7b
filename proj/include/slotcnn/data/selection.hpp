#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "slotcnn/nn/params.hpp"
#include "slotcnn/rel/example.hpp"

namespace slotcnn::data {

/// A classifier that can be retrained on a labeled set and reports the
/// probability of its predicted label.
class ConfidenceScorer {
 public:
  virtual ~ConfidenceScorer() = default;
  virtual void train(const std::vector<EncodedExample>& examples) = 0;
  /// (predicted label, probability of that label)
  virtual std::pair<int, double> predict(const EncodedExample& ex) const = 0;
};

struct BagOfEmbeddingsOptions {
  int epochs = 30;
  double lr = 0.5;
  double l2 = 1e-5;
  std::uint64_t seed = 1;
};

/// Softmax regression over [mean embedding of left, middle and right
/// context tokens (pads excluded), order flag]. Retraining starts from
/// zero weights, so train() is a pure function of its input.
class BagOfEmbeddingsScorer : public ConfidenceScorer {
 public:
  BagOfEmbeddingsScorer(nn::Matrix embeddings, int num_labels,
                        BagOfEmbeddingsOptions options = {});

  void train(const std::vector<EncodedExample>& examples) override;
  std::pair<int, double> predict(const EncodedExample& ex) const override;
  nn::Vec probabilities(const EncodedExample& ex) const;
  nn::Vec features(const EncodedExample& ex) const;

 private:
  nn::Matrix embeddings_;
  int num_labels_;
  BagOfEmbeddingsOptions options_;
  nn::ParamSet params_;
};

struct SelectionResult {
  /// Seed set followed by the kept candidates in batch order.
  std::vector<EncodedExample> training;
  size_t num_seed = 0;
  std::vector<size_t> kept_per_batch;

  size_t num_selected() const { return training.size() - num_seed; }
};

/// Self-training data selection. Trains the scorer on the seed set; then,
/// batch by batch, keeps the candidates whose distant label equals the
/// scorer's prediction with confidence >= tau, appends them and retrains
/// before the next batch. Throws ConfigError for an empty seed set.
SelectionResult select_training_data(const std::vector<std::vector<EncodedExample>>& batches,
                                     const std::vector<EncodedExample>& seed_set,
                                     ConfidenceScorer& scorer, double tau);

/// Splits into k contiguous batches of near-equal size.
std::vector<std::vector<EncodedExample>> split_batches(const std::vector<EncodedExample>& examples,
                                                       int k);

}  // namespace slotcnn::data
