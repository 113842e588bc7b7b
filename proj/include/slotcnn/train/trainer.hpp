#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "slotcnn/data/vocab.hpp"
#include "slotcnn/rel/example.hpp"
#include "slotcnn/rel/model.hpp"
#include "slotcnn/train/config.hpp"
#include "slotcnn/train/evaluate.hpp"

namespace slotcnn::train {

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;  // mean per-example loss
  double dev_macro_f1 = 0.0;
};

struct TrainResult {
  Model model;  // best-dev snapshot
  std::vector<EpochStats> history;
  int best_epoch = 0;
  double best_dev_f1 = -1.0;
};

using EpochCallback = std::function<void(const EpochStats&)>;

/// Minibatch SGD on the mean example loss with a seeded per-epoch shuffle.
/// Dev macro F1 (default thresholds) is measured after every epoch; the
/// best epoch's parameters are returned. Stops after `patience` epochs
/// without improvement or after `epochs`. Throws DivergedError on a
/// non-finite loss and ConfigError on empty data.
TrainResult train_model(Model model, const std::vector<EncodedExample>& train,
                        const std::vector<EncodedExample>& dev, const Hyperparams& hp,
                        const EpochCallback& on_epoch = {});

/// Mean loss of `model` over `examples` without recording gradients.
double mean_loss(Model& model, const std::vector<EncodedExample>& examples, double alpha);

/// Encoded data for one run, prepared from a RunConfig.
struct PreparedData {
  data::Vocabulary vocab;
  std::optional<data::EmbeddingTable> embeddings;
  std::vector<data::RawExample> train_raw;
  std::vector<data::RawExample> dev_raw;
};

/// Loads train/dev (and embeddings, triggers); cleans negatives when a
/// trigger file is given and subsamples them if requested.
PreparedData prepare_data(const RunConfig& cfg);

/// Fresh model for `cfg` over the prepared vocabulary and embeddings.
Model initial_model(const RunConfig& cfg, const PreparedData& data);

struct RunOutput {
  TrainResult result;
  Thresholds thresholds;
};

/// prepare_data, initial_model, train_model and, when cfg.thresholds is
/// set, threshold tuning on dev.
RunOutput run_training(const RunConfig& cfg, const EpochCallback& on_epoch = {});

}  // namespace slotcnn::train
