#include "slotcnn/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slotcnn/data/cleaning.hpp"
#include "slotcnn/data/dataset.hpp"
#include "slotcnn/data/triggers.hpp"
#include "slotcnn/error.hpp"
#include "slotcnn/nn/tape.hpp"

namespace slotcnn::train {

namespace {

std::vector<nn::Matrix> snapshot(const nn::ParamSet& params) {
  std::vector<nn::Matrix> out;
  for (const auto& p : params) out.push_back(p.value);
  return out;
}

void restore(nn::ParamSet& params, const std::vector<nn::Matrix>& values) {
  size_t i = 0;
  for (auto& p : params) p.value = values[i++];
}

}  // namespace

double mean_loss(Model& model, const std::vector<EncodedExample>& examples, double alpha) {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : examples) {
    nn::Tape tape(false);
    total += example_loss(tape, model, ex, alpha)->value()(0, 0);
  }
  return total / static_cast<double>(examples.size());
}

TrainResult train_model(Model model, const std::vector<EncodedExample>& train,
                        const std::vector<EncodedExample>& dev, const Hyperparams& hp,
                        const EpochCallback& on_epoch) {
  hp.validate();
  if (train.empty()) throw ConfigError("training set is empty");
  if (dev.empty()) throw ConfigError("development set is empty");

  nn::ParamSet& params = model.params();
  auto rng = nn::make_rng(hp.seed, "shuffle");
  std::vector<size_t> order(train.size());
  std::iota(order.begin(), order.end(), size_t{0});

  TrainResult result{model, {}, 0, -1.0};
  std::vector<nn::Matrix> best = snapshot(params);
  int since_best = 0;
  const Thresholds thresholds = default_thresholds(model.schema());

  for (int epoch = 1; epoch <= hp.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batch_index = 0;
    for (size_t start = 0; start < order.size(); start += static_cast<size_t>(hp.batch)) {
      ++batch_index;
      const size_t stop = std::min(order.size(), start + static_cast<size_t>(hp.batch));
      const double scale = 1.0 / static_cast<double>(stop - start);
      params.zero_grad();
      double batch_loss = 0.0;
      for (size_t i = start; i < stop; ++i) {
        nn::Tape tape;
        auto loss = example_loss(tape, model, train[order[i]], hp.alpha);
        batch_loss += loss->value()(0, 0);
        tape.backward(loss, scale);
      }
      if (!std::isfinite(batch_loss)) throw DivergedError(epoch, batch_index, batch_loss);
      params.sgd_step(hp.lr, hp.l2);
      epoch_loss += batch_loss;
    }

    EpochStats stats{epoch, epoch_loss / static_cast<double>(train.size()),
                     evaluate(model, dev, thresholds).macro_f1};
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
    if (stats.dev_macro_f1 > result.best_dev_f1) {
      result.best_dev_f1 = stats.dev_macro_f1;
      result.best_epoch = epoch;
      best = snapshot(params);
      since_best = 0;
    } else if (++since_best >= hp.patience) {
      break;
    }
  }
  restore(params, best);
  result.model = std::move(model);
  return result;
}

PreparedData prepare_data(const RunConfig& cfg) {
  if (cfg.train.empty()) throw ConfigError("no training set given (train)");
  if (cfg.dev.empty()) throw ConfigError("no development set given (dev)");
  if (cfg.variant == Variant::binary && cfg.slot.empty())
    throw ConfigError("binary models need a slot");
  PreparedData data;
  if (!cfg.embeddings.empty()) {
    data.embeddings = data::load_embeddings(cfg.embeddings);
    const auto dim = data.embeddings->vectors.cols();
    if (dim != cfg.hp.embedding_dim)
      throw ConfigError("embeddings in " + cfg.embeddings + " have dimension " +
                        std::to_string(dim) + " but embedding_dim is " +
                        std::to_string(cfg.hp.embedding_dim));
  }
  data.train_raw = data::load_dataset(cfg.train);
  data.dev_raw = data::load_dataset(cfg.dev);
  if (!cfg.triggers.empty()) {
    const auto triggers = data::load_triggers(cfg.triggers);
    data.train_raw = data::clean_negatives(data.train_raw, triggers,
                                           cfg.variant == Variant::binary
                                               ? data::CleaningMode::binary
                                               : data::CleaningMode::multiclass);
  }
  if (cfg.subsample) data.train_raw = data::subsample_negatives(data.train_raw, cfg.hp.seed);
  data.vocab = data::build_vocabulary(data.train_raw,
                                      data.embeddings ? &*data.embeddings : nullptr);
  return data;
}

Model initial_model(const RunConfig& cfg, const PreparedData& data) {
  Model model(cfg.variant, cfg.hp.dims(), data.vocab, cfg.hp.seed,
              cfg.variant == Variant::binary ? cfg.slot : std::string{});
  if (data.embeddings) model.load_embeddings(*data.embeddings);
  return model;
}

RunOutput run_training(const RunConfig& cfg, const EpochCallback& on_epoch) {
  cfg.hp.validate();
  const PreparedData data = prepare_data(cfg);
  Model model = initial_model(cfg, data);
  const auto& schema = model.schema();
  const int min_len = model.min_context_length();
  const auto train = encode_all(data.train_raw, data.vocab, schema, min_len);
  const auto dev = encode_all(data.dev_raw, data.vocab, schema, min_len);
  RunOutput out{train_model(std::move(model), train, dev, cfg.hp, on_epoch),
                default_thresholds(schema)};
  if (!cfg.thresholds.empty()) out.thresholds = tune_thresholds(out.result.model, dev);
  return out;
}

}  // namespace slotcnn::train
