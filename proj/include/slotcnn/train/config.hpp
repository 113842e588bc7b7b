#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "slotcnn/rel/model.hpp"

namespace slotcnn::train {

struct Hyperparams {
  int filter_width = 3;
  int num_filters = 300;
  int hidden_rel = 100;
  int hidden_ent = 100;
  double alpha = 0.5;
  double lr = 0.1;
  int batch = 10;
  double l2 = 1e-5;
  int embedding_dim = 50;
  int epochs = 100;
  int patience = 10;
  std::uint64_t seed = 1;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;

  /// Throws ConfigError for non-positive sizes, negative rates or alpha
  /// outside [0, 1].
  void validate() const;
  ModelDims dims() const;
};

/// Everything one training run needs.
struct RunConfig {
  Variant variant = Variant::multiclass;
  std::string train;
  std::string dev;
  std::string test;
  std::string embeddings;
  std::string triggers;
  /// Original slot name of a binary model.
  std::string slot;
  /// Balance negatives against positives before training.
  bool subsample = true;
  /// Where tuned per-slot thresholds are written; empty to skip tuning.
  std::string thresholds;
  Hyperparams hp;
};

/// Raw `key = value` pairs. A value may be a comma-separated list, which
/// only `grid` accepts.
class ConfigValues {
 public:
  /// Throws ConfigError for unknown keys.
  void set(std::string_view key, std::string_view value);
  bool contains(std::string_view key) const;
  const std::vector<std::string>& values(std::string_view key) const;
  const std::map<std::string, std::vector<std::string>, std::less<>>& entries() const {
    return entries_;
  }

 private:
  std::map<std::string, std::vector<std::string>, std::less<>> entries_;
};

/// Keys in the order grid axes are enumerated (last key varies fastest).
const std::vector<std::string>& config_keys();
bool is_config_key(std::string_view key);

/// Blank lines and '#' comments are skipped; malformed lines and unknown
/// keys raise ParseError naming the line.
ConfigValues parse_config(std::istream& in, const std::string& source);
/// Relative data paths (train, dev, test, embeddings, triggers, thresholds)
/// are taken relative to the config file's directory.
ConfigValues load_config(const std::string& path);

/// Requires every key to hold a single value.
RunConfig to_run_config(const ConfigValues& values);

/// Cartesian product of all list-valued keys.
std::vector<RunConfig> expand_grid(const ConfigValues& values);

/// `key = value` lines for the hyperparameters of `hp`.
std::string describe(const Hyperparams& hp);

}  // namespace slotcnn::train
