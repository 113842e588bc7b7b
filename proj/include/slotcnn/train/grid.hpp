#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "slotcnn/train/config.hpp"

namespace slotcnn::train {

struct GridRow {
  RunConfig config;
  double dev_macro_f1 = 0.0;
};

struct GridResult {
  /// One row per configuration, in grid order.
  std::vector<GridRow> table;
  size_t best = 0;

  const RunConfig& best_config() const { return table[best].config; }
};

/// Trains a configuration and returns its dev macro F1.
using GridScorer = std::function<double(const RunConfig&)>;

/// Scores every configuration; the first one in grid order wins ties.
GridResult grid_search(const std::vector<RunConfig>& configs, const GridScorer& score);

/// Scores with run_training.
GridResult grid_search(const std::vector<RunConfig>& configs);

void write_grid_table(std::ostream& out, const GridResult& result);

}  // namespace slotcnn::train
