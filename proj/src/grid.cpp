#include "slotcnn/train/grid.hpp"

#include <cstdio>
#include <ostream>

#include "slotcnn/error.hpp"
#include "slotcnn/train/trainer.hpp"

namespace slotcnn::train {

GridResult grid_search(const std::vector<RunConfig>& configs, const GridScorer& score) {
  if (configs.empty()) throw ConfigError("grid search needs at least one configuration");
  GridResult result;
  for (const auto& cfg : configs) {
    result.table.push_back({cfg, score(cfg)});
    if (result.table.back().dev_macro_f1 > result.table[result.best].dev_macro_f1)
      result.best = result.table.size() - 1;
  }
  return result;
}

GridResult grid_search(const std::vector<RunConfig>& configs) {
  return grid_search(configs,
                     [](const RunConfig& cfg) { return run_training(cfg).result.best_dev_f1; });
}

void write_grid_table(std::ostream& out, const GridResult& result) {
  out << "best\tvariant\tfilter_width\tnum_filters\thidden_rel\thidden_ent\talpha\tdev_macro_f1\n";
  char buf[32];
  for (size_t i = 0; i < result.table.size(); ++i) {
    const auto& row = result.table[i];
    const Hyperparams& hp = row.config.hp;
    out << (i == result.best ? "*" : "-") << '\t' << variant_name(row.config.variant) << '\t'
        << hp.filter_width << '\t' << hp.num_filters << '\t' << hp.hidden_rel << '\t'
        << hp.hidden_ent << '\t';
    std::snprintf(buf, sizeof buf, "%g", hp.alpha);
    out << buf << '\t';
    std::snprintf(buf, sizeof buf, "%.6f", row.dev_macro_f1);
    out << buf << '\n';
  }
}

}  // namespace slotcnn::train
