#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "slotcnn/nn/tensor.hpp"
#include "slotcnn/rel/example.hpp"
#include "slotcnn/rel/model.hpp"

namespace slotcnn::train {

inline constexpr double kDefaultThreshold = 0.5;

struct SlotScore {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool active() const { return tp + fp + fn > 0; }
};

struct EvalReport {
  std::vector<std::string> slots;
  std::vector<SlotScore> per_slot;
  /// Mean F1 over slots with at least one gold or predicted instance.
  double macro_f1 = 0.0;
  SlotScore micro;
  int num_examples = 0;
};

/// 2PR / (P + R), 0 when P + R = 0.
double f1_score(double precision, double recall);
SlotScore make_score(int tp, int fp, int fn);

/// Per-slot decision thresholds indexed by merged slot.
using Thresholds = std::vector<double>;
Thresholds default_thresholds(const SlotSchema& schema = SlotSchema::standard());

/// Argmax over the slots whose score reaches their threshold; the negative
/// label when none does. Ties go to the lower slot index.
int decide(const nn::Vec& scores, const Thresholds& thresholds, int negative_label);

/// scores: one row per example over the merged labels (the N column is
/// ignored); gold: merged label per example.
EvalReport evaluate_scores(const nn::Matrix& scores, const std::vector<int>& gold,
                           const Thresholds& thresholds,
                           const SlotSchema& schema = SlotSchema::standard());

/// label_probabilities for every example, one row each.
nn::Matrix score_matrix(const Model& model, const std::vector<EncodedExample>& examples);

/// Gold labels as the model sees them: for binary models every label other
/// than the model's slot counts as N.
std::vector<int> gold_labels(const Model& model, const std::vector<EncodedExample>& examples);

EvalReport evaluate(const Model& model, const std::vector<EncodedExample>& examples,
                    const Thresholds& thresholds);

/// Thresholds {step, 2 step, ...} clipped to [0.05, 0.95].
std::vector<double> threshold_grid(double step = 0.05);

/// Each slot with dev instances gets the grid threshold that maximizes its
/// dev F1 (other slots held at the default); ties go to the higher
/// threshold. Slots without gold dev instances keep the default.
Thresholds tune_thresholds(const nn::Matrix& scores, const std::vector<int>& gold,
                           double step = 0.05,
                           const SlotSchema& schema = SlotSchema::standard());
Thresholds tune_thresholds(const Model& model, const std::vector<EncodedExample>& dev,
                           double step = 0.05);

/// "slot<TAB>threshold" per line; slots not listed keep the default.
Thresholds parse_thresholds(std::istream& in, const std::string& source,
                            const SlotSchema& schema = SlotSchema::standard());
Thresholds load_thresholds(const std::string& path);
void write_thresholds(std::ostream& out, const Thresholds& thresholds,
                      const SlotSchema& schema = SlotSchema::standard());
void save_thresholds(const std::string& path, const Thresholds& thresholds);

/// Machine-readable report: one row per slot, then macro and micro rows.
void write_report_tsv(std::ostream& out, const EvalReport& report);
void write_report_table(std::ostream& out, const EvalReport& report);

}  // namespace slotcnn::train
