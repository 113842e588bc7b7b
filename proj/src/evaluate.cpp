#include "slotcnn/train/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "slotcnn/error.hpp"

namespace slotcnn::train {

double f1_score(double precision, double recall) {
  if (precision + recall <= 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

SlotScore make_score(int tp, int fp, int fn) {
  SlotScore s{tp, fp, fn};
  s.precision = tp + fp > 0 ? static_cast<double>(tp) / (tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : 0.0;
  s.f1 = f1_score(s.precision, s.recall);
  return s;
}

Thresholds default_thresholds(const SlotSchema& schema) {
  return Thresholds(static_cast<size_t>(schema.num_slots()), kDefaultThreshold);
}

int decide(const nn::Vec& scores, const Thresholds& thresholds, int negative_label) {
  int best = negative_label;
  for (int s = 0; s < negative_label; ++s) {
    if (scores(s) < thresholds[static_cast<size_t>(s)]) continue;
    if (best == negative_label || scores(s) > scores(best)) best = s;
  }
  return best;
}

EvalReport evaluate_scores(const nn::Matrix& scores, const std::vector<int>& gold,
                           const Thresholds& thresholds, const SlotSchema& schema) {
  const int num_slots = schema.num_slots();
  if (scores.rows() != static_cast<nn::Index>(gold.size()))
    throw ShapeError("score rows do not match the number of gold labels");
  if (scores.cols() < num_slots) throw ShapeError("score matrix has too few columns");
  if (static_cast<int>(thresholds.size()) != num_slots)
    throw ShapeError("need one threshold per slot");

  std::vector<int> tp(num_slots, 0), fp(num_slots, 0), fn(num_slots, 0);
  for (size_t i = 0; i < gold.size(); ++i) {
    const int g = gold[i];
    if (g < 0 || g > num_slots) throw LabelError("gold label out of range");
    const int p = decide(scores.row(static_cast<nn::Index>(i)).transpose(), thresholds, num_slots);
    if (p == g) {
      if (g != num_slots) ++tp[g];
      continue;
    }
    if (p != num_slots) ++fp[p];
    if (g != num_slots) ++fn[g];
  }

  EvalReport report;
  report.num_examples = static_cast<int>(gold.size());
  report.slots = schema.slot_names();
  int active = 0, all_tp = 0, all_fp = 0, all_fn = 0;
  double f1_sum = 0.0;
  for (int s = 0; s < num_slots; ++s) {
    report.per_slot.push_back(make_score(tp[s], fp[s], fn[s]));
    if (report.per_slot.back().active()) {
      ++active;
      f1_sum += report.per_slot.back().f1;
    }
    all_tp += tp[s];
    all_fp += fp[s];
    all_fn += fn[s];
  }
  report.macro_f1 = active > 0 ? f1_sum / active : 0.0;
  report.micro = make_score(all_tp, all_fp, all_fn);
  return report;
}

nn::Matrix score_matrix(const Model& model, const std::vector<EncodedExample>& examples) {
  nn::Matrix out(static_cast<nn::Index>(examples.size()), model.schema().num_labels());
  for (size_t i = 0; i < examples.size(); ++i)
    out.row(static_cast<nn::Index>(i)) = label_probabilities(model, examples[i]).transpose();
  return out;
}

std::vector<int> gold_labels(const Model& model, const std::vector<EncodedExample>& examples) {
  std::vector<int> gold;
  const int negative = model.schema().negative_label();
  for (const auto& ex : examples) {
    int g = ex.gold;
    if (model.variant() == Variant::binary && g != model.binary_label()) g = negative;
    gold.push_back(g);
  }
  return gold;
}

EvalReport evaluate(const Model& model, const std::vector<EncodedExample>& examples,
                    const Thresholds& thresholds) {
  return evaluate_scores(score_matrix(model, examples), gold_labels(model, examples), thresholds,
                         model.schema());
}

std::vector<double> threshold_grid(double step) {
  if (!(step > 0.0)) throw ConfigError("threshold grid step must be positive");
  std::vector<double> grid;
  for (int k = 1;; ++k) {
    const double t = std::round(k * step * 1e9) / 1e9;
    if (t > 0.95 + 1e-12) break;
    if (t >= 0.05 - 1e-12) grid.push_back(t);
  }
  return grid;
}

Thresholds tune_thresholds(const nn::Matrix& scores, const std::vector<int>& gold, double step,
                           const SlotSchema& schema) {
  const auto grid = threshold_grid(step);
  Thresholds tuned = default_thresholds(schema);
  for (int s = 0; s < schema.num_slots(); ++s) {
    if (std::find(gold.begin(), gold.end(), s) == gold.end()) continue;
    Thresholds trial = default_thresholds(schema);
    double best_f1 = -1.0;
    for (double t : grid) {
      trial[static_cast<size_t>(s)] = t;
      const double f1 = evaluate_scores(scores, gold, trial, schema).per_slot[s].f1;
      if (f1 >= best_f1) {
        best_f1 = f1;
        tuned[static_cast<size_t>(s)] = t;
      }
    }
  }
  return tuned;
}

Thresholds tune_thresholds(const Model& model, const std::vector<EncodedExample>& dev,
                           double step) {
  return tune_thresholds(score_matrix(model, dev), gold_labels(model, dev), step, model.schema());
}

Thresholds parse_thresholds(std::istream& in, const std::string& source,
                            const SlotSchema& schema) {
  Thresholds out = default_thresholds(schema);
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(source, lineno, "expected 'slot<TAB>threshold'");
    const std::string slot = line.substr(0, tab);
    const int label = schema.find_label(slot);
    if (label < 0 || label == schema.negative_label())
      throw ParseError(source, lineno, "unknown slot '" + slot + "'");
    double value = 0.0;
    try {
      size_t used = 0;
      value = std::stod(line.substr(tab + 1), &used);
      if (used != line.size() - tab - 1) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw ParseError(source, lineno, "threshold is not a number");
    }
    if (!(value >= 0.0 && value <= 1.0))
      throw ParseError(source, lineno, "threshold must lie in [0, 1]");
    out[static_cast<size_t>(label)] = value;
  }
  return out;
}

Thresholds load_thresholds(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open threshold file " + path);
  return parse_thresholds(in, path);
}

void write_thresholds(std::ostream& out, const Thresholds& thresholds, const SlotSchema& schema) {
  char buf[32];
  for (int s = 0; s < schema.num_slots(); ++s) {
    std::snprintf(buf, sizeof buf, "%.2f", thresholds[static_cast<size_t>(s)]);
    out << schema.label_name(s) << '\t' << buf << '\n';
  }
}

void save_thresholds(const std::string& path, const Thresholds& thresholds) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write threshold file " + path);
  write_thresholds(out, thresholds);
}

namespace {

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void write_report_tsv(std::ostream& out, const EvalReport& report) {
  out << "slot\ttp\tfp\tfn\tprecision\trecall\tf1\n";
  for (size_t s = 0; s < report.slots.size(); ++s) {
    const SlotScore& sc = report.per_slot[s];
    out << report.slots[s] << '\t' << sc.tp << '\t' << sc.fp << '\t' << sc.fn << '\t'
        << fixed(sc.precision) << '\t' << fixed(sc.recall) << '\t' << fixed(sc.f1) << '\n';
  }
  const SlotScore& m = report.micro;
  out << "macro\t-\t-\t-\t-\t-\t" << fixed(report.macro_f1) << '\n';
  out << "micro\t" << m.tp << '\t' << m.fp << '\t' << m.fn << '\t' << fixed(m.precision) << '\t'
      << fixed(m.recall) << '\t' << fixed(m.f1) << '\n';
}

void write_report_table(std::ostream& out, const EvalReport& report) {
  char line[160];
  std::snprintf(line, sizeof line, "%-28s %5s %5s %5s %9s %9s %9s\n", "slot", "TP", "FP", "FN",
                "P", "R", "F1");
  out << line;
  for (size_t s = 0; s < report.slots.size(); ++s) {
    const SlotScore& sc = report.per_slot[s];
    if (!sc.active()) continue;
    std::snprintf(line, sizeof line, "%-28s %5d %5d %5d %9.4f %9.4f %9.4f\n",
                  report.slots[s].c_str(), sc.tp, sc.fp, sc.fn, sc.precision, sc.recall, sc.f1);
    out << line;
  }
  const SlotScore& m = report.micro;
  std::snprintf(line, sizeof line, "%-28s %5d %5d %5d %9.4f %9.4f %9.4f\n", "micro", m.tp, m.fp,
                m.fn, m.precision, m.recall, m.f1);
  out << line;
  std::snprintf(line, sizeof line, "%-28s %5s %5s %5s %9s %9s %9.4f\n", "macro", "", "", "", "",
                "", report.macro_f1);
  out << line;
  out << "examples: " << report.num_examples << '\n';
}

}  // namespace slotcnn::train
