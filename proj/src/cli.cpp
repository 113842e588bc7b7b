#include "slotcnn/cli/cli.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "slotcnn/data/dataset.hpp"
#include "slotcnn/data/synthetic.hpp"
#include "slotcnn/error.hpp"
#include "slotcnn/post/postproc.hpp"
#include "slotcnn/rel/checks.hpp"
#include "slotcnn/rel/serialize.hpp"
#include "slotcnn/train/config.hpp"
#include "slotcnn/train/evaluate.hpp"
#include "slotcnn/train/grid.hpp"
#include "slotcnn/train/trainer.hpp"

namespace slotcnn::cli {

namespace {

constexpr double kGradCheckTolerance = 1e-4;

void require_file(const std::string& path, const std::string& what) {
  if (path.empty()) throw ConfigError(what + " not given");
  if (!std::filesystem::is_regular_file(path))
    throw IoError(what + ": file not found: " + path);
}

void require_dir(const std::string& path, const std::string& what) {
  if (!std::filesystem::is_directory(path))
    throw IoError(what + ": directory not found: " + path);
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

/// One --<key> option per config key; values given on the command line
/// override the config file.
class ConfigFlags {
 public:
  void attach(CLI::App* cmd) {
    const train::Hyperparams hp;
    const std::map<std::string, std::string> defaults = {
        {"variant", "multiclass"},
        {"subsample", "true"},
        {"filter_width", std::to_string(hp.filter_width)},
        {"num_filters", std::to_string(hp.num_filters)},
        {"hidden_rel", std::to_string(hp.hidden_rel)},
        {"hidden_ent", std::to_string(hp.hidden_ent)},
        {"alpha", "0.5"},
        {"lr", "0.1"},
        {"batch", std::to_string(hp.batch)},
        {"l2", "1e-05"},
        {"embedding_dim", std::to_string(hp.embedding_dim)},
        {"epochs", std::to_string(hp.epochs)},
        {"patience", std::to_string(hp.patience)},
        {"seed", std::to_string(hp.seed)},
    };
    for (const auto& key : train::config_keys()) {
      auto* opt = cmd->add_option("--" + key, values_[key], "overrides config key '" + key + "'");
      if (auto it = defaults.find(key); it != defaults.end()) opt->default_str(it->second);
      options_.emplace_back(key, opt);
    }
  }

  train::ConfigValues merged(const std::string& config_path) const {
    train::ConfigValues values;
    if (!config_path.empty()) {
      require_file(config_path, "--config");
      values = train::load_config(config_path);
    }
    for (const auto& [key, opt] : options_)
      if (opt->count() > 0) values.set(key, values_.at(key));
    return values;
  }

 private:
  std::map<std::string, std::string> values_;
  std::vector<std::pair<std::string, CLI::Option*>> options_;
};

void check_run_inputs(const train::RunConfig& cfg) {
  require_file(cfg.train, "train");
  require_file(cfg.dev, "dev");
  if (!cfg.embeddings.empty()) require_file(cfg.embeddings, "embeddings");
  if (!cfg.triggers.empty()) require_file(cfg.triggers, "triggers");
}

int cmd_gen_data(const std::string& spec_path, std::uint64_t seed, const std::string& out_dir,
                 std::ostream& out) {
  require_file(spec_path, "--spec");
  const auto spec = data::load_synthetic_spec(spec_path);
  const auto corpus = data::generate_synthetic(spec, seed);
  data::write_synthetic(corpus, out_dir);
  out << "wrote " << corpus.train.size() << " train, " << corpus.dev.size() << " dev, "
      << corpus.test.size() << " test examples to " << out_dir << '\n';
  return kSuccess;
}

int cmd_train(const train::ConfigValues& values, const std::string& model_path,
              std::ostream& out) {
  const train::RunConfig cfg = train::to_run_config(values);
  check_run_inputs(cfg);
  const auto run = train::run_training(cfg, [&](const train::EpochStats& s) {
    char line[96];
    std::snprintf(line, sizeof line, "epoch %3d  loss %.6f  dev_macro_f1 %.6f\n", s.epoch,
                  s.train_loss, s.dev_macro_f1);
    out << line;
  });
  save_model(run.result.model, model_path);
  if (!cfg.thresholds.empty()) train::save_thresholds(cfg.thresholds, run.thresholds);
  out << "best epoch " << run.result.best_epoch << ", model written to " << model_path << '\n';
  return kSuccess;
}

int cmd_grid(const train::ConfigValues& values, const std::string& table_path,
             std::ostream& out) {
  const auto configs = train::expand_grid(values);
  for (const auto& cfg : configs) check_run_inputs(cfg);
  const auto result = train::grid_search(configs);
  auto file = open_output(table_path);
  train::write_grid_table(file, result);
  out << configs.size() << " configurations; best dev macro F1 "
      << result.table[result.best].dev_macro_f1 << "\n" << train::describe(result.best_config().hp);
  return kSuccess;
}

std::vector<EncodedExample> encode_for(const Model& model,
                                       const std::vector<data::RawExample>& raws) {
  std::vector<EncodedExample> out;
  for (const auto& raw : raws) out.push_back(model.encode(raw));
  return out;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& thresholds_path, const std::string& report_path,
             std::ostream& out) {
  require_file(model_path, "--model");
  require_file(data_path, "--data");
  if (!thresholds_path.empty()) require_file(thresholds_path, "--thresholds");
  const Model model = load_model(model_path);
  const auto examples = encode_for(model, data::load_dataset(data_path));
  const auto thresholds = thresholds_path.empty() ? train::default_thresholds(model.schema())
                                                  : train::load_thresholds(thresholds_path);
  const auto report = train::evaluate(model, examples, thresholds);
  auto file = open_output(report_path);
  train::write_report_tsv(file, report);
  train::write_report_table(out, report);
  return kSuccess;
}

int cmd_predict(const std::string& model_path, const std::string& data_path,
                const std::string& slot, const std::string& out_path) {
  require_file(model_path, "--model");
  require_file(data_path, "--data");
  const Model model = load_model(model_path);
  if (!model.schema().covers(slot) && model.schema().find_label(slot) < 0)
    throw UncoveredSlotError("--slot: '" + slot + "' is not covered by the classifier");
  auto file = open_output(out_path);
  file << "id\tslot\tprobability\n";
  char buf[40];
  for (const auto& raw : data::load_dataset(data_path)) {
    const auto ex = encode(raw.tokens, raw.name, raw.filler, model.vocab(),
                           model.min_context_length());
    std::snprintf(buf, sizeof buf, "%.17g", predict_slot_probability(model, ex, slot));
    file << raw.id << '\t' << slot << '\t' << buf << '\n';
  }
  return kSuccess;
}

int cmd_gradcheck(const std::string& variant_text, std::uint64_t seed, double eps, int count,
                  std::ostream& out) {
  Variant variant;
  try {
    variant = parse_variant(variant_text);
  } catch (const VariantError& e) {
    throw ConfigError(std::string("--variant: ") + e.what());
  }
  if (count < 1) throw ConfigError("--examples must be >= 1");
  const int vocab_words = 12;
  Model model(variant, small_dims(), numbered_vocabulary(vocab_words), seed,
              variant == Variant::binary ? "per:age" : "");
  auto rng = nn::make_rng(seed, "gradcheck");
  std::vector<EncodedExample> examples;
  for (int i = 0; i < count; ++i)
    examples.push_back(random_example(model.vocab().size(), model.min_context_length(),
                                      model.schema().num_labels(), rng));
  const auto result = check_model_gradients(model, examples, 0.5, eps);
  char line[200];
  std::snprintf(line, sizeof line,
                "variant %s  entries %lld  max relative error %.3e  (worst: %s[%lld])\n",
                std::string(variant_name(variant)).c_str(),
                static_cast<long long>(result.entries_checked), result.max_rel_error,
                result.worst_param.c_str(), static_cast<long long>(result.worst_entry));
  out << line;
  if (result.max_rel_error < kGradCheckTolerance) return kSuccess;
  out << "gradient check FAILED (tolerance " << kGradCheckTolerance << ")\n";
  return kNumericError;
}

int cmd_postprocess(const std::string& scores_path, const std::string& slotspec_path,
                    const std::string& maps_dir, int hop, const std::string& out_path) {
  require_file(scores_path, "--scores");
  require_file(slotspec_path, "--slotspec");
  require_dir(maps_dir, "--maps");
  if (hop != 0 && hop != 1) throw ConfigError("--hop must be 0 or 1");
  std::ifstream scores_in(scores_path), spec_in(slotspec_path);
  const auto scores = post::parse_scores(scores_in, scores_path);
  const auto specs = post::parse_slot_specs(spec_in, slotspec_path);
  const auto maps = post::load_location_maps(maps_dir);
  auto file = open_output(out_path);
  post::postprocess(post::infer_locations(scores, maps), specs, hop, file);
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Type-aware CNN relation classification for slot filling", "slotcnn"};
  app.require_subcommand(1, 1);
  app.get_formatter()->column_width(36);

  std::string spec_path, out_dir, config_path, out_path, model_path, data_path,
      thresholds_path, slot, variant_text = "multiclass", scores_path, slotspec_path, maps_dir;
  std::uint64_t seed = 1;
  double eps = 1e-5;
  int examples = 10;
  int hop = 0;

  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic corpus from a JSON spec");
  gen->add_option("--spec", spec_path, "synthetic corpus spec (JSON)")->required();
  gen->add_option("--seed", seed, "random seed")->capture_default_str();
  gen->add_option("--out", out_dir, "output directory")->required();

  ConfigFlags train_flags, grid_flags;
  auto* trn = app.add_subcommand("train", "Train one model");
  trn->add_option("--config", config_path, "config file (key = value)");
  trn->add_option("--out", out_path, "model output path")->required();
  train_flags.attach(trn);

  auto* grid = app.add_subcommand("grid", "Grid search; list values are comma-separated");
  grid->add_option("--config", config_path, "config file (key = value)");
  grid->add_option("--out", out_path, "result table output path")->required();
  grid_flags.attach(grid);

  auto* ev = app.add_subcommand("eval", "Evaluate a model on a dataset");
  ev->add_option("--model", model_path, "model file")->required();
  ev->add_option("--data", data_path, "dataset file")->required();
  ev->add_option("--thresholds", thresholds_path, "per-slot thresholds (default 0.5 each)");
  ev->add_option("--out", out_path, "report output path (TSV)")->required();

  auto* pred = app.add_subcommand("predict", "Score every example of a dataset for one slot");
  pred->add_option("--model", model_path, "model file")->required();
  pred->add_option("--data", data_path, "dataset file")->required();
  pred->add_option("--slot", slot, "queried slot (original or merged name)")->required();
  pred->add_option("--out", out_path, "output path (TSV)")->required();

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of a fresh small model");
  gc->add_option("--variant", variant_text,
                 "binary, multiclass, multiclass+p, multiclass+j or multiclass+s")
      ->capture_default_str();
  gc->add_option("--seed", seed, "random seed")->capture_default_str();
  gc->add_option("--eps", eps, "finite-difference step")->capture_default_str();
  gc->add_option("--examples", examples, "number of random examples")->capture_default_str();

  auto* pp = app.add_subcommand("postprocess", "Select slot fillers from scored candidates");
  pp->add_option("--scores", scores_path, "scored candidates (TSV)")->required();
  pp->add_option("--slotspec", slotspec_path, "slot specs (TSV)")->required();
  pp->add_option("--maps", maps_dir, "directory with location maps")->required();
  pp->add_option("--hop", hop, "0 or 1; hop 1 raises thresholds by 0.1")->capture_default_str();
  pp->add_option("--out", out_path, "output path (TSV)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (gen->parsed()) return cmd_gen_data(spec_path, seed, out_dir, out);
    if (trn->parsed()) return cmd_train(train_flags.merged(config_path), out_path, out);
    if (grid->parsed()) return cmd_grid(grid_flags.merged(config_path), out_path, out);
    if (ev->parsed()) return cmd_eval(model_path, data_path, thresholds_path, out_path, out);
    if (pred->parsed()) return cmd_predict(model_path, data_path, slot, out_path);
    if (gc->parsed()) return cmd_gradcheck(variant_text, seed, eps, examples, out);
    if (pp->parsed()) return cmd_postprocess(scores_path, slotspec_path, maps_dir, hop, out_path);
  } catch (const NumericError& e) {
    err << "error: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}

}  // namespace slotcnn::cli
