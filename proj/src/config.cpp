#include "slotcnn/train/config.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "slotcnn/error.hpp"

namespace slotcnn::train {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' expects an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("'" + key + "' expects a non-negative integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError("'" + key + "' expects a number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("'" + key + "' expects true or false, got '" + v + "'");
}

void apply(RunConfig& cfg, const std::string& key, const std::string& v) {
  Hyperparams& hp = cfg.hp;
  if (key == "variant") {
    try {
      cfg.variant = parse_variant(v);
    } catch (const VariantError& e) {
      throw ConfigError(e.what());
    }
  }
  else if (key == "train") cfg.train = v;
  else if (key == "dev") cfg.dev = v;
  else if (key == "test") cfg.test = v;
  else if (key == "embeddings") cfg.embeddings = v;
  else if (key == "triggers") cfg.triggers = v;
  else if (key == "slot") cfg.slot = v;
  else if (key == "subsample") cfg.subsample = to_bool(key, v);
  else if (key == "thresholds") cfg.thresholds = v;
  else if (key == "filter_width") hp.filter_width = to_int(key, v);
  else if (key == "num_filters") hp.num_filters = to_int(key, v);
  else if (key == "hidden_rel") hp.hidden_rel = to_int(key, v);
  else if (key == "hidden_ent") hp.hidden_ent = to_int(key, v);
  else if (key == "alpha") hp.alpha = to_double(key, v);
  else if (key == "lr") hp.lr = to_double(key, v);
  else if (key == "batch") hp.batch = to_int(key, v);
  else if (key == "l2") hp.l2 = to_double(key, v);
  else if (key == "embedding_dim") hp.embedding_dim = to_int(key, v);
  else if (key == "epochs") hp.epochs = to_int(key, v);
  else if (key == "patience") hp.patience = to_int(key, v);
  else if (key == "seed") hp.seed = to_u64(key, v);
  else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

void Hyperparams::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be >= 1, got " + std::to_string(v));
  };
  positive(filter_width, "filter_width");
  positive(num_filters, "num_filters");
  positive(hidden_rel, "hidden_rel");
  positive(hidden_ent, "hidden_ent");
  positive(batch, "batch");
  positive(embedding_dim, "embedding_dim");
  positive(epochs, "epochs");
  positive(patience, "patience");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(lr >= 0.0)) throw ConfigError("lr must be >= 0");
  if (!(l2 >= 0.0)) throw ConfigError("l2 must be >= 0");
}

ModelDims Hyperparams::dims() const {
  return ModelDims{embedding_dim, filter_width, num_filters, hidden_rel, hidden_ent};
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "variant",   "train",       "dev",        "test",       "embeddings",
      "triggers",  "slot",        "subsample",  "thresholds", "filter_width",
      "num_filters", "hidden_rel", "hidden_ent", "alpha",     "lr",
      "batch",     "l2",          "embedding_dim", "epochs",  "patience",
      "seed"};
  return keys;
}

bool is_config_key(std::string_view key) {
  const auto& keys = config_keys();
  return std::find(keys.begin(), keys.end(), key) != keys.end();
}

void ConfigValues::set(std::string_view key, std::string_view value) {
  if (!is_config_key(key)) throw ConfigError("unknown config key '" + std::string(key) + "'");
  std::vector<std::string> items;
  std::string_view rest = value;
  while (true) {
    const auto comma = rest.find(',');
    items.push_back(trim(rest.substr(0, comma)));
    if (items.back().empty())
      throw ConfigError("empty value for config key '" + std::string(key) + "'");
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  entries_[std::string(key)] = std::move(items);
}

bool ConfigValues::contains(std::string_view key) const {
  return entries_.find(key) != entries_.end();
}

const std::vector<std::string>& ConfigValues::values(std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("config key '" + std::string(key) + "' not set");
  return it->second;
}

ConfigValues parse_config(std::istream& in, const std::string& source) {
  ConfigValues values;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ParseError(source, lineno, "expected 'key = value'");
    try {
      values.set(trim(std::string_view(text).substr(0, eq)),
                 trim(std::string_view(text).substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return values;
}

ConfigValues load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  ConfigValues values = parse_config(in, path);
  const std::filesystem::path base = std::filesystem::path(path).parent_path();
  for (const char* key : {"train", "dev", "test", "embeddings", "triggers", "thresholds"}) {
    if (!values.contains(key)) continue;
    std::vector<std::string> resolved;
    for (const auto& v : values.values(key)) {
      const std::filesystem::path p(v);
      resolved.push_back(p.is_absolute() ? v : (base / p).lexically_normal().string());
    }
    std::string joined;
    for (const auto& r : resolved) joined += (joined.empty() ? "" : ",") + r;
    values.set(key, joined);
  }
  return values;
}

RunConfig to_run_config(const ConfigValues& values) {
  RunConfig cfg;
  for (const auto& [key, items] : values.entries()) {
    if (items.size() != 1)
      throw ConfigError("config key '" + key + "' holds a list; only grid accepts lists");
    apply(cfg, key, items.front());
  }
  cfg.hp.validate();
  return cfg;
}

std::vector<RunConfig> expand_grid(const ConfigValues& values) {
  std::vector<std::pair<std::string, const std::vector<std::string>*>> axes;
  for (const auto& key : config_keys())
    if (values.contains(key)) axes.emplace_back(key, &values.values(key));
  std::vector<RunConfig> out;
  std::vector<size_t> pos(axes.size(), 0);
  while (true) {
    RunConfig cfg;
    for (size_t a = 0; a < axes.size(); ++a) apply(cfg, axes[a].first, (*axes[a].second)[pos[a]]);
    cfg.hp.validate();
    out.push_back(std::move(cfg));
    size_t a = axes.size();
    while (a > 0) {
      --a;
      if (++pos[a] < axes[a].second->size()) break;
      pos[a] = 0;
      if (a == 0) return out;
    }
    if (axes.empty()) return out;
  }
}

std::string describe(const Hyperparams& hp) {
  std::ostringstream out;
  out.precision(17);
  out << "filter_width = " << hp.filter_width << "\nnum_filters = " << hp.num_filters
      << "\nhidden_rel = " << hp.hidden_rel << "\nhidden_ent = " << hp.hidden_ent
      << "\nalpha = " << hp.alpha << "\nlr = " << hp.lr << "\nbatch = " << hp.batch
      << "\nl2 = " << hp.l2 << "\nembedding_dim = " << hp.embedding_dim
      << "\nepochs = " << hp.epochs << "\npatience = " << hp.patience << "\nseed = " << hp.seed
      << '\n';
  return out.str();
}

}  // namespace slotcnn::train
