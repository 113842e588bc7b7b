#include "slotcnn/data/synthetic.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "slotcnn/error.hpp"
#include "slotcnn/nn/params.hpp"
#include "slotcnn/rel/schema.hpp"

namespace slotcnn::data {

namespace {

using json = nlohmann::json;

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

int type_field(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("slot entry lacks '") + key + "'");
  try {
    return parse_entity_type(j.at(key).get<std::string>());
  } catch (const LabelError& e) {
    throw ConfigError(e.what());
  }
}

void check_template(const std::string& text) {
  int names = 0, fillers = 0;
  for (const auto& w : split_words(text)) {
    names += w == "{name}";
    fillers += w == "{filler}";
  }
  if (names != 1 || fillers != 1)
    throw ConfigError("template must contain {name} and {filler} exactly once: '" + text + "'");
}

template <class T>
const T& pick(const std::vector<T>& items, std::mt19937_64& rng) {
  std::uniform_int_distribution<size_t> dist(0, items.size() - 1);
  return items[dist(rng)];
}

std::vector<std::string> pick_noise(const SyntheticSpec& spec, std::mt19937_64& rng) {
  std::vector<std::string> out;
  if (spec.noise.empty() || spec.max_noise <= 0) return out;
  std::uniform_int_distribution<int> count(0, spec.max_noise);
  const int n = count(rng);
  for (int i = 0; i < n; ++i) out.push_back(pick(spec.noise, rng));
  return out;
}

/// A sentence skeleton shared by lockstep twins.
struct Skeleton {
  std::vector<std::string> prefix;
  std::vector<std::string> words;  // template words with placeholders
  std::vector<std::string> suffix;
};

RawExample realize(const Skeleton& sk, const std::string& id, const std::string& slot,
                   int name_type, int filler_type, const std::string& name,
                   const std::string& filler) {
  RawExample ex;
  ex.id = id;
  ex.slot = slot;
  ex.type1 = name_type;
  ex.type2 = filler_type;
  ex.tokens = sk.prefix;
  for (const auto& w : sk.words) {
    if (w == "{name}" || w == "{filler}") {
      const bool is_name = w == "{name}";
      const auto arg = split_words(is_name ? name : filler);
      Span span{static_cast<int>(ex.tokens.size()),
                static_cast<int>(ex.tokens.size() + arg.size())};
      (is_name ? ex.name : ex.filler) = span;
      ex.tokens.insert(ex.tokens.end(), arg.begin(), arg.end());
    } else {
      ex.tokens.push_back(w);
    }
  }
  ex.tokens.insert(ex.tokens.end(), sk.suffix.begin(), sk.suffix.end());
  ex.name_first = ex.name.begin < ex.filler.begin;
  return ex;
}

class Generator {
 public:
  Generator(const SyntheticSpec& spec, std::uint64_t seed)
      : spec_(spec), rng_(nn::make_rng(seed, "synth")) {
    index_slots();
    build_units();
  }

  std::vector<RawExample> split(const std::string& name, int count) {
    std::vector<RawExample> out;
    if (count <= 0) return out;
    const int negatives = static_cast<int>(std::lround(count * spec_.negative_fraction));
    const int positives = count - negatives;
    int produced = 0;
    size_t unit = 0;
    while (produced < positives && !units_.empty()) {
      const auto& members = units_[unit++ % units_.size()];
      const SyntheticSlot& lead = spec_.slots[members.front()];
      const Skeleton sk{pick_noise(spec_, rng_), split_words(pick(lead.templates, rng_)),
                        pick_noise(spec_, rng_)};
      for (size_t m : members) {
        if (produced == positives) break;
        const SyntheticSlot& s = spec_.slots[m];
        out.push_back(realize(sk, name + "-" + std::to_string(out.size()), s.slot, s.name_type,
                              s.filler_type, entity(s.name_type), entity(s.filler_type)));
        ++produced;
      }
    }
    for (int i = 0; i < negatives; ++i) {
      const SyntheticSlot& s = pick(spec_.slots, rng_);
      const Skeleton sk{pick_noise(spec_, rng_),
                        split_words(pick(spec_.negative_templates, rng_)),
                        pick_noise(spec_, rng_)};
      out.push_back(realize(sk, name + "-" + std::to_string(out.size()), "NEG", s.name_type,
                            s.filler_type, entity(s.name_type), entity(s.filler_type)));
    }
    return out;
  }

  TriggerList triggers() const {
    TriggerList list;
    for (const auto& s : spec_.slots)
      for (const auto& t : s.triggers) list.add(s.slot, t);
    // Twins are written from their partner's templates.
    for (const auto& [a, b] : spec_.ambiguous_pairs)
      for (const auto& t : spec_.slots[slot_index_.at(a)].triggers) list.add(b, t);
    return list;
  }

 private:
  void index_slots() {
    if (spec_.slots.empty()) throw ConfigError("synthetic spec lists no slots");
    for (size_t i = 0; i < spec_.slots.size(); ++i) {
      const auto& s = spec_.slots[i];
      if (!slot_index_.emplace(s.slot, i).second)
        throw ConfigError("slot '" + s.slot + "' listed twice in synthetic spec");
      for (int t : {s.name_type, s.filler_type})
        if (t < 0 || spec_.lexicon.count(t) == 0 || spec_.lexicon.at(t).empty())
          throw ConfigError("no lexicon entries for the argument types of " + s.slot);
      for (const auto& t : s.templates) check_template(t);
    }
    for (const auto& t : spec_.negative_templates) check_template(t);
    if (spec_.negative_fraction < 0.0 || spec_.negative_fraction > 1.0)
      throw ConfigError("negative_fraction must lie in [0, 1]");
    if (spec_.negative_fraction > 0.0 && spec_.negative_templates.empty())
      throw ConfigError("negative_fraction > 0 needs negative_templates");
  }

  void build_units() {
    std::vector<bool> paired(spec_.slots.size(), false);
    std::vector<std::vector<size_t>> pair_units;
    for (const auto& [a, b] : spec_.ambiguous_pairs) {
      auto ia = slot_index_.find(a), ib = slot_index_.find(b);
      if (ia == slot_index_.end() || ib == slot_index_.end() || a == b)
        throw ConfigError("ambiguous mode needs two distinct listed slots, got '" + a +
                          "' and '" + b + "'");
      const auto& sa = spec_.slots[ia->second];
      const auto& sb = spec_.slots[ib->second];
      if (sa.name_type == sb.name_type && sa.filler_type == sb.filler_type)
        throw ConfigError("ambiguous pair " + a + " / " + b +
                          " has identical argument types; at least two type-contrasting "
                          "slots are required");
      if (paired[ia->second] || paired[ib->second])
        throw ConfigError("slot appears in more than one ambiguous pair");
      paired[ia->second] = paired[ib->second] = true;
      pair_units.push_back({ia->second, ib->second});
    }
    size_t next_pair = 0;
    for (size_t i = 0; i < spec_.slots.size(); ++i) {
      if (!paired[i]) {
        if (spec_.slots[i].templates.empty())
          throw ConfigError("slot " + spec_.slots[i].slot + " has no templates");
        units_.push_back({i});
      } else if (next_pair < pair_units.size() && pair_units[next_pair].front() == i) {
        units_.push_back(pair_units[next_pair++]);
      }
    }
    // Pairs whose lead slot is listed after its twin.
    for (; next_pair < pair_units.size(); ++next_pair) units_.push_back(pair_units[next_pair]);
    for (const auto& u : units_)
      if (spec_.slots[u.front()].templates.empty())
        throw ConfigError("slot " + spec_.slots[u.front()].slot + " has no templates");
  }

  std::string entity(int type) { return pick(spec_.lexicon.at(type), rng_); }

  const SyntheticSpec& spec_;
  std::mt19937_64 rng_;
  std::map<std::string, size_t> slot_index_;
  std::vector<std::vector<size_t>> units_;
};

}  // namespace

SyntheticSpec parse_synthetic_spec(const std::string& json_text) {
  SyntheticSpec spec;
  try {
    const json j = json::parse(json_text);
    for (const auto& s : j.at("slots")) {
      SyntheticSlot slot;
      slot.slot = s.at("slot").get<std::string>();
      slot.name_type = type_field(s, "name_type");
      slot.filler_type = type_field(s, "filler_type");
      slot.templates = s.value("templates", std::vector<std::string>{});
      slot.triggers = s.value("triggers", std::vector<std::string>{});
      spec.slots.push_back(std::move(slot));
    }
    spec.negative_templates = j.value("negative_templates", std::vector<std::string>{});
    for (const auto& [type, words] : j.at("lexicon").items()) {
      int t = kUnknownType;
      try {
        t = parse_entity_type(type);
      } catch (const LabelError& e) {
        throw ConfigError(e.what());
      }
      spec.lexicon[t] = words.get<std::vector<std::string>>();
    }
    spec.noise = j.value("noise", std::vector<std::string>{});
    spec.max_noise = j.value("max_noise", 2);
    if (j.contains("counts")) {
      const auto& c = j.at("counts");
      spec.train = c.value("train", 0);
      spec.dev = c.value("dev", 0);
      spec.test = c.value("test", 0);
    }
    spec.negative_fraction = j.value("negative_fraction", 0.0);
    if (j.contains("ambiguous_pairs"))
      for (const auto& p : j.at("ambiguous_pairs")) {
        if (!p.is_array() || p.size() != 2)
          throw ConfigError("each ambiguous pair must list exactly two slots");
        spec.ambiguous_pairs.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
      }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed synthetic spec: ") + e.what());
  }
  if (spec.train < 0 || spec.dev < 0 || spec.test < 0)
    throw ConfigError("synthetic counts must be non-negative");
  return spec;
}

SyntheticSpec load_synthetic_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open synthetic spec " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_synthetic_spec(text.str());
}

SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
  Generator gen(spec, seed);
  SyntheticCorpus corpus;
  corpus.train = gen.split("train", spec.train);
  corpus.dev = gen.split("dev", spec.dev);
  corpus.test = gen.split("test", spec.test);
  corpus.triggers = gen.triggers();
  return corpus;
}

void write_synthetic(const SyntheticCorpus& corpus, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  const std::filesystem::path root(dir);
  save_dataset((root / "train.tsv").string(), corpus.train);
  save_dataset((root / "dev.tsv").string(), corpus.dev);
  save_dataset((root / "test.tsv").string(), corpus.test);
  std::ofstream out(root / "triggers.tsv");
  if (!out) throw IoError("cannot write " + (root / "triggers.tsv").string());
  write_triggers(out, corpus.triggers);
}

}  // namespace slotcnn::data
