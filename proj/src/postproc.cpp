#include "slotcnn/post/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <tuple>

#include "slotcnn/data/triggers.hpp"
#include "slotcnn/error.hpp"

namespace slotcnn::post {

using data::case_fold;

void SlotSpec::validate() const {
  if (top_n < 1) throw ConfigError("top_n of " + slot + " must be >= 1");
  if (!(base_threshold >= 0.0 && base_threshold <= 1.0))
    throw ConfigError("threshold of " + slot + " must lie in [0, 1]");
}

std::vector<FillerCandidate> select_fillers(std::vector<FillerCandidate> candidates,
                                            const SlotSpec& spec, int hop) {
  if (hop != 0 && hop != 1) throw ConfigError("hop must be 0 or 1");
  const double threshold = spec.base_threshold + (hop == 1 ? kHopThresholdIncrease : 0.0);
  std::erase_if(candidates, [&](const FillerCandidate& c) { return c.score < threshold; });
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const FillerCandidate& a, const FillerCandidate& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.filler < b.filler;
                   });
  const size_t keep = spec.valued == Valued::single ? 1 : static_cast<size_t>(spec.top_n);
  if (candidates.size() > keep) candidates.resize(keep);
  return candidates;
}

std::string_view category_name(LocationCategory c) {
  switch (c) {
    case LocationCategory::city: return "city";
    case LocationCategory::state: return "state";
    case LocationCategory::country: return "country";
    case LocationCategory::unknown: return "unknown";
  }
  return "unknown";
}

LocationCategory parse_category(std::string_view name) {
  for (auto c : {LocationCategory::city, LocationCategory::state, LocationCategory::country})
    if (category_name(c) == name) return c;
  throw ConfigError("unknown location category '" + std::string(name) + "'");
}

void LocationMaps::add_city(std::string_view name) { cities_.insert(case_fold(name)); }
void LocationMaps::add_state(std::string_view name) { states_.insert(case_fold(name)); }
void LocationMaps::add_country(std::string_view name) { countries_.insert(case_fold(name)); }

void LocationMaps::map_city_state(std::string_view city, std::string_view state) {
  city_state_[case_fold(city)] = std::string(state);
}
void LocationMaps::map_city_country(std::string_view city, std::string_view country) {
  city_country_[case_fold(city)] = std::string(country);
}
void LocationMaps::map_state_country(std::string_view state, std::string_view country) {
  state_country_[case_fold(state)] = std::string(country);
}

bool LocationMaps::is_city(std::string_view name) const { return cities_.count(case_fold(name)); }
bool LocationMaps::is_state(std::string_view name) const { return states_.count(case_fold(name)); }
bool LocationMaps::is_country(std::string_view name) const {
  return countries_.count(case_fold(name));
}

namespace {

std::optional<std::string> lookup(const std::map<std::string, std::string, std::less<>>& m,
                                  std::string_view key) {
  auto it = m.find(case_fold(key));
  if (it == m.end()) return std::nullopt;
  return it->second;
}

}  // namespace

std::optional<std::string> LocationMaps::state_of_city(std::string_view city) const {
  return lookup(city_state_, city);
}
std::optional<std::string> LocationMaps::country_of_city(std::string_view city) const {
  return lookup(city_country_, city);
}
std::optional<std::string> LocationMaps::country_of_state(std::string_view state) const {
  return lookup(state_country_, state);
}

std::vector<std::string> LocationMaps::inconsistencies() const {
  std::vector<std::string> out;
  for (const auto& [city, country] : city_country_) {
    auto state = lookup(city_state_, city);
    if (!state) continue;
    auto via_state = lookup(state_country_, *state);
    if (via_state && case_fold(*via_state) != case_fold(country)) out.push_back(city);
  }
  return out;
}

namespace {

template <class F>
void read_lines(const std::filesystem::path& path, F&& on_line) {
  std::ifstream in(path);
  if (!in) return;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    on_line(line, lineno);
  }
}

template <class F>
void read_pairs(const std::filesystem::path& path, F&& on_pair) {
  read_lines(path, [&](const std::string& line, long lineno) {
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size())
      throw ParseError(path.string(), lineno, "expected 'child<TAB>parent'");
    on_pair(line.substr(0, tab), line.substr(tab + 1));
  });
}

}  // namespace

LocationMaps load_location_maps(const std::string& dir) {
  const std::filesystem::path root(dir);
  if (!std::filesystem::is_directory(root)) throw IoError("location map directory " + dir + " not found");
  LocationMaps maps;
  read_lines(root / "cities.txt", [&](const std::string& l, long) { maps.add_city(l); });
  read_lines(root / "states.txt", [&](const std::string& l, long) { maps.add_state(l); });
  read_lines(root / "countries.txt", [&](const std::string& l, long) { maps.add_country(l); });
  read_pairs(root / "city_state.tsv",
             [&](const std::string& c, const std::string& p) { maps.map_city_state(c, p); });
  read_pairs(root / "city_country.tsv",
             [&](const std::string& c, const std::string& p) { maps.map_city_country(c, p); });
  read_pairs(root / "state_country.tsv",
             [&](const std::string& c, const std::string& p) { maps.map_state_country(c, p); });
  const auto bad = maps.inconsistencies();
  if (!bad.empty())
    throw ConfigError("city-to-country map disagrees with city-to-state-to-country for '" +
                      bad.front() + "'");
  return maps;
}

LocationCategory disambiguate_location(std::string_view loc, const LocationMaps& maps) {
  if (maps.is_city(loc)) return LocationCategory::city;
  if (maps.is_state(loc)) return LocationCategory::state;
  if (maps.is_country(loc)) return LocationCategory::country;
  return LocationCategory::unknown;
}

std::optional<std::string> infer_location(std::string_view loc, LocationCategory target,
                                          const LocationMaps& maps) {
  const LocationCategory category = disambiguate_location(loc, maps);
  if (category == LocationCategory::unknown || target == LocationCategory::unknown)
    return std::nullopt;
  if (category == target) return std::string(loc);
  if (category == LocationCategory::city && target == LocationCategory::state)
    return maps.state_of_city(loc);
  if (category == LocationCategory::city && target == LocationCategory::country) {
    if (auto country = maps.country_of_city(loc)) return country;
    if (auto state = maps.state_of_city(loc)) return maps.country_of_state(*state);
    return std::nullopt;
  }
  if (category == LocationCategory::state && target == LocationCategory::country)
    return maps.country_of_state(loc);
  return std::nullopt;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

double parse_unit(const std::string& text, const std::string& source, long lineno,
                  const char* what) {
  double v = 0.0;
  try {
    size_t used = 0;
    v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(what);
  } catch (const std::exception&) {
    throw ParseError(source, lineno, std::string(what) + " is not a number");
  }
  if (!(v >= 0.0 && v <= 1.0)) throw ParseError(source, lineno, std::string(what) + " must lie in [0, 1]");
  return v;
}

}  // namespace

std::vector<ScoredFiller> parse_scores(std::istream& in, const std::string& source) {
  std::vector<ScoredFiller> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto f = split_tabs(line);
    if (f.size() != 5) throw ParseError(source, lineno, "expected 5 tab-separated fields");
    out.push_back({f[0], f[1], {f[2], parse_unit(f[3], source, lineno, "score"), f[4]}});
  }
  return out;
}

std::map<std::string, SlotSpec> parse_slot_specs(std::istream& in, const std::string& source) {
  std::map<std::string, SlotSpec> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto f = split_tabs(line);
    if (f.size() != 4) throw ParseError(source, lineno, "expected slot, single|list, top_n, threshold");
    SlotSpec spec;
    spec.slot = f[0];
    if (f[1] == "single") spec.valued = Valued::single;
    else if (f[1] == "list") spec.valued = Valued::list;
    else throw ParseError(source, lineno, "expected 'single' or 'list'");
    try {
      size_t used = 0;
      spec.top_n = std::stoi(f[2], &used);
      if (used != f[2].size()) throw std::invalid_argument("top_n");
    } catch (const std::exception&) {
      throw ParseError(source, lineno, "top_n is not an integer");
    }
    spec.base_threshold = parse_unit(f[3], source, lineno, "threshold");
    try {
      spec.validate();
    } catch (const ConfigError& e) {
      throw ParseError(source, lineno, e.what());
    }
    out[spec.slot] = spec;
  }
  return out;
}

void postprocess(const std::vector<ScoredFiller>& scores,
                 const std::map<std::string, SlotSpec>& specs, int hop, std::ostream& out) {
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<FillerCandidate>> groups;
  for (const auto& s : scores) {
    auto key = std::make_pair(s.query, s.slot);
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) keys.push_back(key);
    it->second.push_back(s.candidate);
  }
  char buf[32];
  for (const auto& key : keys) {
    SlotSpec spec;
    spec.slot = key.second;
    if (auto it = specs.find(key.second); it != specs.end()) spec = it->second;
    for (const auto& c : select_fillers(groups[key], spec, hop)) {
      std::snprintf(buf, sizeof buf, "%.6f", c.score);
      out << key.first << '\t' << key.second << '\t' << c.filler << '\t' << buf << '\t'
          << c.sentence_id << '\n';
    }
  }
}

std::optional<LocationCategory> slot_location_granularity(std::string_view slot) {
  const auto colon = slot.find(':');
  const std::string_view rel = colon == std::string_view::npos ? slot : slot.substr(colon + 1);
  if (rel.find("city") != std::string_view::npos || rel.find("cities") != std::string_view::npos)
    return LocationCategory::city;
  if (rel.find("stateorprovince") != std::string_view::npos ||
      rel.find("statesorprovinces") != std::string_view::npos)
    return LocationCategory::state;
  if (rel.find("country") != std::string_view::npos ||
      rel.find("countries") != std::string_view::npos)
    return LocationCategory::country;
  return std::nullopt;
}

std::vector<ScoredFiller> infer_locations(const std::vector<ScoredFiller>& scores,
                                          const LocationMaps& maps) {
  std::vector<ScoredFiller> out;
  std::map<std::tuple<std::string, std::string, std::string>, size_t> seen;
  for (const auto& s : scores) {
    ScoredFiller row = s;
    if (auto target = slot_location_granularity(s.slot)) {
      auto inferred = infer_location(s.candidate.filler, *target, maps);
      if (!inferred) continue;
      row.candidate.filler = *inferred;
    }
    auto key = std::make_tuple(row.query, row.slot, row.candidate.filler);
    auto [it, inserted] = seen.try_emplace(key, out.size());
    if (inserted)
      out.push_back(std::move(row));
    else if (row.candidate.score > out[it->second].candidate.score)
      out[it->second] = std::move(row);
  }
  return out;
}

}  // namespace slotcnn::post
