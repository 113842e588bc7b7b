#include "slotcnn/data/triggers.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "slotcnn/error.hpp"

namespace slotcnn::data {

std::string case_fold(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

bool contains_pattern(const std::vector<std::string>& tokens, const Pattern& pattern) {
  if (pattern.empty() || pattern.size() > tokens.size()) return false;
  Pattern folded;
  for (const auto& t : pattern) folded.push_back(case_fold(t));
  for (size_t start = 0; start + pattern.size() <= tokens.size(); ++start) {
    bool hit = true;
    for (size_t j = 0; j < pattern.size() && hit; ++j)
      hit = case_fold(tokens[start + j]) == folded[j];
    if (hit) return true;
  }
  return false;
}

void TriggerList::add(const std::string& slot, std::string_view pattern_text) {
  Pattern pattern;
  std::istringstream in{std::string(pattern_text)};
  for (std::string tok; in >> tok;) pattern.push_back(case_fold(tok));
  if (pattern.empty()) throw ConfigError("empty trigger pattern for slot " + slot);
  patterns_[slot].push_back(std::move(pattern));
}

bool TriggerList::has_slot(std::string_view slot) const {
  return patterns_.find(slot) != patterns_.end();
}

bool TriggerList::matches(std::string_view slot, const std::vector<std::string>& tokens) const {
  auto it = patterns_.find(slot);
  if (it == patterns_.end()) return false;
  return std::any_of(it->second.begin(), it->second.end(),
                     [&](const Pattern& p) { return contains_pattern(tokens, p); });
}

bool TriggerList::matches_any(const std::vector<std::string>& tokens) const {
  for (const auto& [slot, pats] : patterns_)
    for (const auto& p : pats)
      if (contains_pattern(tokens, p)) return true;
  return false;
}

TriggerList parse_triggers(std::istream& in, const std::string& source) {
  TriggerList triggers;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw ParseError(source, lineno, "expected 'slot<TAB>pattern'");
    try {
      triggers.add(line.substr(0, tab), line.substr(tab + 1));
    } catch (const ConfigError& e) {
      throw ParseError(source, lineno, e.what());
    }
  }
  return triggers;
}

TriggerList load_triggers(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trigger file " + path);
  return parse_triggers(in, path);
}

void write_triggers(std::ostream& out, const TriggerList& triggers) {
  for (const auto& [slot, pats] : triggers.patterns())
    for (const auto& p : pats) {
      out << slot << '\t';
      for (size_t i = 0; i < p.size(); ++i) out << (i ? " " : "") << p[i];
      out << '\n';
    }
}

}  // namespace slotcnn::data
