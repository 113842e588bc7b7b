#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace slotcnn::data {

using Pattern = std::vector<std::string>;

/// Per-slot trigger patterns: case-folded token sequences matched as
/// contiguous subsequences of the (case-folded) sentence.
class TriggerList {
 public:
  void add(const std::string& slot, std::string_view pattern_text);

  using Map = std::map<std::string, std::vector<Pattern>, std::less<>>;

  const Map& patterns() const { return patterns_; }
  bool has_slot(std::string_view slot) const;

  /// True if any pattern of `slot` occurs in `tokens`.
  bool matches(std::string_view slot, const std::vector<std::string>& tokens) const;
  /// True if any pattern of any slot occurs in `tokens`.
  bool matches_any(const std::vector<std::string>& tokens) const;

 private:
  Map patterns_;
};

std::string case_fold(std::string_view s);

/// Contiguous token-subsequence containment after case folding.
bool contains_pattern(const std::vector<std::string>& tokens, const Pattern& pattern);

/// "slot<TAB>pattern tokens" per line; '#' lines are comments.
TriggerList parse_triggers(std::istream& in, const std::string& source);
TriggerList load_triggers(const std::string& path);
void write_triggers(std::ostream& out, const TriggerList& triggers);

}  // namespace slotcnn::data
