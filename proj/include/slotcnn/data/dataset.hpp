#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace slotcnn::data {

/// Half-open token range [begin, end).
struct Span {
  int begin = 0;
  int end = 0;
  int size() const { return end - begin; }
  friend bool operator==(const Span&, const Span&) = default;
};

/// One line of a dataset file.
///
/// `slot` is an original slot name, "N" for the artificial negative class,
/// or "NEG" / "NEG:<slot>" for distantly supervised negatives (the suffix
/// names the slot the negative was extracted for).
struct RawExample {
  std::string id;
  std::string slot;
  int type1 = -1;  // entity type of the query entity, -1 unknown
  int type2 = -1;  // entity type of the filler, -1 unknown
  Span name;
  Span filler;
  bool name_first = true;
  std::vector<std::string> tokens;
};

bool is_negative_slot(std::string_view slot);
/// "per:age" for "NEG:per:age"; empty for plain NEG / N.
std::string negative_target(std::string_view slot);

/// Tab-separated, 8 fields per line; lines starting with '#' are headers.
std::vector<RawExample> parse_dataset(std::istream& in, const std::string& source);
std::vector<RawExample> load_dataset(const std::string& path);

void write_dataset(std::ostream& out, const std::vector<RawExample>& examples);
void save_dataset(const std::string& path, const std::vector<RawExample>& examples);

/// Throws SpanError for empty, out-of-range or overlapping spans.
void validate_spans(const Span& name, const Span& filler, int num_tokens);

}  // namespace slotcnn::data
