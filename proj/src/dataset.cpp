#include "slotcnn/data/dataset.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "slotcnn/error.hpp"
#include "slotcnn/rel/schema.hpp"

namespace slotcnn::data {

namespace {

constexpr std::string_view kHeader =
    "#id\tslot\ttype1\ttype2\tname\tfiller\torder\ttokens";

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int parse_int(std::string_view s, bool& ok) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  ok = ec == std::errc() && ptr == s.data() + s.size();
  return v;
}

Span parse_span(std::string_view field, const std::string& source, long line) {
  const auto colon = field.find(':');
  if (colon == std::string_view::npos)
    throw ParseError(source, line, "span '" + std::string(field) + "' is not start:end");
  bool ok1 = false, ok2 = false;
  Span s{parse_int(field.substr(0, colon), ok1), parse_int(field.substr(colon + 1), ok2)};
  if (!ok1 || !ok2)
    throw ParseError(source, line, "span '" + std::string(field) + "' is not start:end");
  return s;
}

}  // namespace

bool is_negative_slot(std::string_view slot) {
  return slot == "N" || slot == "NEG" || slot.starts_with("NEG:");
}

std::string negative_target(std::string_view slot) {
  if (slot.starts_with("NEG:")) return std::string(slot.substr(4));
  return {};
}

void validate_spans(const Span& name, const Span& filler, int num_tokens) {
  auto check = [&](const Span& s, const char* what) {
    if (s.begin < 0 || s.end > num_tokens || s.begin >= s.end)
      throw SpanError(std::string(what) + " span " + std::to_string(s.begin) + ":" +
                      std::to_string(s.end) + " invalid for " +
                      std::to_string(num_tokens) + " tokens");
  };
  check(name, "name");
  check(filler, "filler");
  if (name.begin < filler.end && filler.begin < name.end)
    throw SpanError("name span " + std::to_string(name.begin) + ":" +
                    std::to_string(name.end) + " overlaps filler span " +
                    std::to_string(filler.begin) + ":" + std::to_string(filler.end));
}

std::vector<RawExample> parse_dataset(std::istream& in, const std::string& source) {
  std::vector<RawExample> out;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split(line, '\t');
    if (fields.size() != 8)
      throw ParseError(source, lineno,
                       "expected 8 tab-separated fields, found " +
                           std::to_string(fields.size()));
    RawExample ex;
    ex.id = fields[0];
    ex.slot = fields[1];
    if (ex.id.empty()) throw ParseError(source, lineno, "empty id");
    if (ex.slot.empty()) throw ParseError(source, lineno, "empty slot");
    try {
      ex.type1 = parse_entity_type(fields[2]);
      ex.type2 = parse_entity_type(fields[3]);
    } catch (const LabelError& e) {
      throw ParseError(source, lineno, e.what());
    }
    ex.name = parse_span(fields[4], source, lineno);
    ex.filler = parse_span(fields[5], source, lineno);
    if (fields[6] == "NAME_FIRST") {
      ex.name_first = true;
    } else if (fields[6] == "FILLER_FIRST") {
      ex.name_first = false;
    } else {
      throw ParseError(source, lineno,
                       "order field must be NAME_FIRST or FILLER_FIRST, got '" +
                           std::string(fields[6]) + "'");
    }
    std::istringstream tokens{std::string(fields[7])};
    for (std::string tok; tokens >> tok;) ex.tokens.push_back(std::move(tok));
    try {
      validate_spans(ex.name, ex.filler, static_cast<int>(ex.tokens.size()));
    } catch (const SpanError& e) {
      throw SpanError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
    if (ex.name_first != (ex.name.begin < ex.filler.begin))
      throw ParseError(source, lineno, "order field disagrees with the spans");
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<RawExample> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path);
  return parse_dataset(in, path);
}

void write_dataset(std::ostream& out, const std::vector<RawExample>& examples) {
  out << kHeader << '\n';
  for (const auto& ex : examples) {
    out << ex.id << '\t' << ex.slot << '\t' << entity_type_name(ex.type1) << '\t'
        << entity_type_name(ex.type2) << '\t' << ex.name.begin << ':' << ex.name.end
        << '\t' << ex.filler.begin << ':' << ex.filler.end << '\t'
        << (ex.name_first ? "NAME_FIRST" : "FILLER_FIRST") << '\t';
    for (size_t i = 0; i < ex.tokens.size(); ++i)
      out << (i ? " " : "") << ex.tokens[i];
    out << '\n';
  }
}

void save_dataset(const std::string& path, const std::vector<RawExample>& examples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset " + path);
  write_dataset(out, examples);
}

}  // namespace slotcnn::data
