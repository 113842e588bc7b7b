#include "slotcnn/data/vocab.hpp"

#include <fstream>
#include <sstream>

#include "slotcnn/error.hpp"

namespace slotcnn::data {

Vocabulary::Vocabulary() {
  for (auto t : {kPadToken, kUnknownToken, kNameTag, kFillerTag}) add(t);
}

int Vocabulary::add(std::string_view token) {
  auto it = ids_.find(std::string(token));
  if (it != ids_.end()) return it->second;
  const int id = size();
  tokens_.emplace_back(token);
  ids_.emplace(tokens_.back(), id);
  return id;
}

int Vocabulary::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnknownId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return ids_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw LabelError("token id " + std::to_string(id) + " out of range");
  return tokens_[static_cast<size_t>(id)];
}

EmbeddingTable load_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings file " + path);
  std::string line;
  long lineno = 1;
  if (!std::getline(in, line)) throw ParseError(path, 1, "missing 'V D' header");
  long count = 0, dim = 0;
  {
    std::istringstream header(line);
    if (!(header >> count >> dim) || count < 0 || dim <= 0)
      throw ParseError(path, 1, "expected 'V D' header");
  }
  EmbeddingTable table;
  table.vectors.resize(count, dim);
  for (long row = 0; row < count; ++row) {
    ++lineno;
    if (!std::getline(in, line))
      throw ParseError(path, lineno, "expected " + std::to_string(count) +
                                         " vectors, file ended early");
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) throw ParseError(path, lineno, "missing token");
    for (long k = 0; k < dim; ++k)
      if (!(fields >> table.vectors(row, k)))
        throw ParseError(path, lineno, "expected " + std::to_string(dim) + " reals");
    std::string extra;
    if (fields >> extra) throw ParseError(path, lineno, "too many values");
    table.tokens.push_back(std::move(token));
  }
  return table;
}

}  // namespace slotcnn::data
