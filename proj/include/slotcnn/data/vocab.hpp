#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "slotcnn/nn/tensor.hpp"

namespace slotcnn::data {

inline constexpr int kPadId = 0;
inline constexpr int kUnknownId = 1;
inline constexpr int kNameTagId = 2;
inline constexpr int kFillerTagId = 3;

inline constexpr std::string_view kPadToken = "<pad>";
inline constexpr std::string_view kUnknownToken = "<unk>";
inline constexpr std::string_view kNameTag = "<name>";
inline constexpr std::string_view kFillerTag = "<filler>";

/// token -> id map whose first four ids are always pad, unknown, <name>
/// and <filler>.
class Vocabulary {
 public:
  Vocabulary();

  /// Returns the id of `token`, adding it if new.
  int add(std::string_view token);
  /// Unknown tokens map to kUnknownId.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.tokens_ == b.tokens_;
  }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> ids_;
};

/// Pre-trained vectors read from a "V D" text file.
struct EmbeddingTable {
  std::vector<std::string> tokens;
  nn::Matrix vectors;  // tokens.size() x D

  int dim() const { return static_cast<int>(vectors.cols()); }
};

EmbeddingTable load_embeddings(const std::string& path);

}  // namespace slotcnn::data
