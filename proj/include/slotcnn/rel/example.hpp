#pragma once

#include <string>
#include <vector>

#include "slotcnn/data/dataset.hpp"
#include "slotcnn/data/vocab.hpp"
#include "slotcnn/rel/schema.hpp"

namespace slotcnn {

/// One classification instance after tag substitution and context split.
///
/// left   = tokens before the first argument, then its tag
/// middle = first tag, tokens between the arguments, second tag
/// right  = second tag, then the remaining tokens
///
/// Each context is padded with kPadId to the model's minimum length.
struct EncodedExample {
  std::string id;
  std::vector<int> left;
  std::vector<int> middle;
  std::vector<int> right;
  /// 1 iff the query entity (<name>) precedes the filler.
  int order_flag = 1;
  /// Merged label index (SlotSchema::negative_label() for N); -1 unlabeled.
  int gold = -1;
  /// The gold relation holds with <name> and <filler> swapped.
  bool gold_inverse = false;
  /// Entity types of the query entity and the filler, kUnknownType if unknown.
  int type1 = kUnknownType;
  int type2 = kUnknownType;

  friend bool operator==(const EncodedExample&, const EncodedExample&) = default;

  /// Type of the argument that appears first / second in the sentence.
  int first_type() const { return order_flag ? type1 : type2; }
  int second_type() const { return order_flag ? type2 : type1; }
};

/// Replaces both arguments by their tags and splits the sentence. Unknown
/// tokens map to kUnknownId. Throws SpanError for invalid spans.
EncodedExample encode(const std::vector<std::string>& tokens, const data::Span& name,
                      const data::Span& filler, const data::Vocabulary& vocab,
                      int min_context_length);

/// Swaps the <name> and <filler> tags, flips the order flag and the
/// argument types. Applying it twice is the identity.
EncodedExample reverse_arguments(const EncodedExample& ex);

/// Reverses inverse-orientation examples so the gold label reads in its
/// canonical direction.
EncodedExample to_canonical(const EncodedExample& ex);

/// encode() plus gold label lookup; inverse slots are converted to their
/// canonical label on the reversed example. Negatives ("N", "NEG",
/// "NEG:<slot>") map to the N label.
EncodedExample encode_example(const data::RawExample& raw, const data::Vocabulary& vocab,
                              const SlotSchema& schema, int min_context_length);

std::vector<EncodedExample> encode_all(const std::vector<data::RawExample>& raws,
                                       const data::Vocabulary& vocab,
                                       const SlotSchema& schema, int min_context_length);

}  // namespace slotcnn
