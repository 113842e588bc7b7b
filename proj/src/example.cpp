#include "slotcnn/rel/example.hpp"

#include <algorithm>

#include "slotcnn/error.hpp"

namespace slotcnn {

namespace {

void pad_to(std::vector<int>& ctx, int min_length) {
  if (static_cast<int>(ctx.size()) < min_length)
    ctx.resize(static_cast<size_t>(min_length), data::kPadId);
}

int swap_tag(int id) {
  if (id == data::kNameTagId) return data::kFillerTagId;
  if (id == data::kFillerTagId) return data::kNameTagId;
  return id;
}

}  // namespace

EncodedExample encode(const std::vector<std::string>& tokens, const data::Span& name,
                      const data::Span& filler, const data::Vocabulary& vocab,
                      int min_context_length) {
  data::validate_spans(name, filler, static_cast<int>(tokens.size()));
  const bool name_first = name.begin < filler.begin;
  const data::Span& first = name_first ? name : filler;
  const data::Span& second = name_first ? filler : name;
  const int first_tag = name_first ? data::kNameTagId : data::kFillerTagId;
  const int second_tag = name_first ? data::kFillerTagId : data::kNameTagId;

  auto ids = [&](int begin, int end) {
    std::vector<int> out;
    for (int i = begin; i < end; ++i) out.push_back(vocab.id(tokens[static_cast<size_t>(i)]));
    return out;
  };

  EncodedExample ex;
  ex.order_flag = name_first ? 1 : 0;
  ex.left = ids(0, first.begin);
  ex.left.push_back(first_tag);
  ex.middle.push_back(first_tag);
  for (int id : ids(first.end, second.begin)) ex.middle.push_back(id);
  ex.middle.push_back(second_tag);
  ex.right.push_back(second_tag);
  for (int id : ids(second.end, static_cast<int>(tokens.size()))) ex.right.push_back(id);
  pad_to(ex.left, min_context_length);
  pad_to(ex.middle, min_context_length);
  pad_to(ex.right, min_context_length);
  return ex;
}

EncodedExample reverse_arguments(const EncodedExample& ex) {
  EncodedExample out = ex;
  for (auto* ctx : {&out.left, &out.middle, &out.right})
    std::transform(ctx->begin(), ctx->end(), ctx->begin(), swap_tag);
  out.order_flag = 1 - ex.order_flag;
  out.gold_inverse = !ex.gold_inverse;
  std::swap(out.type1, out.type2);
  return out;
}

EncodedExample to_canonical(const EncodedExample& ex) {
  return ex.gold_inverse ? reverse_arguments(ex) : ex;
}

EncodedExample encode_example(const data::RawExample& raw, const data::Vocabulary& vocab,
                              const SlotSchema& schema, int min_context_length) {
  EncodedExample ex = encode(raw.tokens, raw.name, raw.filler, vocab, min_context_length);
  ex.id = raw.id;
  ex.type1 = raw.type1;
  ex.type2 = raw.type2;
  if (data::is_negative_slot(raw.slot)) {
    ex.gold = schema.negative_label();
  } else if (schema.find_label(raw.slot) >= 0 && !schema.covers(raw.slot)) {
    ex.gold = schema.label_index(raw.slot);
  } else {
    const SlotMapping m = schema.mapping(raw.slot);
    ex.gold = m.merged;
    ex.gold_inverse = m.inverse;
  }
  return to_canonical(ex);
}

std::vector<EncodedExample> encode_all(const std::vector<data::RawExample>& raws,
                                       const data::Vocabulary& vocab,
                                       const SlotSchema& schema, int min_context_length) {
  std::vector<EncodedExample> out;
  out.reserve(raws.size());
  for (const auto& raw : raws)
    out.push_back(encode_example(raw, vocab, schema, min_context_length));
  return out;
}

}  // namespace slotcnn
