#include "slotcnn/data/cleaning.hpp"

#include <algorithm>
#include <numeric>

#include "slotcnn/error.hpp"
#include "slotcnn/nn/params.hpp"
#include "slotcnn/rel/schema.hpp"

namespace slotcnn::data {

namespace {

int merged_or_none(std::string_view slot) {
  const SlotSchema& schema = SlotSchema::standard();
  if (schema.covers(slot)) return schema.mapping(slot).merged;
  return schema.find_label(slot);
}

/// Trigger slots that stand for `slot`: itself and slots with the same
/// merged label.
bool matches_slot(const TriggerList& triggers, std::string_view slot,
                  const std::vector<std::string>& tokens) {
  if (triggers.matches(slot, tokens)) return true;
  const int merged = merged_or_none(slot);
  if (merged < 0) return false;
  for (const auto& [other, pats] : triggers.patterns())
    if (other != slot && merged_or_none(other) == merged && triggers.matches(other, tokens))
      return true;
  return false;
}

bool has_trigger_for(const TriggerList& triggers, std::string_view slot) {
  if (triggers.has_slot(slot)) return true;
  const int merged = merged_or_none(slot);
  if (merged < 0) return false;
  for (const auto& [other, pats] : triggers.patterns())
    if (merged_or_none(other) == merged) return true;
  return false;
}

}  // namespace

std::vector<RawExample> clean_negatives(const std::vector<RawExample>& examples,
                                        const TriggerList& triggers, CleaningMode mode) {
  for (const auto& ex : examples)
    if (!is_negative_slot(ex.slot) && !has_trigger_for(triggers, ex.slot))
      throw ConfigError("no trigger pattern for positive slot " + ex.slot);

  std::vector<RawExample> out;
  for (const auto& ex : examples) {
    if (!is_negative_slot(ex.slot)) {
      out.push_back(ex);
      continue;
    }
    bool triggered = false;
    if (mode == CleaningMode::multiclass) {
      triggered = triggers.matches_any(ex.tokens);
    } else {
      const std::string target = negative_target(ex.slot);
      triggered = target.empty() ? triggers.matches_any(ex.tokens)
                                 : matches_slot(triggers, target, ex.tokens);
    }
    if (triggered) continue;
    out.push_back(ex);
    if (mode == CleaningMode::multiclass) out.back().slot = "N";
  }
  return out;
}

std::vector<RawExample> subsample_negatives(const std::vector<RawExample>& examples,
                                            std::uint64_t seed) {
  std::vector<size_t> negatives;
  size_t positives = 0;
  for (size_t i = 0; i < examples.size(); ++i) {
    if (is_negative_slot(examples[i].slot))
      negatives.push_back(i);
    else
      ++positives;
  }
  if (negatives.size() <= positives) return examples;

  auto rng = nn::make_rng(seed, "subsample");
  std::shuffle(negatives.begin(), negatives.end(), rng);
  std::vector<bool> keep(examples.size(), true);
  for (size_t j = positives; j < negatives.size(); ++j) keep[negatives[j]] = false;
  std::vector<RawExample> out;
  for (size_t i = 0; i < examples.size(); ++i)
    if (keep[i]) out.push_back(examples[i]);
  return out;
}

Vocabulary build_vocabulary(const std::vector<RawExample>& examples,
                            const EmbeddingTable* embeddings) {
  Vocabulary vocab;
  for (const auto& ex : examples)
    for (int i = 0; i < static_cast<int>(ex.tokens.size()); ++i) {
      const bool in_arg = (i >= ex.name.begin && i < ex.name.end) ||
                          (i >= ex.filler.begin && i < ex.filler.end);
      if (!in_arg) vocab.add(ex.tokens[static_cast<size_t>(i)]);
    }
  if (embeddings)
    for (const auto& tok : embeddings->tokens) vocab.add(tok);
  return vocab;
}

}  // namespace slotcnn::data
