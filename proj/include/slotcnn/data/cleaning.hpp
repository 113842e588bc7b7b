#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "slotcnn/data/dataset.hpp"
#include "slotcnn/data/triggers.hpp"
#include "slotcnn/data/vocab.hpp"

namespace slotcnn::data {

enum class CleaningMode { binary, multiclass };

/// Removes negatives that contain a trigger pattern.
///
/// binary:     a negative for slot s ("NEG:s") is dropped if it contains a
///             trigger of s (or of any slot sharing s's merged label); a bare
///             "NEG" is checked against every slot.
/// multiclass: a negative is dropped if it contains a trigger of any slot;
///             survivors are relabeled "N".
///
/// Positives are never removed or relabeled. Throws ConfigError if some
/// positive slot has no trigger pattern.
std::vector<RawExample> clean_negatives(const std::vector<RawExample>& examples,
                                        const TriggerList& triggers, CleaningMode mode);

/// If there are more negatives than positives, keeps a uniform sample of
/// |positives| negatives (without replacement). Relative order is kept.
std::vector<RawExample> subsample_negatives(const std::vector<RawExample>& examples,
                                            std::uint64_t seed);

/// Reserved tokens, then every token of `examples` outside the argument
/// spans in first-seen order, then the tokens of `embeddings`.
Vocabulary build_vocabulary(const std::vector<RawExample>& examples,
                            const EmbeddingTable* embeddings = nullptr);

}  // namespace slotcnn::data
