#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "slotcnn/data/dataset.hpp"
#include "slotcnn/data/triggers.hpp"

namespace slotcnn::data {

struct SyntheticSlot {
  std::string slot;
  int name_type = -1;
  int filler_type = -1;
  /// Token templates containing "{name}" and "{filler}" exactly once each.
  std::vector<std::string> templates;
  std::vector<std::string> triggers;
};

struct SyntheticSpec {
  std::vector<SyntheticSlot> slots;
  std::vector<std::string> negative_templates;
  /// Surface strings per entity type; multi-word entries are split on spaces.
  std::map<int, std::vector<std::string>> lexicon;
  std::vector<std::string> noise;
  /// Up to this many noise words are put before and after each sentence.
  int max_noise = 2;
  int train = 0;
  int dev = 0;
  int test = 0;
  double negative_fraction = 0.0;
  /// Slot pairs generated in lockstep: both members get the same template
  /// and noise and differ only in the argument strings.
  std::vector<std::pair<std::string, std::string>> ambiguous_pairs;
};

struct SyntheticCorpus {
  std::vector<RawExample> train;
  std::vector<RawExample> dev;
  std::vector<RawExample> test;
  TriggerList triggers;
};

/// Parses the JSON form of a spec. Throws ConfigError for missing or
/// malformed fields.
SyntheticSpec parse_synthetic_spec(const std::string& json_text);
SyntheticSpec load_synthetic_spec(const std::string& path);

/// Deterministic per seed. Negatives are labeled "NEG". Throws ConfigError
/// when an ambiguous pair does not name two listed slots with different
/// argument types, or a template is malformed.
SyntheticCorpus generate_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

/// Writes train.tsv, dev.tsv, test.tsv and triggers.tsv into `dir`
/// (created if missing).
void write_synthetic(const SyntheticCorpus& corpus, const std::string& dir);

}  // namespace slotcnn::data
