#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slotcnn/nn/tensor.hpp"

namespace slotcnn {

/// Coarse entity types shared by the typing heads and type vectors.
enum class EntityType : int { person, organization, location, date, number, other };

inline constexpr int kNumEntityTypes = 6;
inline constexpr int kUnknownType = -1;

std::string_view entity_type_name(int type);
/// PERSON, ORGANIZATION, LOCATION, DATE, NUMBER, O, or "-" for unknown.
int parse_entity_type(std::string_view name);

struct SlotMapping {
  int merged = -1;
  /// True when the original slot reads the merged relation with the
  /// query entity and filler swapped (per:parents vs per:children).
  bool inverse = false;
};

/// The merged relation label set (22 slots plus the artificial negative
/// class N) and the mapping from original slot names onto it.
class SlotSchema {
 public:
  static const SlotSchema& standard();

  int num_slots() const { return static_cast<int>(slots_.size()); }
  int num_labels() const { return num_slots() + 1; }
  int negative_label() const { return num_slots(); }

  /// Merged slot name, or "N" for the negative label.
  const std::string& label_name(int label) const;
  /// Index of a merged label name (including "N"); -1 when unknown.
  int find_label(std::string_view name) const;
  int label_index(std::string_view name) const;

  bool covers(std::string_view original) const;
  /// Throws UncoveredSlotError for slots without a merged label.
  SlotMapping mapping(std::string_view original) const;
  const std::string& merge_slot(std::string_view original) const;

  /// Partner slot for the one-to-one inverse pairs; self-inverse slots map
  /// to themselves. Empty for slots without a unique partner.
  std::optional<std::string> inverse_slot(std::string_view original) const;

  /// Expected argument types of a merged label in canonical orientation
  /// (query entity first, filler second) as multi-hot vectors.
  std::pair<nn::Vec, nn::Vec> type_vectors(int merged) const;
  std::pair<nn::Vec, nn::Vec> slot_type_vectors(std::string_view original) const;

  std::vector<std::string> original_slots() const;
  const std::vector<std::string>& slot_names() const { return slots_; }

 private:
  SlotSchema();

  std::vector<std::string> slots_;
  std::string negative_name_ = "N";
  std::map<std::string, SlotMapping, std::less<>> originals_;
  std::vector<std::pair<std::vector<int>, std::vector<int>>> expected_types_;
  std::map<std::string, std::string, std::less<>> inverse_pairs_;
};

}  // namespace slotcnn
