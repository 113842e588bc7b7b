#include "slotcnn/rel/schema.hpp"

#include <array>

#include "slotcnn/error.hpp"

namespace slotcnn {

namespace {

constexpr std::array<std::string_view, kNumEntityTypes> kTypeNames = {
    "PERSON", "ORGANIZATION", "LOCATION", "DATE", "NUMBER", "O"};

constexpr int PER = 0, ORG = 1, LOC = 2, DATE = 3, NUM = 4, O = 5;

struct MergedRow {
  const char* label;
  std::vector<int> name_types;
  std::vector<int> filler_types;
  // Covered original slots; a leading '~' marks inverse orientation.
  std::vector<const char*> originals;
};

std::vector<MergedRow> merged_table() {
  return {
      {"per:age", {PER}, {NUM}, {"per:age"}},
      {"per:alternate_names", {PER}, {PER}, {"per:alternate_names"}},
      {"per:cause_of_death", {PER}, {O}, {"per:cause_of_death"}},
      {"per:children", {PER}, {PER}, {"per:children", "~per:parents"}},
      {"per:date_of_birth", {PER}, {DATE}, {"per:date_of_birth"}},
      {"per:date_of_death", {PER}, {DATE}, {"per:date_of_death"}},
      {"per:employee_or_member_of",
       {PER},
       {ORG, LOC},
       {"per:employee_or_member_of", "~org:employees_or_members",
        "~gpe:employees_or_members"}},
      {"per:location_of_birth",
       {PER},
       {LOC},
       {"per:city_of_birth", "per:country_of_birth",
        "per:stateorprovince_of_birth", "~gpe:births_in_city",
        "~gpe:births_in_country", "~gpe:births_in_stateorprovince"}},
      {"per:loc_of_death",
       {PER},
       {LOC},
       {"per:city_of_death", "per:country_of_death",
        "per:stateorprovince_of_death", "~gpe:deaths_in_city",
        "~gpe:deaths_in_country", "~gpe:deaths_in_stateorprovince"}},
      {"per:loc_of_residence",
       {PER},
       {LOC},
       {"per:cities_of_residence", "per:countries_of_residence",
        "per:statesorprovinces_of_residence", "~gpe:residents_of_city",
        "~gpe:residents_of_country", "~gpe:residents_of_stateorprovince"}},
      {"per:origin", {PER}, {LOC, O}, {"per:origin"}},
      {"per:schools_attended",
       {PER},
       {ORG},
       {"per:schools_attended", "~org:students"}},
      {"per:siblings", {PER}, {PER}, {"per:siblings"}},
      {"per:spouse", {PER}, {PER}, {"per:spouse"}},
      {"per:title", {PER}, {O}, {"per:title"}},
      {"org:alternate_names", {ORG}, {ORG}, {"org:alternate_names"}},
      {"org:loc_of_headquarters",
       {ORG},
       {LOC},
       {"org:city_of_headquarters", "org:country_of_headquarters",
        "org:stateorprovince_of_headquarters", "~gpe:headquarters_in_city",
        "~gpe:headquarters_in_country",
        "~gpe:headquarters_in_stateorprovince"}},
      {"org:date_founded", {ORG}, {DATE}, {"org:date_founded"}},
      {"org:founded_by",
       {ORG},
       {PER, ORG, LOC},
       {"org:founded_by", "~per:organizations_founded",
        "~org:organizations_founded", "~gpe:organizations_founded"}},
      {"org:members",
       {ORG},
       {ORG, LOC},
       {"org:members", "~org:member_of", "~gpe:member_of"}},
      {"org:parents",
       {ORG},
       {ORG, LOC},
       {"org:parents", "~org:subsidiaries", "~gpe:subsidiaries"}},
      {"org:top_members_employees",
       {ORG},
       {PER},
       {"org:top_members_employees", "~per:top_member_employee_of"}},
  };
}

nn::Vec multi_hot(const std::vector<int>& types) {
  nn::Vec v = nn::Vec::Zero(kNumEntityTypes);
  for (int t : types) v(t) = 1.0;
  return v;
}

}  // namespace

std::string_view entity_type_name(int type) {
  if (type == kUnknownType) return "-";
  if (type < 0 || type >= kNumEntityTypes)
    throw LabelError("entity type index " + std::to_string(type) + " out of range");
  return kTypeNames[static_cast<size_t>(type)];
}

int parse_entity_type(std::string_view name) {
  if (name == "-") return kUnknownType;
  for (size_t i = 0; i < kTypeNames.size(); ++i)
    if (kTypeNames[i] == name) return static_cast<int>(i);
  throw LabelError("unknown entity type '" + std::string(name) + "'");
}

SlotSchema::SlotSchema() {
  for (const auto& row : merged_table()) {
    const int merged = static_cast<int>(slots_.size());
    slots_.emplace_back(row.label);
    expected_types_.emplace_back(row.name_types, row.filler_types);
    for (std::string_view original : row.originals) {
      SlotMapping m{merged, false};
      if (original.front() == '~') {
        m.inverse = true;
        original.remove_prefix(1);
      }
      originals_.emplace(std::string(original), m);
    }
  }
  const std::pair<const char*, const char*> pairs[] = {
      {"per:children", "per:parents"},
      {"per:siblings", "per:siblings"},
      {"per:spouse", "per:spouse"},
      {"per:schools_attended", "org:students"},
      {"org:top_members_employees", "per:top_member_employee_of"},
      {"org:parents", "org:subsidiaries"},
      {"org:members", "org:member_of"},
      {"per:employee_or_member_of", "org:employees_or_members"},
  };
  for (auto [a, b] : pairs) {
    inverse_pairs_.emplace(a, b);
    inverse_pairs_.emplace(b, a);
  }
}

const SlotSchema& SlotSchema::standard() {
  static const SlotSchema schema;
  return schema;
}

const std::string& SlotSchema::label_name(int label) const {
  if (label == negative_label()) return negative_name_;
  if (label < 0 || label >= num_slots())
    throw LabelError("label index " + std::to_string(label) + " out of range");
  return slots_[static_cast<size_t>(label)];
}

int SlotSchema::find_label(std::string_view name) const {
  if (name == negative_name_) return negative_label();
  for (size_t i = 0; i < slots_.size(); ++i)
    if (slots_[i] == name) return static_cast<int>(i);
  return -1;
}

int SlotSchema::label_index(std::string_view name) const {
  const int idx = find_label(name);
  if (idx < 0)
    throw UncoveredSlotError("'" + std::string(name) + "' is not a merged label");
  return idx;
}

bool SlotSchema::covers(std::string_view original) const {
  return originals_.find(original) != originals_.end();
}

SlotMapping SlotSchema::mapping(std::string_view original) const {
  auto it = originals_.find(original);
  if (it == originals_.end())
    throw UncoveredSlotError("slot '" + std::string(original) +
                             "' is not covered by the classifier");
  return it->second;
}

const std::string& SlotSchema::merge_slot(std::string_view original) const {
  return slots_[static_cast<size_t>(mapping(original).merged)];
}

std::optional<std::string> SlotSchema::inverse_slot(std::string_view original) const {
  auto it = inverse_pairs_.find(original);
  if (it == inverse_pairs_.end()) return std::nullopt;
  return it->second;
}

std::pair<nn::Vec, nn::Vec> SlotSchema::type_vectors(int merged) const {
  if (merged < 0 || merged >= num_slots())
    throw UncoveredSlotError("label " + std::to_string(merged) +
                             " has no expected argument types");
  const auto& [name_types, filler_types] = expected_types_[static_cast<size_t>(merged)];
  return {multi_hot(name_types), multi_hot(filler_types)};
}

std::pair<nn::Vec, nn::Vec> SlotSchema::slot_type_vectors(
    std::string_view original) const {
  const SlotMapping m = mapping(original);
  auto vectors = type_vectors(m.merged);
  if (m.inverse) std::swap(vectors.first, vectors.second);
  return vectors;
}

std::vector<std::string> SlotSchema::original_slots() const {
  std::vector<std::string> out;
  for (const auto& [name, m] : originals_) out.push_back(name);
  return out;
}

}  // namespace slotcnn
