#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace slotcnn::post {

enum class Valued { single, list };

struct SlotSpec {
  std::string slot;
  Valued valued = Valued::single;
  int top_n = 1;
  double base_threshold = 0.5;

  /// Throws ConfigError when top_n < 1 or the threshold leaves [0, 1].
  void validate() const;
};

struct FillerCandidate {
  std::string filler;
  double score = 0.0;
  std::string sentence_id;

  friend bool operator==(const FillerCandidate&, const FillerCandidate&) = default;
};

inline constexpr double kHopThresholdIncrease = 0.1;

/// Drops candidates below base (+0.1 at hop 1), sorts the rest by score
/// descending then filler ascending, and keeps one (single) or top_n (list).
std::vector<FillerCandidate> select_fillers(std::vector<FillerCandidate> candidates,
                                            const SlotSpec& spec, int hop);

enum class LocationCategory { city, state, country, unknown };

std::string_view category_name(LocationCategory c);
LocationCategory parse_category(std::string_view name);

/// Lookups are case-folded.
class LocationMaps {
 public:
  void add_city(std::string_view name);
  void add_state(std::string_view name);
  void add_country(std::string_view name);
  void map_city_state(std::string_view city, std::string_view state);
  void map_city_country(std::string_view city, std::string_view country);
  void map_state_country(std::string_view state, std::string_view country);

  bool is_city(std::string_view name) const;
  bool is_state(std::string_view name) const;
  bool is_country(std::string_view name) const;
  std::optional<std::string> state_of_city(std::string_view city) const;
  std::optional<std::string> country_of_city(std::string_view city) const;
  std::optional<std::string> country_of_state(std::string_view state) const;

  /// Names whose city->country entry disagrees with city->state->country.
  std::vector<std::string> inconsistencies() const;

 private:
  std::set<std::string, std::less<>> cities_, states_, countries_;
  std::map<std::string, std::string, std::less<>> city_state_, city_country_, state_country_;
};

/// Reads city_state.tsv, city_country.tsv, state_country.tsv (child<TAB>
/// parent) and cities.txt, states.txt, countries.txt from `dir`. Missing
/// files count as empty. Throws ConfigError for inconsistent maps.
LocationMaps load_location_maps(const std::string& dir);

/// city > state > country when a name is in several sets.
LocationCategory disambiguate_location(std::string_view loc, const LocationMaps& maps);

/// The answer for a slot of granularity `target` given location `loc`:
/// loc itself if it already is one, otherwise its state or country via the
/// maps (city->country falls back to city->state->country). Never maps to
/// a finer granularity.
std::optional<std::string> infer_location(std::string_view loc, LocationCategory target,
                                          const LocationMaps& maps);

/// Granularity a slot's fillers must have, from its name (city_of_birth,
/// countries_of_residence, ...); nullopt for non-location slots.
std::optional<LocationCategory> slot_location_granularity(std::string_view slot);

/// Scores file: query_id<TAB>slot<TAB>filler<TAB>score<TAB>sentence_id.
struct ScoredFiller {
  std::string query;
  std::string slot;
  FillerCandidate candidate;
};
std::vector<ScoredFiller> parse_scores(std::istream& in, const std::string& source);

/// Rewrites location fillers to their slot's granularity with
/// infer_location, dropping those that cannot be inferred. Duplicates of
/// one (query, slot, filler) keep the highest score.
std::vector<ScoredFiller> infer_locations(const std::vector<ScoredFiller>& scores,
                                          const LocationMaps& maps);

/// Slot spec file: slot<TAB>single|list<TAB>top_n<TAB>threshold.
std::map<std::string, SlotSpec> parse_slot_specs(std::istream& in, const std::string& source);

/// Groups by (query, slot) in first-seen order and applies select_fillers.
/// Slots without a spec use a single-valued default. Output rows are
/// query<TAB>slot<TAB>filler<TAB>score<TAB>sentence_id.
void postprocess(const std::vector<ScoredFiller>& scores,
                 const std::map<std::string, SlotSpec>& specs, int hop, std::ostream& out);

}  // namespace slotcnn::post
