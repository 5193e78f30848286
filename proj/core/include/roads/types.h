#ifndef ROADS_TYPES_H_
#define ROADS_TYPES_H_

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace roads {

enum class StepKind : std::uint8_t { kDiploma = 0, kJob = 1 };

// "diploma" / "job".
std::string_view ToString(StepKind kind);
// Accepts "diploma" and "job" (case-insensitive). Throws InvalidArgumentError.
StepKind ParseStepKind(std::string_view text);

// Identity is (domain, index); the label is for display only and does not
// take part in comparisons.
struct ConceptId {
  StepKind domain = StepKind::kDiploma;
  int index = 0;
  std::string label;

  friend bool operator==(const ConceptId& a, const ConceptId& b) {
    return a.domain == b.domain && a.index == b.index;
  }
  friend std::strong_ordering operator<=>(const ConceptId& a,
                                          const ConceptId& b) {
    if (auto c = a.domain <=> b.domain; c != 0) return c;
    return a.index <=> b.index;
  }
};

// Label-free concept key used inside models and contexts.
struct ConceptKey {
  StepKind domain = StepKind::kDiploma;
  int index = 0;

  friend bool operator==(const ConceptKey&, const ConceptKey&) = default;
  friend auto operator<=>(const ConceptKey&, const ConceptKey&) = default;
};

inline ConceptKey KeyOf(const ConceptId& id) { return {id.domain, id.index}; }

// A normalized field tag such as "internet" or "wind-power": lowercase,
// trimmed, single inner spaces, never empty.
class FieldTag {
 public:
  // Normalizes `raw`; throws InvalidArgumentError when nothing is left.
  explicit FieldTag(std::string_view raw);

  const std::string& label() const { return label_; }

  friend bool operator==(const FieldTag&, const FieldTag&) = default;
  friend auto operator<=>(const FieldTag&, const FieldTag&) = default;

 private:
  std::string label_;
};

// Year-month date with an optional day.
struct Date {
  int year = 0;
  int month = 1;
  std::optional<int> day;

  // "YYYY-MM" or "YYYY-MM-DD". Throws InvalidArgumentError.
  static Date Parse(std::string_view text);
  std::string ToString() const;

  friend bool operator==(const Date&, const Date&) = default;
  friend std::strong_ordering operator<=>(const Date& a, const Date& b) {
    if (auto c = a.year <=> b.year; c != 0) return c;
    if (auto c = a.month <=> b.month; c != 0) return c;
    return a.day.value_or(0) <=> b.day.value_or(0);
  }
};

inline constexpr std::size_t kMaxConceptsPerStep = 4;

struct Step {
  StepKind kind = StepKind::kDiploma;
  std::string title;
  Date start;
  std::optional<Date> end;
  std::optional<std::string> location;
  std::optional<std::string> description;
  std::vector<FieldTag> fields;      // sorted, unique
  std::vector<ConceptId> concepts;   // classification order, unique, <= 4

  bool HasConcept(const ConceptKey& key) const;

  friend bool operator==(const Step&, const Step&) = default;
};

struct Skill {
  std::string label;
  std::optional<int> rating;

  friend bool operator==(const Skill&, const Skill&) = default;
};

struct Trajectory {
  std::string user_id;
  std::vector<Step> steps;
  std::vector<Skill> skills;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

using Corpus = std::vector<Trajectory>;

// Chronological step order: start, then end (open-ended last), then title.
bool StepBefore(const Step& a, const Step& b);
void SortSteps(Trajectory& trajectory);

// Checks the Step invariants against nothing but the step itself (dates,
// concept domain, duplicates, cap). Throws InvalidArgumentError.
void ValidateStep(const Step& step);

}  // namespace roads

#endif  // ROADS_TYPES_H_
