#ifndef ROADS_PREDICTOR_H_
#define ROADS_PREDICTOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roads/taxonomy.h"
#include "roads/types.h"

namespace roads {

// Which other step of the trajectory supplies the conditioning concepts.
enum class Method : std::uint8_t {
  kBaseline,        // nothing: global frequencies
  kLastDiploma,     // most recent diploma before the step
  kHighestDiploma,  // highest diploma so far (latest counts as highest)
  kPreviousStep,    // the step right before
  kFirstJobAfter,   // first job after the step (simulated intent)
  kNextStepIntent,  // the step right after (simulated intent)
};

inline constexpr Method kAllMethods[] = {
    Method::kBaseline,      Method::kLastDiploma,   Method::kHighestDiploma,
    Method::kPreviousStep,  Method::kFirstJobAfter, Method::kNextStepIntent};

// Display name, e.g. "PreviousStep".
std::string_view ToString(Method method);
// Command-line name, e.g. "previous".
std::string_view CliName(Method method);
// Accepts either spelling. Throws InvalidArgumentError.
Method ParseMethod(std::string_view text);

using Context = std::optional<std::vector<ConceptKey>>;

// Steps that can be predicted: not the first, not the last.
bool IsPredictable(const Trajectory& trajectory, std::size_t step_index);
bool IsPredictable(const Trajectory& trajectory, std::size_t step_index,
                   StepKind target_kind);

// Conditioning concepts for the step at `step_index`. Baseline yields an
// empty set; nullopt means the step the method needs does not exist.
// Throws IndexOutOfRangeError unless 1 <= step_index <= size - 2.
Context ExtractContext(const Trajectory& trajectory, std::size_t step_index,
                       Method method);

// Co-occurrence counts between hypothesis concepts H (the target kind) and
// context concepts C (either kind).
class FrequencyModel {
 public:
  FrequencyModel(StepKind target_kind, Method method)
      : target_kind_(target_kind), method_(method) {}

  StepKind target_kind() const { return target_kind_; }
  Method method() const { return method_; }
  std::int64_t total_steps() const { return total_steps_; }
  // Sum of the marginals; checked by Verify().
  std::int64_t concept_occurrences() const { return concept_occurrences_; }

  std::int64_t Marginal(int hypothesis) const;
  std::int64_t Joint(int hypothesis, const ConceptKey& context) const;
  // Zero entries are never stored.
  const std::map<int, std::int64_t>& marginal() const { return marginal_; }
  const std::map<ConceptKey, std::map<int, std::int64_t>>& joint_by_context()
      const {
    return joint_;
  }

  // One training step: every hypothesis gets a marginal count and one joint
  // count per context concept. Baseline models never store joints.
  void Add(std::span<const ConceptId> hypotheses, const Context& context);
  // Exact inverse of Add. Throws UnderflowError, leaving the model untouched,
  // when some count would drop below zero.
  void Remove(std::span<const ConceptId> hypotheses, const Context& context);

  // Recomputes the checksum; throws Error when it disagrees.
  void Verify() const;

  // Canonical dump: equal models give byte-equal strings.
  std::string ToJson() const;
  static FrequencyModel FromJson(std::string_view text);

  friend bool operator==(const FrequencyModel&,
                         const FrequencyModel&) = default;

 private:
  StepKind target_kind_;
  Method method_;
  std::int64_t total_steps_ = 0;
  std::int64_t concept_occurrences_ = 0;
  std::map<int, std::int64_t> marginal_;
  std::map<ConceptKey, std::map<int, std::int64_t>> joint_;
};

// Counts every predictable step of `target_kind`. Throws EmptyCorpusError.
FrequencyModel Train(const Corpus& corpus, StepKind target_kind,
                     Method method);

struct Hypothesis {
  ConceptId id;
  std::int64_t score = 0;  // summed joint counts, or the marginal on backoff
  std::int64_t count = 0;  // marginal count

  friend bool operator==(const Hypothesis& a, const Hypothesis& b) {
    return a.id == b.id && a.score == b.score && a.count == b.count;
  }
};

struct RankedPrediction {
  std::vector<Hypothesis> hypotheses;
  Method method = Method::kBaseline;
  std::vector<ConceptKey> context_concepts;
  bool backed_off = false;

  // 1-based rank of `key`, 0 when absent.
  std::size_t RankOf(const ConceptKey& key) const;

  friend bool operator==(const RankedPrediction&,
                         const RankedPrediction&) = default;
};

// One (model, context) pair whose joint counts feed a ranking.
struct ContextSource {
  const FrequencyModel* model;
  Context context;
};

// Scores each hypothesis by the joint counts summed over all context
// concepts of all sources. Falls back to the first model's marginals when
// every joint is zero. Ties: marginal descending, then concept index.
RankedPrediction Rank(std::span<const ContextSource> sources,
                      const Taxonomy& taxonomy);
RankedPrediction Rank(const FrequencyModel& model, const Context& context,
                      const Taxonomy& taxonomy);

// Ranks the step at `step_index` as if it had never been counted: its
// contribution is removed, the ranking computed, then the contribution is
// restored. Throws UnderflowError when the step was not in training.
RankedPrediction LeaveOneOutRank(FrequencyModel& model,
                                 const Trajectory& trajectory,
                                 std::size_t step_index,
                                 const Taxonomy& taxonomy);

}  // namespace roads

#endif  // ROADS_PREDICTOR_H_
