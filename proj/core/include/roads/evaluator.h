#ifndef ROADS_EVALUATOR_H_
#define ROADS_EVALUATOR_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "roads/predictor.h"
#include "roads/taxonomy.h"
#include "roads/types.h"

namespace roads {

// How the fudge-factor exponent sees the rank.
enum class RankMode : std::uint8_t {
  kWithinPack,  // (1/p)^alpha with p restarting at 1 in every pack
  kGlobal,      // (1/r)^alpha with the raw rank
};

std::string_view ToString(RankMode mode);
RankMode ParseRankMode(std::string_view text);

// Parameters of the adapted reciprocal-rank score. Defaults: alpha 0.2,
// packs of 6, score halved for every further pack.
struct ScoreParams {
  double alpha = 0.2;
  int pack_size = 6;
  double pack_penalty = 0.5;
  RankMode rank_mode = RankMode::kWithinPack;

  // Throws InvalidArgumentError unless 0 < alpha <= 1, pack_size >= 1,
  // 0 < pack_penalty <= 1 and, within packs, pack_penalty is below
  // pack_size^-alpha so scores keep decreasing across a pack boundary.
  void Validate() const;
};

// Credit for a truth shown at 1-based `rank`:
// pack_penalty^bucket * (1/p)^alpha. Throws InvalidArgumentError for
// rank < 1.
double StepScore(std::int64_t rank, const ScoreParams& params = {});

// Best (smallest) rank among the true concepts. Throws
// ConceptNotInTaxonomyError if a truth concept is not in the ranking and
// InvalidArgumentError when `truth` is empty.
std::size_t RankOfTruth(const RankedPrediction& prediction,
                        std::span<const ConceptKey> truth);

struct ConfidenceInterval {
  double low = 0;
  double high = 0;
};

inline constexpr double kZ95 = 1.96;

// mean ± 1.96 * s / sqrt(n) with the sample (n-1) standard deviation;
// zero width for n < 2.
ConfidenceInterval NormalCi95(std::span<const double> scores);

// One held-out step's outcome.
struct StepOutcome {
  std::string user_id;
  std::size_t step_index = 0;
  std::size_t rank = 0;
  double score = 0;
};

struct EvalReport {
  Method method = Method::kBaseline;
  StepKind target_kind = StepKind::kJob;
  ScoreParams params;
  std::size_t taxonomy_size = 0;
  std::size_t n_evaluated = 0;
  double mean_rank = 0;
  double mrr = 0;
  ConfidenceInterval ci95;
  // histogram[r - 1] = number of truths ranked r, for r = 1..taxonomy_size.
  std::vector<std::size_t> histogram;
};

struct EvalOptions {
  ScoreParams params;
  // Worker threads; the report never depends on it.
  int jobs = 1;
};

// Leave-one-out over every predictable step of `target_kind` whose context
// exists under `method`, sorted by (user_id, step_index).
std::vector<StepOutcome> EvaluateSteps(const Corpus& corpus,
                                       const TaxonomyPair& taxonomies,
                                       StepKind target_kind, Method method,
                                       const EvalOptions& options = {});

// Aggregates outcomes into MR, MRR, CI and the rank histogram. Throws
// NoEvaluableStepsError for an empty list.
EvalReport Summarize(std::span<const StepOutcome> outcomes, Method method,
                     StepKind target_kind, const ScoreParams& params,
                     std::size_t taxonomy_size);

EvalReport Evaluate(const Corpus& corpus, const TaxonomyPair& taxonomies,
                    StepKind target_kind, Method method,
                    const EvalOptions& options = {});

struct ReorientationFlag {
  std::string user_id;
  std::size_t step_index = 0;
  std::size_t rank_of_truth = 0;
  std::size_t threshold = 0;

  friend bool operator==(const ReorientationFlag&,
                         const ReorientationFlag&) = default;
};

// Steps whose truth ranks strictly worse than `threshold`.
std::vector<ReorientationFlag> FlagReorientations(
    std::span<const StepOutcome> outcomes, std::size_t threshold);

// threshold 0 means "one pack" (params.pack_size).
std::vector<ReorientationFlag> DetectReorientations(
    const Corpus& corpus, const TaxonomyPair& taxonomies,
    StepKind target_kind, Method method, const EvalOptions& options = {},
    std::size_t threshold = 0);

// Canonical JSON (sorted keys).
std::string ReportToJson(const EvalReport& report);
std::string ReportsToJson(std::span<const EvalReport> reports);
// `Method | MR | MRR | CI` table, one row per report.
std::string ReportsToTable(std::span<const EvalReport> reports);
std::string TableRow(const EvalReport& report);
// `rank_bin,count` rows.
std::string HistogramCsv(const EvalReport& report);
std::string FlagsToJson(std::span<const ReorientationFlag> flags);

// The four methods compared for each kind: Baseline, then the three
// conditioned ones.
std::vector<Method> ComparedMethods(StepKind target_kind);

}  // namespace roads

#endif  // ROADS_EVALUATOR_H_
