#include "roads/evaluator.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "roads/errors.h"

namespace roads {

std::string_view ToString(RankMode mode) {
  return mode == RankMode::kWithinPack ? "within_pack" : "global";
}

RankMode ParseRankMode(std::string_view text) {
  if (text == "within_pack" || text == "within-pack") {
    return RankMode::kWithinPack;
  }
  if (text == "global") return RankMode::kGlobal;
  throw InvalidArgumentError("unknown rank mode '" + std::string(text) +
                             "' (expected within_pack or global)");
}

void ScoreParams::Validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidArgumentError("alpha must be in (0, 1]");
  }
  if (pack_size < 1) throw InvalidArgumentError("pack_size must be >= 1");
  if (!(pack_penalty > 0.0 && pack_penalty <= 1.0)) {
    throw InvalidArgumentError("pack_penalty must be in (0, 1]");
  }
  if (rank_mode == RankMode::kWithinPack &&
      !(pack_penalty < std::pow(static_cast<double>(pack_size), -alpha))) {
    throw InvalidArgumentError(
        "pack_penalty must be below pack_size^-alpha, otherwise the first "
        "item of a pack outscores the last item of the previous one");
  }
}

double StepScore(std::int64_t rank, const ScoreParams& params) {
  if (rank < 1) {
    throw InvalidArgumentError("rank must be >= 1, got " +
                               std::to_string(rank));
  }
  const std::int64_t bucket = (rank - 1) / params.pack_size;
  const std::int64_t shown =
      params.rank_mode == RankMode::kWithinPack
          ? (rank - 1) % params.pack_size + 1
          : rank;
  return std::pow(params.pack_penalty, static_cast<double>(bucket)) *
         std::pow(1.0 / static_cast<double>(shown), params.alpha);
}

std::size_t RankOfTruth(const RankedPrediction& prediction,
                        std::span<const ConceptKey> truth) {
  if (truth.empty()) throw InvalidArgumentError("empty truth concept set");
  std::size_t best = 0;
  for (const auto& t : truth) {
    auto r = prediction.RankOf(t);
    if (r == 0) {
      throw ConceptNotInTaxonomyError(
          "true concept " + std::string(ToString(t.domain)) + ":" +
          std::to_string(t.index) + " is not in the ranked taxonomy");
    }
    if (best == 0 || r < best) best = r;
  }
  return best;
}

ConfidenceInterval NormalCi95(std::span<const double> scores) {
  if (scores.empty()) return {};
  const double n = static_cast<double>(scores.size());
  double sum = 0;
  for (double s : scores) sum += s;
  const double mean = sum / n;
  if (scores.size() < 2) return {mean, mean};
  double ss = 0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double half = kZ95 * std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return {mean - half, mean + half};
}

namespace {

void EvaluateShard(const Corpus& corpus, const Taxonomy& taxonomy,
                   FrequencyModel model, const ScoreParams& params,
                   std::size_t shard, std::size_t shards,
                   std::vector<StepOutcome>& out) {
  for (std::size_t t = shard; t < corpus.size(); t += shards) {
    const auto& trajectory = corpus[t];
    for (std::size_t i = 1; i + 1 < trajectory.steps.size(); ++i) {
      if (!IsPredictable(trajectory, i, model.target_kind())) continue;
      auto context = ExtractContext(trajectory, i, model.method());
      if (!context) continue;
      auto prediction = LeaveOneOutRank(model, trajectory, i, taxonomy);
      std::vector<ConceptKey> truth;
      for (const auto& c : trajectory.steps[i].concepts) {
        truth.push_back(KeyOf(c));
      }
      StepOutcome outcome;
      outcome.user_id = trajectory.user_id;
      outcome.step_index = i;
      outcome.rank = RankOfTruth(prediction, truth);
      outcome.score = StepScore(static_cast<std::int64_t>(outcome.rank),
                                params);
      out.push_back(std::move(outcome));
    }
  }
}

}  // namespace

std::vector<StepOutcome> EvaluateSteps(const Corpus& corpus,
                                       const TaxonomyPair& taxonomies,
                                       StepKind target_kind, Method method,
                                       const EvalOptions& options) {
  options.params.Validate();
  const auto model = Train(corpus, target_kind, method);
  const auto& taxonomy = taxonomies.For(target_kind);
  const std::size_t shards = static_cast<std::size_t>(
      std::clamp<int>(options.jobs, 1, static_cast<int>(std::max<std::size_t>(
                                           corpus.size(), 1))));

  std::vector<std::vector<StepOutcome>> parts(shards);
  if (shards == 1) {
    EvaluateShard(corpus, taxonomy, model, options.params, 0, 1, parts[0]);
  } else {
    // Each worker mutates its own copy of the model.
    std::vector<std::exception_ptr> errors(shards);
    {
      std::vector<std::jthread> workers;
      for (std::size_t s = 0; s < shards; ++s) {
        workers.emplace_back([&, s] {
          try {
            EvaluateShard(corpus, taxonomy, model, options.params, s, shards,
                          parts[s]);
          } catch (...) {
            errors[s] = std::current_exception();
          }
        });
      }
    }
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<StepOutcome> outcomes;
  for (auto& part : parts) {
    std::move(part.begin(), part.end(), std::back_inserter(outcomes));
  }
  std::sort(outcomes.begin(), outcomes.end(),
            [](const StepOutcome& a, const StepOutcome& b) {
              if (a.user_id != b.user_id) return a.user_id < b.user_id;
              return a.step_index < b.step_index;
            });
  return outcomes;
}

EvalReport Summarize(std::span<const StepOutcome> outcomes, Method method,
                     StepKind target_kind, const ScoreParams& params,
                     std::size_t taxonomy_size) {
  if (outcomes.empty()) {
    throw NoEvaluableStepsError(
        "no " + std::string(ToString(target_kind)) +
        " step can be evaluated with method " + std::string(ToString(method)));
  }
  EvalReport report;
  report.method = method;
  report.target_kind = target_kind;
  report.params = params;
  report.taxonomy_size = taxonomy_size;
  report.n_evaluated = outcomes.size();

  std::vector<double> scores;
  scores.reserve(outcomes.size());
  std::uint64_t rank_sum = 0;
  std::size_t max_rank = taxonomy_size;
  for (const auto& o : outcomes) {
    scores.push_back(o.score);
    rank_sum += o.rank;
    max_rank = std::max(max_rank, o.rank);
  }
  const double n = static_cast<double>(outcomes.size());
  report.mean_rank = static_cast<double>(rank_sum) / n;
  report.ci95 = NormalCi95(scores);
  double score_sum = 0;
  for (double s : scores) score_sum += s;
  report.mrr = score_sum / n;
  report.histogram.assign(max_rank, 0);
  for (const auto& o : outcomes) ++report.histogram[o.rank - 1];
  return report;
}

EvalReport Evaluate(const Corpus& corpus, const TaxonomyPair& taxonomies,
                    StepKind target_kind, Method method,
                    const EvalOptions& options) {
  auto outcomes =
      EvaluateSteps(corpus, taxonomies, target_kind, method, options);
  return Summarize(outcomes, method, target_kind, options.params,
                   taxonomies.For(target_kind).size());
}

std::vector<ReorientationFlag> FlagReorientations(
    std::span<const StepOutcome> outcomes, std::size_t threshold) {
  std::vector<ReorientationFlag> flags;
  for (const auto& o : outcomes) {
    if (o.rank > threshold) {
      flags.push_back({o.user_id, o.step_index, o.rank, threshold});
    }
  }
  return flags;
}

std::vector<ReorientationFlag> DetectReorientations(
    const Corpus& corpus, const TaxonomyPair& taxonomies,
    StepKind target_kind, Method method, const EvalOptions& options,
    std::size_t threshold) {
  auto outcomes =
      EvaluateSteps(corpus, taxonomies, target_kind, method, options);
  if (outcomes.empty()) {
    throw NoEvaluableStepsError("no step can be evaluated");
  }
  if (threshold == 0) {
    threshold = static_cast<std::size_t>(options.params.pack_size);
  }
  return FlagReorientations(outcomes, threshold);
}

namespace {

nlohmann::json ReportJson(const EvalReport& report) {
  nlohmann::json doc;
  doc["method"] = std::string(ToString(report.method));
  doc["target_kind"] = std::string(ToString(report.target_kind));
  doc["n_evaluated"] = report.n_evaluated;
  doc["taxonomy_size"] = report.taxonomy_size;
  doc["mean_rank"] = report.mean_rank;
  doc["mrr"] = report.mrr;
  doc["ci95"] = {{"low", report.ci95.low}, {"high", report.ci95.high}};
  doc["ci_method"] = "normal-approximation z=1.96";
  doc["params"] = {{"alpha", report.params.alpha},
                   {"pack_size", report.params.pack_size},
                   {"pack_penalty", report.params.pack_penalty},
                   {"rank_mode", std::string(ToString(report.params.rank_mode))}};
  nlohmann::json hist = nlohmann::json::array();
  for (std::size_t i = 0; i < report.histogram.size(); ++i) {
    hist.push_back({i + 1, report.histogram[i]});
  }
  doc["histogram"] = std::move(hist);
  return doc;
}

std::string Format(const char* fmt, double a, double b = 0, double c = 0,
                   double d = 0) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

}  // namespace

std::string ReportToJson(const EvalReport& report) {
  return ReportJson(report).dump(2);
}

std::string ReportsToJson(std::span<const EvalReport> reports) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& r : reports) doc.push_back(ReportJson(r));
  return doc.dump(2);
}

std::string TableRow(const EvalReport& report) {
  std::string name(ToString(report.method));
  name.resize(std::max<std::size_t>(name.size(), 14), ' ');
  return name + " | " +
         Format("%.2f | %.3f | [%.3f, %.3f]", report.mean_rank, report.mrr,
                report.ci95.low, report.ci95.high);
}

std::string ReportsToTable(std::span<const EvalReport> reports) {
  std::ostringstream out;
  out << "Method         | MR   | MRR   | CI\n";
  for (const auto& r : reports) out << TableRow(r) << '\n';
  return out.str();
}

std::string HistogramCsv(const EvalReport& report) {
  std::ostringstream out;
  out << "rank_bin,count\n";
  for (std::size_t i = 0; i < report.histogram.size(); ++i) {
    out << i + 1 << ',' << report.histogram[i] << '\n';
  }
  return out.str();
}

std::string FlagsToJson(std::span<const ReorientationFlag> flags) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& f : flags) {
    doc.push_back({{"user_id", f.user_id},
                   {"step_index", f.step_index},
                   {"rank_of_truth", f.rank_of_truth},
                   {"threshold", f.threshold}});
  }
  return doc.dump(2);
}

std::vector<Method> ComparedMethods(StepKind target_kind) {
  if (target_kind == StepKind::kDiploma) {
    return {Method::kBaseline, Method::kFirstJobAfter, Method::kLastDiploma,
            Method::kHighestDiploma};
  }
  return {Method::kBaseline, Method::kLastDiploma, Method::kPreviousStep,
          Method::kNextStepIntent};
}

}  // namespace roads
