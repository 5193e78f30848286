// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
// criterion fails.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "cli_runner.h"
#include "oracle.h"
#include "roads/errors.h"
#include "roads/evaluator.h"
#include "roads/ingest.h"
#include "roads/predictor.h"
#include "roads/synthgen.h"
#include "test_util.h"

namespace roads::testing {
namespace {

constexpr StepKind kD = StepKind::kDiploma;
constexpr StepKind kJ = StepKind::kJob;

struct Verdict {
  bool ok = true;
  std::string detail;

  void Check(bool condition, const std::string& what) {
    if (!condition && ok) detail = what;
    ok = ok && condition;
  }
};

std::string Fmt(const char* format, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), format, a, b, c);
  return buf;
}

Verdict MetricUnitValues() {
  Verdict v;
  const double s1 = StepScore(1);
  const double s2 = StepScore(2);
  const double s7 = StepScore(7);
  v.Check(s1 == 1.0, Fmt("score(1) = %.12f", s1));
  v.Check(std::abs(s2 - std::pow(2.0, -0.2)) <= 1e-9, Fmt("score(2) = %.12f", s2));
  v.Check(std::abs(s7 - 0.5) <= 1e-9, Fmt("score(7) = %.12f", s7));
  for (int r = 2; r <= 47; ++r) {
    v.Check(StepScore(r) < StepScore(r - 1), Fmt("score(%g) >= score(%g)", r, r - 1));
  }
  if (v.ok) {
    v.detail = Fmt("score(1)=%.1f score(2)=%.9f score(7)=%.9f, strictly decreasing "
                   "over ranks 1..47", s1, s2, s7);
  }
  return v;
}

// Retrain-from-scratch oracle: a fresh model fed every predictable step
// except the held-out one.
FrequencyModel RetrainWithout(const Corpus& corpus, StepKind kind, Method m,
                              const std::string& user, std::size_t index) {
  FrequencyModel model(kind, m);
  for (const auto& t : corpus) {
    for (std::size_t i = 1; i + 1 < t.steps.size(); ++i) {
      if (t.steps[i].kind != kind) continue;
      if (t.user_id == user && i == index) continue;
      model.Add(t.steps[i].concepts, NaiveContext(t, i, m));
    }
  }
  return model;
}

Verdict LeaveOneOutExactness() {
  Verdict v;
  std::mt19937_64 rng(2024);
  const auto tax = SmallTaxonomies(5, 8);
  std::size_t corpora = 0;
  std::size_t checked = 0;
  for (int trial = 0; trial < 25; ++trial) {
    auto corpus = RandomCorpus(rng, tax, 5, 7);
    ++corpora;
    for (StepKind kind : {kD, kJ}) {
      for (Method m : kAllMethods) {
        FrequencyModel model(kind, m);
        try {
          model = Train(corpus, kind, m);
        } catch (const EmptyCorpusError&) {
          continue;
        }
        const auto before = model;
        for (const auto& t : corpus) {
          for (std::size_t i = 1; i + 1 < t.steps.size(); ++i) {
            if (t.steps[i].kind != kind) continue;
            auto loo = LeaveOneOutRank(model, t, i, tax.For(kind));
            auto retrained = RetrainWithout(corpus, kind, m, t.user_id, i);
            auto expected = Rank(retrained, NaiveContext(t, i, m), tax.For(kind));
            v.Check(loo.hypotheses == expected.hypotheses &&
                        loo.backed_off == expected.backed_off,
                    "mismatch for " + t.user_id + " step " + std::to_string(i) +
                        " " + std::string(ToString(m)));
            v.Check(Indices(loo) ==
                        NaiveRanking(corpus, kind, m, NaiveContext(t, i, m),
                                     tax.For(kind), Excluded{t.user_id, i}),
                    "naive ordering differs for " + t.user_id);
            ++checked;
          }
        }
        v.Check(model == before, "model not restored after leave-one-out");
      }
    }
  }
  if (v.ok) {
    v.detail = std::to_string(corpora) + " random 5-user corpora, " +
               std::to_string(checked) +
               " held-out rankings equal to retrain-from-scratch";
  }
  return v;
}

std::vector<Context> ContextsToProbe(const Corpus& corpus, Method m,
                                     const TaxonomyPair& tax) {
  std::vector<Context> out{std::nullopt};
  for (const auto& t : corpus) {
    for (std::size_t i = 1; i + 1 < t.steps.size(); ++i) {
      out.push_back(NaiveContext(t, i, m));
    }
  }
  for (StepKind k : {kD, kJ}) {
    for (const auto& c : tax.For(k).concepts()) {
      out.push_back(std::vector<ConceptKey>{KeyOf(c)});
    }
  }
  return out;
}

Verdict ScaleInvariance() {
  Verdict v;
  std::mt19937_64 rng(77);
  const auto tax = SmallTaxonomies(5, 8);
  std::size_t checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    auto corpus = RandomCorpus(rng, tax, 8, 7);
    for (int k : {2, 5}) {
      Corpus scaled;
      for (int copy = 0; copy < k; ++copy) {
        for (auto t : corpus) {
          t.user_id += "#" + std::to_string(copy);
          scaled.push_back(std::move(t));
        }
      }
      for (StepKind kind : {kD, kJ}) {
        for (Method m : kAllMethods) {
          FrequencyModel base(kind, m);
          try {
            base = Train(corpus, kind, m);
          } catch (const EmptyCorpusError&) {
            continue;
          }
          auto big = Train(scaled, kind, m);
          for (const auto& ctx : ContextsToProbe(corpus, m, tax)) {
            auto a = Rank(base, ctx, tax.For(kind));
            auto b = Rank(big, ctx, tax.For(kind));
            v.Check(Indices(a) == Indices(b),
                    "order changed for k=" + std::to_string(k) + " " +
                        std::string(ToString(m)));
            ++checked;
          }
        }
      }
    }
  }
  if (v.ok) {
    v.detail = std::to_string(checked) +
               " rankings with identical order at k=2 and k=5";
  }
  return v;
}

Verdict BruteForceOracle() {
  Verdict v;
  std::mt19937_64 rng(99);
  const auto tax = SmallTaxonomies(5, 8);
  std::size_t checked = 0;
  int corpora = 0;
  while (corpora < 40) {
    auto corpus = RandomCorpus(rng, tax, 1 + static_cast<int>(rng() % 9), 8);
    std::size_t steps = 0;
    for (const auto& t : corpus) steps += t.steps.size();
    if (steps > 50) continue;
    ++corpora;
    for (StepKind kind : {kD, kJ}) {
      for (Method m : kAllMethods) {
        FrequencyModel model(kind, m);
        try {
          model = Train(corpus, kind, m);
        } catch (const EmptyCorpusError&) {
          continue;
        }
        for (const auto& ctx : ContextsToProbe(corpus, m, tax)) {
          v.Check(Indices(Rank(model, ctx, tax.For(kind))) ==
                      NaiveRanking(corpus, kind, m, ctx, tax.For(kind)),
                  "differs from enumeration for " + std::string(ToString(m)));
          ++checked;
        }
      }
    }
  }
  if (v.ok) {
    v.detail = std::to_string(checked) + " rankings over " +
               std::to_string(corpora) +
               " corpora of <= 50 steps match count-and-sort, all methods";
  }
  return v;
}

Verdict SyntheticOrdering() {
  Verdict v;
  const auto tax = SyntheticTaxonomies(17, 47);
  EvalOptions options;
  options.jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::ostringstream summary;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    GenParams p;
    p.seed = seed;
    p.n_users = 7500;
    const auto corpus = ApplyFilters(Generate(p)).corpus;
    double job_previous = 0;
    double diploma_last = 0;
    for (StepKind kind : {kD, kJ}) {
      const auto methods = ComparedMethods(kind);
      std::vector<EvalReport> reports;
      for (Method m : methods) {
        reports.push_back(Evaluate(corpus, tax, kind, m, options));
      }
      const double baseline = reports[0].mrr;
      for (const auto& r : reports) {
        const auto name = std::string(ToString(kind)) + "/" +
                          std::string(ToString(r.method)) + " seed " +
                          std::to_string(seed);
        if (r.method != Method::kBaseline) {
          v.Check(r.mrr >= baseline + 0.01,
                  name + Fmt(": MRR %.4f vs baseline %.4f", r.mrr, baseline));
        }
        const double size = static_cast<double>(tax.For(kind).size());
        v.Check(r.mean_rank > 1.0 && r.mean_rank < size,
                name + Fmt(": MR %.3f", r.mean_rank));
        v.Check(r.mrr > 0.0 && r.mrr <= 1.0, name + Fmt(": MRR %.4f", r.mrr));
        if (kind == kJ && r.method == Method::kPreviousStep) job_previous = r.mrr;
        if (kind == kD && r.method == Method::kLastDiploma) diploma_last = r.mrr;
      }
    }
    v.Check(job_previous > diploma_last,
            "seed " + std::to_string(seed) +
                Fmt(": job PreviousStep %.4f <= diploma LastDiploma %.4f",
                    job_previous, diploma_last));
    summary << (seed == 1 ? " seed " : "; seed ") << seed
            << Fmt(": job/PreviousStep %.3f > diploma/LastDiploma %.3f",
                   job_previous, diploma_last);
  }
  if (v.ok) {
    v.detail = "7500 users, conditioned methods beat baseline by >= 0.01," +
               summary.str();
  }
  return v;
}

Verdict FilteringRules() {
  Verdict v;
  const auto loaded = LoadCorpus(std::string(ROADS_TEST_DATA_DIR) +
                                     "/filter_fixture.jsonl",
                                 AliasTable{}, SmallTaxonomies(17, 47));
  const auto& s = loaded.stats;
  v.Check(s.dropped_profiles == 3, "dropped_profiles " + std::to_string(s.dropped_profiles));
  v.Check(s.dropped_steps == 7, "dropped_steps " + std::to_string(s.dropped_steps));
  v.Check(s.users == 3 && s.steps == 9,
          "kept " + std::to_string(s.users) + " users / " +
              std::to_string(s.steps) + " steps");
  const auto sample = LoadCorpus(std::string(ROADS_DATA_DIR) + "/sample_corpus.jsonl",
                                 LoadAliasFile(std::string(ROADS_DATA_DIR) +
                                               "/aliases.csv"),
                                 DataTaxonomies());
  v.Check(sample.stats.dropped_profiles == 1 && sample.stats.dropped_steps == 2,
          "sample corpus drop counts");
  if (v.ok) {
    v.detail = "fixture: dropped_profiles=3 dropped_steps=7 (3 users kept); "
               "sample: dropped_profiles=1 dropped_steps=2";
  }
  return v;
}

Verdict Determinism() {
  Verdict v;
  const std::string dir =
      std::filesystem::temp_directory_path().string() + "/";
  const std::string a = dir + "acceptance_gen_a.jsonl";
  const std::string b = dir + "acceptance_gen_b.jsonl";
  auto gen = [&](const std::string& out) {
    return RunCli({"gen", "--seed", "11", "--users", "2000", "--out", out}).code;
  };
  v.Check(gen(a) == 0 && gen(b) == 0, "gen failed");
  v.Check(!ReadAll(a).empty() && ReadAll(a) == ReadAll(b), "gen output differs");

  for (const char* kind : {"diploma", "job"}) {
    auto t1 = RunCli({"--json", "train", "--corpus", a, "--kind", kind});
    auto t2 = RunCli({"--json", "train", "--corpus", a, "--kind", kind});
    v.Check(t1.code == 0 && t1.out == t2.out,
            std::string("train output differs for ") + kind);
    auto e1 = RunCli({"--json", "evaluate", "--corpus", a, "--kind", kind,
                      "--jobs", "1"});
    auto e1b = RunCli({"--json", "evaluate", "--corpus", a, "--kind", kind,
                       "--jobs", "1"});
    auto e8 = RunCli({"--json", "evaluate", "--corpus", a, "--kind", kind,
                      "--jobs", "8"});
    v.Check(e1.code == 0 && e1.out == e1b.out,
            std::string("evaluate differs across runs for ") + kind);
    v.Check(e1.out == e8.out,
            std::string("evaluate differs for --jobs 1 vs 8 on ") + kind);
    auto table_one = RunCli({"evaluate", "--corpus", a, "--kind", kind, "--jobs", "1"});
    auto table_eight = RunCli({"evaluate", "--corpus", a, "--kind", kind, "--jobs", "8"});
    v.Check(table_one.out == table_eight.out, "evaluate table differs across --jobs");
  }
  if (v.ok) {
    v.detail = "gen, train and evaluate byte-identical across runs and "
               "--jobs 1 vs 8";
  }
  return v;
}

Verdict ConfidenceFormula() {
  Verdict v;
  const std::vector<double> scores{1.0, 0.5, 0.5, 1.0};
  const double mean = 0.75;
  const double s = std::sqrt(((0.25 * 0.25) * 4) / 3.0);
  const double half = 1.96 * s / std::sqrt(4.0);
  auto ci = NormalCi95(scores);
  v.Check(std::abs(ci.low - (mean - half)) <= 1e-9, Fmt("low %.12f", ci.low));
  v.Check(std::abs(ci.high - (mean + half)) <= 1e-9, Fmt("high %.12f", ci.high));
  if (v.ok) {
    v.detail = Fmt("[%.9f, %.9f] = 0.75 -/+ %.9f", ci.low, ci.high, half);
  }
  return v;
}

// Twelve job concepts follow concept 30 three times each; the held-out user
// goes 30 -> 0, which nobody else does, so its truth lands right after them.
Verdict ReorientationDetector() {
  Verdict v;
  const auto tax = SmallTaxonomies(17, 47);
  Corpus corpus;
  for (int k = 1; k <= 12; ++k) {
    for (int rep = 0; rep < 3; ++rep) {
      corpus.push_back(MakeTrajectory(
          tax, "peer-" + std::to_string(k) + "-" + std::to_string(rep),
          {{kJ, {30}}, {kJ, {k}}, {kJ, {40}}}));
    }
  }
  corpus.push_back(MakeTrajectory(tax, "tourism-to-care",
                                  {{kJ, {30}}, {kJ, {0}}, {kJ, {40}}}));
  auto find = [](const std::vector<ReorientationFlag>& flags) {
    for (const auto& f : flags) {
      if (f.user_id == "tourism-to-care") return &f - flags.data();
    }
    return std::ptrdiff_t{-1};
  };
  const auto at6 = DetectReorientations(corpus, tax, kJ, Method::kPreviousStep,
                                        {}, 6);
  const auto at13 = DetectReorientations(corpus, tax, kJ,
                                         Method::kPreviousStep, {}, 13);
  const auto i6 = find(at6);
  v.Check(i6 >= 0, "not flagged at threshold 6");
  if (i6 >= 0) {
    v.Check(at6[i6].rank_of_truth == 13,
            "truth rank " + std::to_string(at6[i6].rank_of_truth));
  }
  v.Check(find(at13) < 0, "flagged at threshold 13");
  v.Check(tax.job.size() == 47, "taxonomy size");
  if (v.ok) v.detail = "truth at 13/47: flagged at 6, not at 13";
  return v;
}

}  // namespace
}  // namespace roads::testing

int main() {
  using roads::testing::Verdict;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"metric-unit-values", roads::testing::MetricUnitValues},
      {"leave-one-out-exactness", roads::testing::LeaveOneOutExactness},
      {"scale-invariance", roads::testing::ScaleInvariance},
      {"brute-force-ranking-oracle", roads::testing::BruteForceOracle},
      {"synthetic-method-ordering", roads::testing::SyntheticOrdering},
      {"filtering-rules", roads::testing::FilteringRules},
      {"determinism", roads::testing::Determinism},
      {"confidence-interval", roads::testing::ConfidenceFormula},
      {"reorientation-detector", roads::testing::ReorientationDetector},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Verdict v;
    try {
      v = run();
    } catch (const std::exception& e) {
      v.ok = false;
      v.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s  %-28s %s\n", v.ok ? "PASS" : "FAIL", name, v.detail.c_str());
    std::fflush(stdout);
    failed += v.ok ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
