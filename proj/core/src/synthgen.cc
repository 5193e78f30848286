#include "roads/synthgen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "roads/errors.h"

namespace roads {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Only the raw 64-bit engine output is used, so streams are identical
// across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  bool Bernoulli(double p) { return Uniform() < p; }
  // Uniform integer in [lo, hi].
  int Between(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<int>(engine_() % span);
  }
  int Poisson(double lambda) {
    const double limit = std::exp(-lambda);
    int k = 0;
    double p = Uniform();
    while (p > limit) {
      ++k;
      p *= Uniform();
    }
    return k;
  }
  int Binomial(int n, double p) {
    int k = 0;
    for (int i = 0; i < n; ++i) k += Bernoulli(p) ? 1 : 0;
    return k;
  }

 private:
  std::mt19937_64 engine_;
};

class Zipf {
 public:
  Zipf(int n, double exponent) : cdf_(static_cast<std::size_t>(n)) {
    double total = 0;
    for (int i = 0; i < n; ++i) {
      total += 1.0 / std::pow(static_cast<double>(i + 1), exponent);
      cdf_[static_cast<std::size_t>(i)] = total;
    }
    for (auto& c : cdf_) c /= total;
  }

  int Draw(Rng& rng) const {
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), rng.Uniform());
    if (it == cdf_.end()) --it;
    return static_cast<int>(it - cdf_.begin());
  }

  // Draw conditioned on being different from `excluded`.
  int DrawOther(Rng& rng, int excluded) const {
    if (cdf_.size() < 2) return Draw(rng);
    for (;;) {
      int k = Draw(rng);
      if (k != excluded) return k;
    }
  }

 private:
  std::vector<double> cdf_;
};

std::string TwoDigits(const char* prefix, int index) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%s%02d", prefix, index);
  return buf;
}

Date AddMonths(Date d, int months) {
  int total = d.year * 12 + (d.month - 1) + months;
  return Date{total / 12, total % 12 + 1, std::nullopt};
}

constexpr const char* kDiplomaLevels[] = {"high school diploma", "bachelor",
                                          "master", "doctorate"};

}  // namespace

void GenParams::Validate() const {
  auto probability = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw InvalidArgumentError(std::string(name) + " must be in [0, 1]");
    }
  };
  probability(continuity_job, "continuity_job");
  probability(continuity_diploma, "continuity_diploma");
  probability(reorientation_rate, "reorientation_rate");
  probability(diploma_fraction, "diploma_fraction");
  probability(unclassified_rate, "unclassified_rate");
  probability(multi_concept_rate, "multi_concept_rate");
  if (n_users < 1) throw InvalidArgumentError("n_users must be >= 1");
  if (diploma_concepts < 1 || job_concepts < 1) {
    throw InvalidArgumentError("concept counts must be >= 1");
  }
  if (!(mean_steps >= 3.0)) {
    throw InvalidArgumentError("mean_steps must be >= 3");
  }
  if (!(concept_popularity >= 0.0) || !std::isfinite(concept_popularity)) {
    throw InvalidArgumentError("concept_popularity must be >= 0");
  }
}

std::string SyntheticField(StepKind kind, int index) {
  return TwoDigits(kind == StepKind::kDiploma ? "diploma-field-" : "job-field-",
                   index);
}

TaxonomyPair SyntheticTaxonomies(int diploma_concepts, int job_concepts) {
  auto build = [](StepKind kind, int n) {
    std::vector<ConceptId> concepts;
    std::map<FieldTag, std::vector<int>> fields;
    for (int i = 0; i < n; ++i) {
      concepts.push_back(
          {kind, i,
           TwoDigits(kind == StepKind::kDiploma ? "Diploma domain "
                                                : "Job domain ",
                     i)});
      fields[FieldTag(SyntheticField(kind, i))] = {i};
    }
    return Taxonomy(kind, std::move(concepts), std::move(fields));
  };
  return {build(StepKind::kDiploma, diploma_concepts),
          build(StepKind::kJob, job_concepts)};
}

Corpus Generate(const GenParams& params) {
  params.Validate();
  const auto taxonomies =
      SyntheticTaxonomies(params.diploma_concepts, params.job_concepts);
  const Zipf diploma_zipf(params.diploma_concepts, params.concept_popularity);
  const Zipf job_zipf(params.job_concepts, params.concept_popularity);

  // Diploma concept d leads to job concept floor(d * jobs / diplomas), which
  // spreads the bridge targets over the job popularity ranks.
  auto bridge = [&](int diploma) {
    return static_cast<int>(static_cast<std::int64_t>(diploma) *
                            params.job_concepts / params.diploma_concepts);
  };

  Corpus corpus;
  corpus.reserve(static_cast<std::size_t>(params.n_users));
  for (int u = 0; u < params.n_users; ++u) {
    Rng rng(SplitMix64(params.seed ^ SplitMix64(static_cast<std::uint64_t>(u))));
    Trajectory trajectory;
    char id[32];
    std::snprintf(id, sizeof(id), "u%06d", u + 1);
    trajectory.user_id = id;

    const int raw_steps = 3 + rng.Poisson(params.mean_steps - 3.0);
    const int noise = std::min(rng.Binomial(raw_steps, params.unclassified_rate),
                               raw_steps - 3);
    const int classified = raw_steps - noise;
    const int diplomas =
        1 + rng.Binomial(classified - 2, params.diploma_fraction);

    // Positions of the unclassifiable steps within the raw sequence.
    std::vector<bool> is_noise(static_cast<std::size_t>(raw_steps), false);
    for (int placed = 0; placed < noise;) {
      auto pos = static_cast<std::size_t>(rng.Between(0, raw_steps - 1));
      if (!is_noise[pos]) {
        is_noise[pos] = true;
        ++placed;
      }
    }

    Date cursor{rng.Between(1985, 2010), rng.Between(1, 12), std::nullopt};
    int classified_seen = 0;
    int diplomas_seen = 0;
    int previous = -1;
    int last_diploma = -1;
    for (int r = 0; r < raw_steps; ++r) {
      const bool in_diploma_phase = classified_seen < diplomas;
      const StepKind kind =
          in_diploma_phase ? StepKind::kDiploma : StepKind::kJob;
      Step step;
      step.kind = kind;
      step.start = cursor;
      const int months = kind == StepKind::kDiploma ? rng.Between(9, 36)
                                                    : rng.Between(6, 60);
      step.end = AddMonths(cursor, months - 1);
      cursor = AddMonths(cursor, months + rng.Between(0, 6));

      if (is_noise[static_cast<std::size_t>(r)]) {
        step.title = "unlisted activity";
        step.fields = {FieldTag("unlisted-activity")};
        trajectory.steps.push_back(std::move(step));
        continue;
      }

      const bool first_job = kind == StepKind::kJob && previous >= 0 &&
                             classified_seen == diplomas;
      const int n_concepts = kind == StepKind::kDiploma ? params.diploma_concepts
                                                        : params.job_concepts;
      const auto& zipf = kind == StepKind::kDiploma ? diploma_zipf : job_zipf;
      const double continuity = kind == StepKind::kDiploma
                                    ? params.continuity_diploma
                                    : params.continuity_job;
      int chosen = 0;
      // The diploma after the general first one starts a specialization.
      const bool specialization = params.general_first_diploma &&
                                  kind == StepKind::kDiploma &&
                                  diplomas_seen == 1;
      if (previous < 0 || specialization) {
        chosen = zipf.Draw(rng);
      } else if (rng.Bernoulli(params.reorientation_rate)) {
        chosen = rng.Between(0, n_concepts - 1);
      } else {
        const int kept = first_job ? bridge(last_diploma) : previous;
        chosen = rng.Bernoulli(continuity) ? kept : zipf.DrawOther(rng, kept);
      }

      std::vector<FieldTag> fields{FieldTag(SyntheticField(kind, chosen))};
      if (kind == StepKind::kJob && n_concepts > 1 &&
          rng.Bernoulli(params.multi_concept_rate)) {
        int other = rng.Between(0, n_concepts - 2);
        if (other >= chosen) ++other;
        fields.emplace_back(SyntheticField(kind, other));
      }
      std::sort(fields.begin(), fields.end());
      step.fields = std::move(fields);
      step.concepts = ClassifyStep(step.fields, taxonomies.For(kind));

      if (kind == StepKind::kDiploma) {
        const int level = std::min(diplomas_seen, 3);
        step.title = std::string(kDiplomaLevels[level]) + " in diploma domain " +
                     TwoDigits("", chosen);
        ++diplomas_seen;
        last_diploma = chosen;
      } else {
        step.title = "position in job domain " + TwoDigits("", chosen);
      }
      previous = chosen;
      ++classified_seen;
      trajectory.steps.push_back(std::move(step));
    }
    // The most recent step is still ongoing half of the time.
    if (rng.Bernoulli(0.5)) trajectory.steps.back().end.reset();
    corpus.push_back(std::move(trajectory));
  }
  return corpus;
}

}  // namespace roads
