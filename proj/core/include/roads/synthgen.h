#ifndef ROADS_SYNTHGEN_H_
#define ROADS_SYNTHGEN_H_

#include <cstdint>
#include <string>

#include "roads/taxonomy.h"
#include "roads/types.h"

namespace roads {

// Knobs of the synthetic trajectory generator. Each user gets a diploma
// phase followed by a job phase. Every step either jumps to a uniformly
// random concept (reorientation), keeps the previous step's concept
// (continuity) or changes to another one drawn from a Zipf popularity law. The first
// job "keeps" the last diploma through a fixed diploma-to-job mapping.
struct GenParams {
  std::uint64_t seed = 1;
  int n_users = 1000;
  int diploma_concepts = 17;
  int job_concepts = 47;
  // Mean raw steps per user, unclassifiable steps included.
  double mean_steps = 6.9;
  double continuity_job = 0.75;
  double continuity_diploma = 0.55;
  double reorientation_rate = 0.1;
  // Zipf exponent of concept popularity (concept index 0 is most popular).
  double concept_popularity = 1.0;
  // Share of the classified steps beyond the first and last that are
  // diplomas; every user has at least one diploma and one job.
  double diploma_fraction = 0.378;
  // Probability that a raw step carries no known field (dropped at ingest).
  // Never takes a user below three classified steps.
  double unclassified_rate = 0.2;
  // The first diploma is general education (high school): the next diploma
  // is a fresh specialization draw instead of a continuity step.
  bool general_first_diploma = true;
  // Probability that a job step carries a second, uniformly drawn concept.
  double multi_concept_rate = 0.1;

  // Throws InvalidArgumentError.
  void Validate() const;
};

// Concept i is labelled "Diploma domain 07" / "Job domain 07" and mapped
// from the single field "diploma-field-07" / "job-field-07".
TaxonomyPair SyntheticTaxonomies(int diploma_concepts, int job_concepts);
std::string SyntheticField(StepKind kind, int index);

// Deterministic: the same params always give the same corpus. Users are
// "u000001", "u000002", ... and each draws from its own sub-seeded stream.
// Unclassifiable steps come back with empty concept lists; run the result
// through ApplyFilters (or write and re-load it) before modeling.
Corpus Generate(const GenParams& params);

}  // namespace roads

#endif  // ROADS_SYNTHGEN_H_
