#ifndef ROADS_INGEST_H_
#define ROADS_INGEST_H_

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "roads/taxonomy.h"
#include "roads/types.h"

namespace roads {

// Lookup key for a title: lowercase, the characters . , ; : / ( ) ' " -
// removed, whitespace collapsed to single spaces and trimmed. Lowercasing
// covers ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic capitals.
std::string NormalizeKey(std::string_view raw);

// Maps normalized title keys to canonical titles, each with a step kind.
class AliasTable {
 public:
  AliasTable() = default;

  // Registers `key` (normalized here) as an alias of `canonical`. The
  // canonical title's own key is registered too, so normalization is
  // idempotent. Throws InvalidArgumentError on conflicting entries.
  void Add(std::string_view key, std::string_view canonical, StepKind kind);

  struct Entry {
    std::string canonical;
    StepKind kind;
  };
  const Entry* Lookup(std::string_view normalized_key) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Entry, std::less<>> entries_;
  std::map<std::string, StepKind, std::less<>> kind_of_canonical_;
};

// CSV `key,canonical,kind` with that header line.
AliasTable ReadAliasCsv(std::istream& in);
AliasTable LoadAliasFile(const std::string& path);

struct NormalizedTitle {
  std::string title;
  StepKind kind;

  friend bool operator==(const NormalizedTitle&,
                         const NormalizedTitle&) = default;
};

// Alias hit: canonical title and its kind. Miss: the normalized key with
// `kind_hint`; MissingKindError when there is no hint.
NormalizedTitle NormalizeTitle(std::string_view raw, const AliasTable& aliases,
                               std::optional<StepKind> kind_hint = {});

// One step exactly as read from a corpus line.
struct RawStep {
  std::optional<std::string> kind_hint;
  std::string raw_title;
  Date start;
  std::optional<Date> end;
  std::optional<std::string> location;
  std::optional<std::string> description;
  std::vector<std::string> raw_fields;
};

struct RawTrajectory {
  std::string user_id;
  std::vector<RawStep> steps;
  std::vector<Skill> skills;
};

struct CorpusStats {
  std::size_t users = 0;
  std::size_t steps = 0;
  std::size_t diploma_steps = 0;
  std::size_t job_steps = 0;
  std::size_t dropped_profiles = 0;
  // Steps removed because they could not be classified.
  std::size_t dropped_steps = 0;

  // steps / users, 0 for an empty corpus.
  double mean_steps_per_user() const {
    return users == 0 ? 0.0
                      : static_cast<double>(steps) / static_cast<double>(users);
  }

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

struct LoadedCorpus {
  Corpus corpus;
  CorpusStats stats;
};

inline constexpr std::size_t kMinStepsPerProfile = 3;

// Parses one JSONL corpus line. Throws ParseError (line number attached).
RawTrajectory ParseCorpusLine(std::string_view line, std::size_t line_no);

// Normalizes and classifies one raw step. Concepts are capped at
// kMaxConceptsPerStep; an unclassifiable step comes back with none.
Step BuildStep(const RawStep& raw, const AliasTable& aliases,
               const TaxonomyPair& taxonomies);

// Drops unclassified steps, then profiles left with fewer than three steps,
// and sorts the remaining steps chronologically.
LoadedCorpus ApplyFilters(Corpus corpus);

LoadedCorpus ReadCorpus(std::istream& in, const AliasTable& aliases,
                        const TaxonomyPair& taxonomies);
LoadedCorpus LoadCorpus(const std::string& path, const AliasTable& aliases,
                        const TaxonomyPair& taxonomies);

CorpusStats ComputeCorpusStats(const Corpus& corpus);

// Writes the corpus back in the JSONL input format, one user per line.
void WriteCorpus(std::ostream& out, const Corpus& corpus);
std::string TrajectoryToJsonLine(const Trajectory& trajectory);

std::string StatsToJson(const CorpusStats& stats);

}  // namespace roads

#endif  // ROADS_INGEST_H_
