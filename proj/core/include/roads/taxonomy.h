#ifndef ROADS_TAXONOMY_H_
#define ROADS_TAXONOMY_H_

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roads/types.h"

namespace roads {

// Field-to-concept mapping for one step domain.
class Taxonomy {
 public:
  Taxonomy() = default;
  // Throws InvalidArgumentError when the concept list has duplicate indices
  // or labels, or a field maps to an unknown concept or to nothing.
  Taxonomy(StepKind domain, std::vector<ConceptId> concepts,
           std::map<FieldTag, std::vector<int>> field_map);

  StepKind domain() const { return domain_; }
  std::size_t size() const { return concepts_.size(); }
  // Sorted by index.
  const std::vector<ConceptId>& concepts() const { return concepts_; }
  const std::map<FieldTag, std::vector<int>>& field_map() const {
    return field_map_;
  }

  bool Contains(const ConceptKey& key) const;
  const ConceptId* Find(int index) const;
  // Case-insensitive label lookup.
  const ConceptId* FindByLabel(std::string_view label) const;
  const ConceptId& At(int index) const;

  friend bool operator==(const Taxonomy&, const Taxonomy&) = default;

 private:
  StepKind domain_ = StepKind::kDiploma;
  std::vector<ConceptId> concepts_;
  std::map<FieldTag, std::vector<int>> field_map_;
};

// The diploma and job taxonomies used together by a corpus.
struct TaxonomyPair {
  Taxonomy diploma;
  Taxonomy job;

  const Taxonomy& For(StepKind kind) const {
    return kind == StepKind::kDiploma ? diploma : job;
  }
};

// Union of the concepts of every field, ordered by number of supporting
// fields (descending) then concept index. Unknown fields are ignored.
std::vector<ConceptId> ClassifyStep(std::span<const FieldTag> fields,
                                    const Taxonomy& taxonomy);

// CSV with header `domain,concept_index,concept_label,field`. The stream may
// hold rows for both domains; only rows for `domain` are kept.
Taxonomy ReadTaxonomyCsv(std::istream& in, StepKind domain);
Taxonomy LoadTaxonomyFile(const std::string& path, StepKind domain);
void WriteTaxonomyCsv(std::ostream& out, const Taxonomy& taxonomy);

// Minimal RFC-4180 field splitting shared by the CSV readers.
std::vector<std::string> SplitCsvLine(std::string_view line);
std::string CsvEscape(std::string_view value);

}  // namespace roads

#endif  // ROADS_TAXONOMY_H_
