#include "roads/taxonomy.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "roads/errors.h"

namespace roads {
namespace {

std::string Lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string Trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

Taxonomy::Taxonomy(StepKind domain, std::vector<ConceptId> concepts,
                   std::map<FieldTag, std::vector<int>> field_map)
    : domain_(domain),
      concepts_(std::move(concepts)),
      field_map_(std::move(field_map)) {
  std::sort(concepts_.begin(), concepts_.end(),
            [](const ConceptId& a, const ConceptId& b) {
              return a.index < b.index;
            });
  std::set<std::string> labels;
  for (std::size_t i = 0; i < concepts_.size(); ++i) {
    auto& c = concepts_[i];
    c.domain = domain_;
    if (c.index < 0) {
      throw InvalidArgumentError("negative concept index");
    }
    if (i > 0 && concepts_[i - 1].index == c.index) {
      throw InvalidArgumentError("duplicate concept index " +
                                 std::to_string(c.index));
    }
    if (!labels.insert(Lower(c.label)).second) {
      throw InvalidArgumentError("duplicate concept label '" + c.label + "'");
    }
  }
  for (auto& [field, indices] : field_map_) {
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    if (indices.empty()) {
      throw InvalidArgumentError("field '" + field.label() +
                                 "' maps to no concept");
    }
    for (int index : indices) {
      if (!Find(index)) {
        throw InvalidArgumentError("field '" + field.label() +
                                   "' maps to unknown concept " +
                                   std::to_string(index));
      }
    }
  }
}

bool Taxonomy::Contains(const ConceptKey& key) const {
  return key.domain == domain_ && Find(key.index) != nullptr;
}

const ConceptId* Taxonomy::Find(int index) const {
  auto it = std::lower_bound(
      concepts_.begin(), concepts_.end(), index,
      [](const ConceptId& c, int i) { return c.index < i; });
  if (it == concepts_.end() || it->index != index) return nullptr;
  return &*it;
}

const ConceptId* Taxonomy::FindByLabel(std::string_view label) const {
  auto wanted = Lower(Trim(label));
  for (const auto& c : concepts_) {
    if (Lower(c.label) == wanted) return &c;
  }
  return nullptr;
}

const ConceptId& Taxonomy::At(int index) const {
  const ConceptId* c = Find(index);
  if (!c) {
    throw ConceptNotInTaxonomyError(
        "concept " + std::to_string(index) + " not in " +
        std::string(ToString(domain_)) + " taxonomy");
  }
  return *c;
}

std::vector<ConceptId> ClassifyStep(std::span<const FieldTag> fields,
                                    const Taxonomy& taxonomy) {
  // Count distinct supporting fields per concept.
  std::set<FieldTag> distinct(fields.begin(), fields.end());
  std::map<int, int> support;
  for (const auto& field : distinct) {
    auto it = taxonomy.field_map().find(field);
    if (it == taxonomy.field_map().end()) continue;
    for (int index : it->second) ++support[index];
  }
  std::vector<std::pair<int, int>> ranked(support.begin(), support.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  std::vector<ConceptId> out;
  out.reserve(ranked.size());
  for (const auto& [index, count] : ranked) out.push_back(taxonomy.At(index));
  return out;
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  if (quoted) throw ParseError(0, "unterminated quoted CSV field");
  cells.push_back(std::move(cell));
  return cells;
}

std::string CsvEscape(std::string_view value) {
  if (value.find_first_of(",\"\n") == std::string_view::npos) {
    return std::string(value);
  }
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

Taxonomy ReadTaxonomyCsv(std::istream& in, StepKind domain) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::map<int, std::string> labels;
  std::map<FieldTag, std::vector<int>> field_map;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::vector<std::string> cells;
    try {
      cells = SplitCsvLine(line);
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
    if (!header_seen) {
      header_seen = true;
      if (cells.size() != 4 || Trim(cells[0]) != "domain" ||
          Trim(cells[1]) != "concept_index" ||
          Trim(cells[2]) != "concept_label" || Trim(cells[3]) != "field") {
        throw ParseError(line_no,
                         "expected header domain,concept_index,concept_label,"
                         "field");
      }
      continue;
    }
    if (cells.size() != 4) throw ParseError(line_no, "expected 4 columns");
    StepKind row_domain;
    int index = 0;
    try {
      row_domain = ParseStepKind(Trim(cells[0]));
      index = std::stoi(Trim(cells[1]));
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
    if (row_domain != domain) continue;
    auto label = Trim(cells[2]);
    if (label.empty()) throw ParseError(line_no, "empty concept label");
    auto [it, inserted] = labels.emplace(index, label);
    if (!inserted && it->second != label) {
      throw ParseError(line_no, "concept " + std::to_string(index) +
                                    " has two labels");
    }
    auto field = Trim(cells[3]);
    if (!field.empty()) {
      try {
        field_map[FieldTag(field)].push_back(index);
      } catch (const InvalidArgumentError& e) {
        throw ParseError(line_no, e.what());
      }
    }
  }
  std::vector<ConceptId> concepts;
  for (auto& [index, label] : labels) {
    concepts.push_back({domain, index, label});
  }
  try {
    return Taxonomy(domain, std::move(concepts), std::move(field_map));
  } catch (const InvalidArgumentError& e) {
    throw ParseError(0, e.what());
  }
}

Taxonomy LoadTaxonomyFile(const std::string& path, StepKind domain) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open taxonomy file '" + path + "'");
  return ReadTaxonomyCsv(in, domain);
}

void WriteTaxonomyCsv(std::ostream& out, const Taxonomy& taxonomy) {
  out << "domain,concept_index,concept_label,field\n";
  std::map<int, std::vector<std::string>> fields_of;
  for (const auto& [field, indices] : taxonomy.field_map()) {
    for (int index : indices) fields_of[index].push_back(field.label());
  }
  const auto domain = ToString(taxonomy.domain());
  for (const auto& c : taxonomy.concepts()) {
    auto it = fields_of.find(c.index);
    if (it == fields_of.end()) {
      out << domain << ',' << c.index << ',' << CsvEscape(c.label) << ",\n";
      continue;
    }
    for (const auto& field : it->second) {
      out << domain << ',' << c.index << ',' << CsvEscape(c.label) << ','
          << CsvEscape(field) << '\n';
    }
  }
}

}  // namespace roads
