#include "roads/ingest.h"

#include <algorithm>
#include <fstream>
#include <set>

#include "roads/errors.h"

namespace roads {
namespace {

// Simple case mapping for the scripts résumé titles actually use.
char32_t ToLower(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 'A' && cp <= 'Z') ? cp + 0x20 : cp;
  }
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp == 0x130) return 'i';
  if (cp >= 0x100 && cp <= 0x137 && cp != 0x131) return cp | 1;  // even = upper
  if (cp >= 0x139 && cp <= 0x148) return (cp & 1) ? cp + 1 : cp;
  if (cp >= 0x14A && cp <= 0x177) return cp | 1;
  if (cp == 0x178) return 0xFF;
  if (cp >= 0x179 && cp <= 0x17E) return (cp & 1) ? cp + 1 : cp;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  return cp;
}

// Decodes one UTF-8 sequence starting at `i`; invalid bytes pass through as
// themselves so no input is ever rejected here.
char32_t Decode(std::string_view s, std::size_t& i) {
  auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) {
    return i + k < s.size() &&
           (static_cast<unsigned char>(s[i + k]) & 0xC0) == 0x80;
  };
  auto byte = [&](std::size_t k) {
    return static_cast<char32_t>(static_cast<unsigned char>(s[i + k]) & 0x3F);
  };
  if (b0 < 0x80) {
    ++i;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && cont(1)) {
    char32_t cp = ((b0 & 0x1F) << 6) | byte(1);
    i += 2;
    return cp;
  }
  if ((b0 & 0xF0) == 0xE0 && cont(1) && cont(2)) {
    char32_t cp = ((b0 & 0x0F) << 12) | (byte(1) << 6) | byte(2);
    i += 3;
    return cp;
  }
  if ((b0 & 0xF8) == 0xF0 && cont(1) && cont(2) && cont(3)) {
    char32_t cp = ((b0 & 0x07) << 18) | (byte(1) << 12) | (byte(2) << 6) |
                  byte(3);
    i += 4;
    return cp;
  }
  ++i;
  return b0;
}

void Encode(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool IsStripped(char32_t cp) {
  switch (cp) {
    case '.': case ',': case ';': case ':': case '/':
    case '(': case ')': case '\'': case '"': case '-':
      return true;
    default:
      return false;
  }
}

bool IsSpace(char32_t cp) {
  return cp == ' ' || cp == '\t' || cp == '\n' || cp == '\r' || cp == '\v' ||
         cp == '\f' || cp == 0xA0;
}

}  // namespace

std::string NormalizeKey(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (std::size_t i = 0; i < raw.size();) {
    char32_t cp = Decode(raw, i);
    if (IsStripped(cp)) continue;
    if (IsSpace(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    Encode(ToLower(cp), out);
  }
  return out;
}

void AliasTable::Add(std::string_view key, std::string_view canonical,
                     StepKind kind) {
  std::string canon(canonical);
  auto known = kind_of_canonical_.find(canon);
  if (known != kind_of_canonical_.end() && known->second != kind) {
    throw InvalidArgumentError("canonical title '" + canon +
                               "' assigned two kinds");
  }
  kind_of_canonical_.emplace(canon, kind);
  for (const auto& k : {NormalizeKey(key), NormalizeKey(canonical)}) {
    if (k.empty()) throw InvalidArgumentError("empty alias key");
    auto [it, inserted] = entries_.emplace(k, Entry{canon, kind});
    if (!inserted && it->second.canonical != canon) {
      throw InvalidArgumentError("alias key '" + k + "' maps to both '" +
                                 it->second.canonical + "' and '" + canon +
                                 "'");
    }
  }
}

const AliasTable::Entry* AliasTable::Lookup(
    std::string_view normalized_key) const {
  auto it = entries_.find(normalized_key);
  return it == entries_.end() ? nullptr : &it->second;
}

AliasTable ReadAliasCsv(std::istream& in) {
  AliasTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cells;
    try {
      cells = SplitCsvLine(line);
    } catch (const ParseError& e) {
      throw ParseError(line_no, e.what());
    }
    if (!header_seen) {
      header_seen = true;
      if (cells.size() != 3 || cells[0] != "key" || cells[1] != "canonical" ||
          cells[2] != "kind") {
        throw ParseError(line_no, "expected header key,canonical,kind");
      }
      continue;
    }
    if (cells.size() != 3) throw ParseError(line_no, "expected 3 columns");
    try {
      table.Add(cells[0], cells[1], ParseStepKind(cells[2]));
    } catch (const InvalidArgumentError& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return table;
}

AliasTable LoadAliasFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open alias file '" + path + "'");
  return ReadAliasCsv(in);
}

NormalizedTitle NormalizeTitle(std::string_view raw, const AliasTable& aliases,
                               std::optional<StepKind> kind_hint) {
  auto key = NormalizeKey(raw);
  if (key.empty()) {
    throw InvalidArgumentError("title '" + std::string(raw) +
                               "' is empty after normalization");
  }
  if (const auto* hit = aliases.Lookup(key)) {
    return {hit->canonical, hit->kind};
  }
  if (!kind_hint) {
    throw MissingKindError("title '" + std::string(raw) +
                           "' is not in the alias table and has no kind");
  }
  return {std::move(key), *kind_hint};
}

Step BuildStep(const RawStep& raw, const AliasTable& aliases,
               const TaxonomyPair& taxonomies) {
  std::optional<StepKind> hint;
  if (raw.kind_hint) hint = ParseStepKind(*raw.kind_hint);
  auto normalized = NormalizeTitle(raw.raw_title, aliases, hint);

  Step step;
  step.kind = normalized.kind;
  step.title = std::move(normalized.title);
  step.start = raw.start;
  step.end = raw.end;
  step.location = raw.location;
  step.description = raw.description;
  std::set<FieldTag> fields;
  for (const auto& f : raw.raw_fields) {
    if (f.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    fields.emplace(f);
  }
  step.fields.assign(fields.begin(), fields.end());
  step.concepts = ClassifyStep(step.fields, taxonomies.For(step.kind));
  if (step.concepts.size() > kMaxConceptsPerStep) {
    step.concepts.resize(kMaxConceptsPerStep);
  }
  ValidateStep(step);
  return step;
}

LoadedCorpus ApplyFilters(Corpus corpus) {
  LoadedCorpus out;
  for (auto& trajectory : corpus) {
    auto& steps = trajectory.steps;
    auto unclassified = std::remove_if(
        steps.begin(), steps.end(),
        [](const Step& s) { return s.concepts.empty(); });
    out.stats.dropped_steps +=
        static_cast<std::size_t>(std::distance(unclassified, steps.end()));
    steps.erase(unclassified, steps.end());
    if (steps.size() < kMinStepsPerProfile) {
      ++out.stats.dropped_profiles;
      continue;
    }
    SortSteps(trajectory);
    out.corpus.push_back(std::move(trajectory));
  }
  auto counts = ComputeCorpusStats(out.corpus);
  counts.dropped_profiles = out.stats.dropped_profiles;
  counts.dropped_steps = out.stats.dropped_steps;
  out.stats = counts;
  return out;
}

LoadedCorpus LoadCorpus(const std::string& path, const AliasTable& aliases,
                        const TaxonomyPair& taxonomies) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file '" + path + "'");
  return ReadCorpus(in, aliases, taxonomies);
}

CorpusStats ComputeCorpusStats(const Corpus& corpus) {
  CorpusStats stats;
  stats.users = corpus.size();
  for (const auto& t : corpus) {
    for (const auto& s : t.steps) {
      ++stats.steps;
      if (s.kind == StepKind::kDiploma) {
        ++stats.diploma_steps;
      } else {
        ++stats.job_steps;
      }
    }
  }
  return stats;
}

}  // namespace roads
