#include "roads/types.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>

#include "roads/errors.h"

namespace roads {

std::string_view ToString(StepKind kind) {
  return kind == StepKind::kDiploma ? "diploma" : "job";
}

StepKind ParseStepKind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "diploma") return StepKind::kDiploma;
  if (lower == "job") return StepKind::kJob;
  throw InvalidArgumentError("unknown step kind '" + std::string(text) +
                             "' (expected diploma or job)");
}

FieldTag::FieldTag(std::string_view raw) {
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !label_.empty();
      continue;
    }
    if (pending_space) label_.push_back(' ');
    pending_space = false;
    label_.push_back(static_cast<char>(std::tolower(c)));
  }
  if (label_.empty()) throw InvalidArgumentError("empty field tag");
}

namespace {

int ParseInt(std::string_view text, std::string_view whole) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(),
                                   value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InvalidArgumentError("bad date '" + std::string(whole) + "'");
  }
  return value;
}

}  // namespace

Date Date::Parse(std::string_view text) {
  Date date;
  auto first = text.find('-');
  if (first != 4) {
    throw InvalidArgumentError("bad date '" + std::string(text) +
                               "' (expected YYYY-MM)");
  }
  date.year = ParseInt(text.substr(0, 4), text);
  auto rest = text.substr(5);
  auto second = rest.find('-');
  date.month = ParseInt(rest.substr(0, second), text);
  if (second != std::string_view::npos) {
    date.day = ParseInt(rest.substr(second + 1), text);
    if (*date.day < 1 || *date.day > 31) {
      throw InvalidArgumentError("bad day in date '" + std::string(text) + "'");
    }
  }
  if (date.month < 1 || date.month > 12) {
    throw InvalidArgumentError("bad month in date '" + std::string(text) + "'");
  }
  return date;
}

std::string Date::ToString() const {
  char buf[32];
  if (day) {
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, *day);
  } else {
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  }
  return buf;
}

bool Step::HasConcept(const ConceptKey& key) const {
  return std::any_of(concepts.begin(), concepts.end(),
                     [&](const ConceptId& c) { return KeyOf(c) == key; });
}

bool StepBefore(const Step& a, const Step& b) {
  if (a.start != b.start) return a.start < b.start;
  if (a.end != b.end) {
    if (!a.end) return false;  // open-ended sorts last
    if (!b.end) return true;
    return *a.end < *b.end;
  }
  return a.title < b.title;
}

void SortSteps(Trajectory& trajectory) {
  std::stable_sort(trajectory.steps.begin(), trajectory.steps.end(),
                   StepBefore);
}

void ValidateStep(const Step& step) {
  if (step.end && *step.end < step.start) {
    throw InvalidArgumentError("step '" + step.title +
                               "' ends before it starts");
  }
  if (step.concepts.size() > kMaxConceptsPerStep) {
    throw InvalidArgumentError("step '" + step.title + "' has more than " +
                               std::to_string(kMaxConceptsPerStep) +
                               " concepts");
  }
  std::set<ConceptKey> seen;
  for (const auto& c : step.concepts) {
    if (c.domain != step.kind) {
      throw InvalidArgumentError("step '" + step.title +
                                 "' carries a concept of the wrong domain");
    }
    if (!seen.insert(KeyOf(c)).second) {
      throw InvalidArgumentError("step '" + step.title +
                                 "' repeats a concept");
    }
  }
}

}  // namespace roads
