// JSONL corpus reading and writing.

#include <set>
#include <sstream>

#include "json.hpp"
#include "roads/errors.h"
#include "roads/ingest.h"

namespace roads {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::optional<std::string> OptionalString(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw InvalidArgumentError(std::string("'") + key + "' must be a string");
  }
  return it->get<std::string>();
}

RawStep ParseRawStep(const json& obj) {
  if (!obj.is_object()) throw InvalidArgumentError("step must be an object");
  RawStep step;
  step.kind_hint = OptionalString(obj, "kind");
  auto title = OptionalString(obj, "title");
  if (!title || title->find_first_not_of(" \t\r\n") == std::string::npos) {
    throw InvalidArgumentError("step title missing or empty");
  }
  step.raw_title = *title;
  auto start = OptionalString(obj, "start");
  if (!start) throw InvalidArgumentError("step start date missing");
  step.start = Date::Parse(*start);
  if (auto end = OptionalString(obj, "end")) step.end = Date::Parse(*end);
  step.location = OptionalString(obj, "location");
  step.description = OptionalString(obj, "description");
  if (auto it = obj.find("fields"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw InvalidArgumentError("'fields' must be a list");
    for (const auto& f : *it) {
      if (!f.is_string()) {
        throw InvalidArgumentError("'fields' entries must be strings");
      }
      step.raw_fields.push_back(f.get<std::string>());
    }
  }
  return step;
}

}  // namespace

RawTrajectory ParseCorpusLine(std::string_view line, std::size_t line_no) {
  json doc;
  try {
    doc = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object()) throw InvalidArgumentError("expected a JSON object");
    RawTrajectory out;
    auto user = doc.find("user_id");
    if (user == doc.end() || !user->is_string() ||
        user->get<std::string>().empty()) {
      throw InvalidArgumentError("missing or empty 'user_id'");
    }
    out.user_id = user->get<std::string>();
    auto steps = doc.find("steps");
    if (steps == doc.end() || !steps->is_array()) {
      throw InvalidArgumentError("missing 'steps' list");
    }
    for (const auto& s : *steps) out.steps.push_back(ParseRawStep(s));
    if (auto skills = doc.find("skills");
        skills != doc.end() && !skills->is_null()) {
      if (!skills->is_array()) {
        throw InvalidArgumentError("'skills' must be a list");
      }
      for (const auto& sk : *skills) {
        Skill skill;
        auto label = OptionalString(sk, "label");
        if (!label) throw InvalidArgumentError("skill without label");
        skill.label = *label;
        if (auto r = sk.find("rating"); r != sk.end() && !r->is_null()) {
          if (!r->is_number_integer()) {
            throw InvalidArgumentError("skill rating must be an integer");
          }
          skill.rating = r->get<int>();
        }
        out.skills.push_back(std::move(skill));
      }
    }
    return out;
  } catch (const InvalidArgumentError& e) {
    throw ParseError(line_no, e.what());
  } catch (const json::exception& e) {
    throw ParseError(line_no, e.what());
  }
}

LoadedCorpus ReadCorpus(std::istream& in, const AliasTable& aliases,
                        const TaxonomyPair& taxonomies) {
  Corpus corpus;
  std::set<std::string> users;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto raw = ParseCorpusLine(line, line_no);
    if (!users.insert(raw.user_id).second) {
      throw DuplicateUserError("line " + std::to_string(line_no) +
                               ": duplicate user_id '" + raw.user_id + "'");
    }
    Trajectory trajectory;
    trajectory.user_id = std::move(raw.user_id);
    trajectory.skills = std::move(raw.skills);
    for (const auto& rs : raw.steps) {
      try {
        trajectory.steps.push_back(BuildStep(rs, aliases, taxonomies));
      } catch (const MissingKindError& e) {
        throw ParseError(line_no, e.what());
      } catch (const InvalidArgumentError& e) {
        throw ParseError(line_no, e.what());
      }
    }
    corpus.push_back(std::move(trajectory));
  }
  return ApplyFilters(std::move(corpus));
}

std::string TrajectoryToJsonLine(const Trajectory& trajectory) {
  ordered_json doc;
  doc["user_id"] = trajectory.user_id;
  ordered_json steps = ordered_json::array();
  for (const auto& s : trajectory.steps) {
    ordered_json step;
    step["kind"] = std::string(ToString(s.kind));
    step["title"] = s.title;
    step["start"] = s.start.ToString();
    step["end"] = s.end ? ordered_json(s.end->ToString()) : ordered_json();
    step["location"] = s.location ? ordered_json(*s.location) : ordered_json();
    ordered_json fields = ordered_json::array();
    for (const auto& f : s.fields) fields.push_back(f.label());
    step["fields"] = std::move(fields);
    step["description"] =
        s.description ? ordered_json(*s.description) : ordered_json();
    steps.push_back(std::move(step));
  }
  doc["steps"] = std::move(steps);
  ordered_json skills = ordered_json::array();
  for (const auto& sk : trajectory.skills) {
    ordered_json skill;
    skill["label"] = sk.label;
    skill["rating"] = sk.rating ? ordered_json(*sk.rating) : ordered_json();
    skills.push_back(std::move(skill));
  }
  doc["skills"] = std::move(skills);
  return doc.dump();
}

void WriteCorpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& t : corpus) out << TrajectoryToJsonLine(t) << '\n';
}

std::string StatsToJson(const CorpusStats& stats) {
  json doc;
  doc["users"] = stats.users;
  doc["steps"] = stats.steps;
  doc["diploma_steps"] = stats.diploma_steps;
  doc["job_steps"] = stats.job_steps;
  doc["mean_steps_per_user"] = stats.mean_steps_per_user();
  doc["dropped_profiles"] = stats.dropped_profiles;
  doc["dropped_steps"] = stats.dropped_steps;
  return doc.dump(2);
}

}  // namespace roads
