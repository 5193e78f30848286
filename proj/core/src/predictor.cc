#include "roads/predictor.h"

#include <algorithm>
#include <array>
#include <cctype>

#include "json.hpp"
#include "roads/errors.h"

namespace roads {
namespace {

struct MethodNames {
  Method method;
  std::string_view display;
  std::string_view cli;
};

constexpr MethodNames kMethodNames[] = {
    {Method::kBaseline, "Baseline", "baseline"},
    {Method::kLastDiploma, "LastDiploma", "last-diploma"},
    {Method::kHighestDiploma, "HighestDiploma", "highest-diploma"},
    {Method::kPreviousStep, "PreviousStep", "previous"},
    {Method::kFirstJobAfter, "FirstJobAfter", "first-job"},
    {Method::kNextStepIntent, "NextStepIntent", "next"},
};

std::vector<ConceptKey> KeysOf(const Step& step) {
  std::vector<ConceptKey> keys;
  keys.reserve(step.concepts.size());
  for (const auto& c : step.concepts) keys.push_back(KeyOf(c));
  return keys;
}

}  // namespace

std::string_view ToString(Method method) {
  for (const auto& n : kMethodNames) {
    if (n.method == method) return n.display;
  }
  return "?";
}

std::string_view CliName(Method method) {
  for (const auto& n : kMethodNames) {
    if (n.method == method) return n.cli;
  }
  return "?";
}

Method ParseMethod(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (const auto& n : kMethodNames) {
    std::string display(n.display);
    std::transform(display.begin(), display.end(), display.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == n.cli || lower == display) return n.method;
  }
  throw InvalidArgumentError(
      "unknown method '" + std::string(text) +
      "' (expected baseline, last-diploma, highest-diploma, previous, "
      "first-job or next)");
}

bool IsPredictable(const Trajectory& trajectory, std::size_t step_index) {
  return trajectory.steps.size() >= 3 && step_index >= 1 &&
         step_index + 2 <= trajectory.steps.size();
}

bool IsPredictable(const Trajectory& trajectory, std::size_t step_index,
                   StepKind target_kind) {
  return IsPredictable(trajectory, step_index) &&
         trajectory.steps[step_index].kind == target_kind;
}

Context ExtractContext(const Trajectory& trajectory, std::size_t step_index,
                       Method method) {
  if (!IsPredictable(trajectory, step_index)) {
    throw IndexOutOfRangeError(
        "step " + std::to_string(step_index) + " of user '" +
        trajectory.user_id + "' is not predictable (" +
        std::to_string(trajectory.steps.size()) + " steps)");
  }
  const auto& steps = trajectory.steps;
  switch (method) {
    case Method::kBaseline:
      return std::vector<ConceptKey>{};
    case Method::kPreviousStep:
      return KeysOf(steps[step_index - 1]);
    case Method::kNextStepIntent:
      return KeysOf(steps[step_index + 1]);
    case Method::kLastDiploma:
    case Method::kHighestDiploma:
      // Diploma level is the diploma's chronological rank among the user's
      // diplomas, so the highest one so far is also the last one.
      for (std::size_t i = step_index; i-- > 0;) {
        if (steps[i].kind == StepKind::kDiploma) return KeysOf(steps[i]);
      }
      return std::nullopt;
    case Method::kFirstJobAfter:
      for (std::size_t i = step_index + 1; i < steps.size(); ++i) {
        if (steps[i].kind == StepKind::kJob) return KeysOf(steps[i]);
      }
      return std::nullopt;
  }
  return std::nullopt;
}

std::int64_t FrequencyModel::Marginal(int hypothesis) const {
  auto it = marginal_.find(hypothesis);
  return it == marginal_.end() ? 0 : it->second;
}

std::int64_t FrequencyModel::Joint(int hypothesis,
                                   const ConceptKey& context) const {
  auto it = joint_.find(context);
  if (it == joint_.end()) return 0;
  auto jt = it->second.find(hypothesis);
  return jt == it->second.end() ? 0 : jt->second;
}

void FrequencyModel::Add(std::span<const ConceptId> hypotheses,
                         const Context& context) {
  ++total_steps_;
  for (const auto& h : hypotheses) {
    ++marginal_[h.index];
    ++concept_occurrences_;
    if (method_ == Method::kBaseline || !context) continue;
    for (const auto& c : *context) ++joint_[c][h.index];
  }
}

void FrequencyModel::Remove(std::span<const ConceptId> hypotheses,
                            const Context& context) {
  const bool with_joints = method_ != Method::kBaseline && context;
  // Validate everything first so a failed removal leaves no trace. A step
  // lists each concept once, so a count of 1 is enough per entry.
  if (total_steps_ < 1) throw UnderflowError("model holds no steps");
  for (const auto& h : hypotheses) {
    if (Marginal(h.index) < 1) {
      throw UnderflowError("marginal count of concept " +
                           std::to_string(h.index) + " would go negative");
    }
    if (!with_joints) continue;
    for (const auto& c : *context) {
      if (Joint(h.index, c) < 1) {
        throw UnderflowError("joint count (" + std::to_string(h.index) + ", " +
                             std::to_string(c.index) + ") would go negative");
      }
    }
  }
  --total_steps_;
  for (const auto& h : hypotheses) {
    if (--marginal_[h.index] == 0) marginal_.erase(h.index);
    --concept_occurrences_;
    if (!with_joints) continue;
    for (const auto& c : *context) {
      auto& row = joint_[c];
      if (--row[h.index] == 0) row.erase(h.index);
      if (row.empty()) joint_.erase(c);
    }
  }
}

void FrequencyModel::Verify() const {
  std::int64_t sum = 0;
  for (const auto& [h, n] : marginal_) {
    if (n <= 0) throw Error("non-positive stored marginal");
    sum += n;
  }
  if (sum != concept_occurrences_) {
    throw Error("marginal checksum mismatch: " + std::to_string(sum) +
                " != " + std::to_string(concept_occurrences_));
  }
}

std::string FrequencyModel::ToJson() const {
  nlohmann::json doc;
  doc["target_kind"] = std::string(ToString(target_kind_));
  doc["method"] = std::string(ToString(method_));
  doc["total_steps"] = total_steps_;
  doc["concept_occurrences"] = concept_occurrences_;
  nlohmann::json marginal = nlohmann::json::object();
  for (const auto& [h, n] : marginal_) marginal[std::to_string(h)] = n;
  doc["marginal"] = std::move(marginal);
  // Joint triples [h_index, c_index, count] grouped by the context domain,
  // sorted by (h, c).
  nlohmann::json joint = nlohmann::json::object();
  for (StepKind domain : {StepKind::kDiploma, StepKind::kJob}) {
    std::vector<std::array<std::int64_t, 3>> rows;
    for (const auto& [c, row] : joint_) {
      if (c.domain != domain) continue;
      for (const auto& [h, n] : row) rows.push_back({h, c.index, n});
    }
    std::sort(rows.begin(), rows.end());
    joint[std::string(ToString(domain))] = rows;
  }
  doc["joint"] = std::move(joint);
  return doc.dump();
}

FrequencyModel FrequencyModel::FromJson(std::string_view text) {
  try {
    auto doc = nlohmann::json::parse(text);
    FrequencyModel model(ParseStepKind(doc.at("target_kind").get<std::string>()),
                         ParseMethod(doc.at("method").get<std::string>()));
    model.total_steps_ = doc.at("total_steps").get<std::int64_t>();
    model.concept_occurrences_ =
        doc.at("concept_occurrences").get<std::int64_t>();
    for (const auto& [key, value] : doc.at("marginal").items()) {
      auto n = value.get<std::int64_t>();
      if (n < 0) throw InvalidArgumentError("negative marginal count");
      if (n > 0) model.marginal_[std::stoi(key)] = n;
    }
    for (const auto& [domain, rows] : doc.at("joint").items()) {
      auto kind = ParseStepKind(domain);
      for (const auto& row : rows) {
        auto n = row.at(2).get<std::int64_t>();
        if (n < 0) throw InvalidArgumentError("negative joint count");
        if (n > 0) {
          model.joint_[{kind, row.at(1).get<int>()}][row.at(0).get<int>()] = n;
        }
      }
    }
    model.Verify();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("bad model dump: ") + e.what());
  }
}

FrequencyModel Train(const Corpus& corpus, StepKind target_kind,
                     Method method) {
  if (corpus.empty()) throw EmptyCorpusError("cannot train on an empty corpus");
  FrequencyModel model(target_kind, method);
  for (const auto& trajectory : corpus) {
    for (std::size_t i = 1; i + 1 < trajectory.steps.size(); ++i) {
      if (trajectory.steps[i].kind != target_kind) continue;
      model.Add(trajectory.steps[i].concepts,
                ExtractContext(trajectory, i, method));
    }
  }
  return model;
}

std::size_t RankedPrediction::RankOf(const ConceptKey& key) const {
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    if (KeyOf(hypotheses[i].id) == key) return i + 1;
  }
  return 0;
}

RankedPrediction Rank(std::span<const ContextSource> sources,
                      const Taxonomy& taxonomy) {
  if (sources.empty()) {
    throw InvalidArgumentError("ranking needs at least one model");
  }
  const FrequencyModel& primary = *sources.front().model;
  RankedPrediction out;
  out.method = primary.method();

  const auto& concepts = taxonomy.concepts();
  std::vector<std::int64_t> joint_score(concepts.size(), 0);
  bool any_joint = false;
  for (const auto& source : sources) {
    if (!source.context) continue;
    for (const auto& c : *source.context) {
      if (std::find(out.context_concepts.begin(), out.context_concepts.end(),
                    c) == out.context_concepts.end()) {
        out.context_concepts.push_back(c);
      }
      if (source.model->method() == Method::kBaseline) continue;
      auto row = source.model->joint_by_context().find(c);
      if (row == source.model->joint_by_context().end()) continue;
      for (std::size_t i = 0; i < concepts.size(); ++i) {
        auto it = row->second.find(concepts[i].index);
        if (it == row->second.end()) continue;
        joint_score[i] += it->second;
        any_joint = any_joint || it->second > 0;
      }
    }
  }

  const bool baseline = primary.method() == Method::kBaseline;
  const bool use_joint = !baseline && any_joint;
  out.backed_off = !baseline && !any_joint;
  out.hypotheses.reserve(concepts.size());
  for (std::size_t i = 0; i < concepts.size(); ++i) {
    Hypothesis h;
    h.id = concepts[i];
    h.count = primary.Marginal(concepts[i].index);
    h.score = use_joint ? joint_score[i] : h.count;
    out.hypotheses.push_back(std::move(h));
  }
  std::sort(out.hypotheses.begin(), out.hypotheses.end(),
            [](const Hypothesis& a, const Hypothesis& b) {
              if (a.score != b.score) return a.score > b.score;
              if (a.count != b.count) return a.count > b.count;
              return a.id.index < b.id.index;
            });
  return out;
}

RankedPrediction Rank(const FrequencyModel& model, const Context& context,
                      const Taxonomy& taxonomy) {
  const ContextSource source{&model, context};
  return Rank(std::span<const ContextSource>(&source, 1), taxonomy);
}

RankedPrediction LeaveOneOutRank(FrequencyModel& model,
                                 const Trajectory& trajectory,
                                 std::size_t step_index,
                                 const Taxonomy& taxonomy) {
  auto context = ExtractContext(trajectory, step_index, model.method());
  const auto& step = trajectory.steps[step_index];
  if (step.kind != model.target_kind()) {
    throw InvalidArgumentError("held-out step kind does not match the model");
  }
  model.Remove(step.concepts, context);
  struct Restore {
    FrequencyModel& model;
    const Step& step;
    const Context& context;
    ~Restore() { model.Add(step.concepts, context); }
  } restore{model, step, context};
  return Rank(model, context, taxonomy);
}

}  // namespace roads
