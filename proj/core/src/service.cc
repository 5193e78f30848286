#include "roads/service.h"

#include <algorithm>
#include <array>
#include <condition_variable>

#include "httplib.h"
#include "json.hpp"
#include "roads/errors.h"

namespace roads {
namespace {

using nlohmann::json;

HttpResponse JsonResponse(int status, const json& body) {
  return {status, body.dump()};
}

HttpResponse ErrorResponse(int status, std::string_view code,
                           std::string_view message) {
  return JsonResponse(
      status, {{"error", {{"code", code}, {"message", message}}}});
}

json ConceptJson(const ConceptId& c) {
  return {{"domain", ToString(c.domain)}, {"index", c.index},
          {"label", c.label}};
}

// A request-side concept reference: {"domain": .., "index": ..},
// {"domain": .., "label": ..} or a bare label resolved in `default_domain`.
ConceptId ResolveConcept(const json& ref, const TaxonomyPair& taxonomies,
                         StepKind default_domain) {
  if (ref.is_string()) {
    const auto* c =
        taxonomies.For(default_domain).FindByLabel(ref.get<std::string>());
    if (!c) {
      throw ConceptNotInTaxonomyError("unknown concept '" +
                                      ref.get<std::string>() + "'");
    }
    return *c;
  }
  if (!ref.is_object()) {
    throw InvalidArgumentError("concept must be an object or a label");
  }
  StepKind domain = default_domain;
  if (auto d = ref.find("domain"); d != ref.end()) {
    domain = ParseStepKind(d->get<std::string>());
  }
  const auto& taxonomy = taxonomies.For(domain);
  if (auto i = ref.find("index"); i != ref.end()) {
    if (!i->is_number_integer()) {
      throw InvalidArgumentError("concept index must be an integer");
    }
    return taxonomy.At(i->get<int>());
  }
  if (auto l = ref.find("label"); l != ref.end()) {
    const auto* c = taxonomy.FindByLabel(l->get<std::string>());
    if (!c) {
      throw ConceptNotInTaxonomyError("unknown concept '" +
                                      l->get<std::string>() + "'");
    }
    return *c;
  }
  throw InvalidArgumentError("concept needs an index or a label");
}

struct CurrentStep {
  StepKind kind;
  std::string title;
  std::vector<ConceptId> concepts;
};

CurrentStep ResolveCurrentStep(const json& obj,
                               const ServiceSnapshot& snapshot) {
  if (!obj.is_object()) {
    throw InvalidArgumentError("current_step must be an object");
  }
  std::optional<StepKind> kind;
  if (auto k = obj.find("kind"); k != obj.end() && !k->is_null()) {
    kind = ParseStepKind(k->get<std::string>());
  }
  CurrentStep step{kind.value_or(StepKind::kDiploma), "", {}};
  if (auto t = obj.find("title"); t != obj.end() && t->is_string()) {
    auto normalized =
        NormalizeTitle(t->get<std::string>(), snapshot.aliases, kind);
    step.kind = normalized.kind;
    step.title = normalized.title;
  }
  if (auto cs = obj.find("concepts"); cs != obj.end() && !cs->is_null()) {
    if (!cs->is_array()) throw InvalidArgumentError("concepts must be a list");
    for (const auto& ref : *cs) {
      auto c = ResolveConcept(ref, snapshot.taxonomies, step.kind);
      if (std::find(step.concepts.begin(), step.concepts.end(), c) ==
          step.concepts.end()) {
        step.concepts.push_back(std::move(c));
      }
    }
    if (!step.concepts.empty()) step.kind = step.concepts.front().domain;
  } else if (auto fs = obj.find("fields"); fs != obj.end() && fs->is_array()) {
    std::vector<FieldTag> fields;
    for (const auto& f : *fs) {
      auto s = f.get<std::string>();
      if (s.find_first_not_of(" \t") != std::string::npos) fields.emplace_back(s);
    }
    step.concepts = ClassifyStep(fields, snapshot.taxonomies.For(step.kind));
    if (step.concepts.size() > kMaxConceptsPerStep) {
      step.concepts.resize(kMaxConceptsPerStep);
    }
  }
  if (step.concepts.empty()) {
    throw ConceptNotInTaxonomyError(
        "current_step could not be classified under any concept");
  }
  return step;
}

// Shares of "further studies" vs "job" after steps like the current one.
std::array<double, 2> BranchShares(const Corpus& corpus,
                                   const CurrentStep& current) {
  std::array<std::int64_t, 2> matched{0, 0};
  std::array<std::int64_t, 2> overall{0, 0};
  for (const auto& t : corpus) {
    for (std::size_t i = 0; i + 1 < t.steps.size(); ++i) {
      const auto& s = t.steps[i];
      if (s.kind != current.kind) continue;
      const auto next = static_cast<std::size_t>(t.steps[i + 1].kind);
      ++overall[next];
      bool match = std::any_of(
          current.concepts.begin(), current.concepts.end(),
          [&](const ConceptId& c) { return s.HasConcept(KeyOf(c)); });
      if (match) ++matched[next];
    }
  }
  const auto& use = (matched[0] + matched[1] > 0) ? matched : overall;
  const double total = static_cast<double>(use[0] + use[1]);
  if (total == 0) return {0.0, 0.0};
  return {static_cast<double>(use[0]) / total,
          static_cast<double>(use[1]) / total};
}

}  // namespace

std::shared_ptr<const ServiceSnapshot> BuildSnapshot(
    TaxonomyPair taxonomies, AliasTable aliases,
    std::optional<LoadedCorpus> corpus) {
  auto snapshot = std::make_shared<ServiceSnapshot>();
  snapshot->taxonomies = std::move(taxonomies);
  snapshot->aliases = std::move(aliases);
  if (corpus && !corpus->corpus.empty()) {
    for (StepKind kind : {StepKind::kDiploma, StepKind::kJob}) {
      for (Method method : {Method::kPreviousStep, Method::kNextStepIntent}) {
        snapshot->models.emplace(std::make_pair(kind, method),
                                 Train(corpus->corpus, kind, method));
      }
    }
  }
  snapshot->corpus = std::move(corpus);
  return snapshot;
}

struct Service::Job {
  std::mutex mutex;
  std::string status = "running";
  std::string report;  // ReportToJson output once done
  std::string error;
};

Service::Service(std::shared_ptr<const ServiceSnapshot> snapshot)
    : snapshot_(std::move(snapshot)) {}

Service::~Service() { WaitForEvaluations(); }

void Service::Reload(std::shared_ptr<const ServiceSnapshot> snapshot) {
  std::lock_guard lock(snapshot_mutex_);
  snapshot_ = std::move(snapshot);
}

std::shared_ptr<const ServiceSnapshot> Service::snapshot() const {
  std::lock_guard lock(snapshot_mutex_);
  return snapshot_;
}

HttpResponse Service::Concepts(std::string_view domain) const {
  StepKind kind;
  try {
    kind = ParseStepKind(domain);
  } catch (const InvalidArgumentError& e) {
    return ErrorResponse(400, "bad_domain", e.what());
  }
  auto snap = snapshot();
  json concepts = json::array();
  for (const auto& c : snap->taxonomies.For(kind).concepts()) {
    concepts.push_back(ConceptJson(c));
  }
  return JsonResponse(200, {{"domain", ToString(kind)},
                            {"concepts", std::move(concepts)}});
}

HttpResponse Service::Stats() const {
  auto snap = snapshot();
  if (!snap->corpus) {
    return ErrorResponse(409, "model_not_trained", "no corpus loaded");
  }
  return {200, StatsToJson(snap->corpus->stats)};
}

HttpResponse Service::Options(std::string_view body) const {
  auto snap = snapshot();
  if (snap->models.empty()) {
    return ErrorResponse(409, "model_not_trained", "no corpus loaded");
  }
  try {
    const json request = json::parse(body);
    if (!request.is_object()) {
      throw InvalidArgumentError("request body must be an object");
    }
    const auto current =
        ResolveCurrentStep(request.at("current_step"), *snap);

    const std::string branch = request.value("branch", "further_studies");
    StepKind target;
    if (branch == "further_studies") {
      target = StepKind::kDiploma;
    } else if (branch == "job") {
      target = StepKind::kJob;
    } else {
      throw InvalidArgumentError("branch must be further_studies or job");
    }
    const int page = request.value("page", 0);
    if (page < 0) throw InvalidArgumentError("page must be >= 0");

    std::vector<ConceptKey> context;
    for (const auto& c : current.concepts) context.push_back(KeyOf(c));
    std::vector<ContextSource> sources{
        {&snap->models.at({target, Method::kPreviousStep}), context}};
    std::optional<ConceptId> goal;
    if (auto g = request.find("goal"); g != request.end() && !g->is_null()) {
      goal = ResolveConcept(*g, snap->taxonomies, target);
      sources.push_back({&snap->models.at({target, Method::kNextStepIntent}),
                         std::vector<ConceptKey>{KeyOf(*goal)}});
    }
    const auto& taxonomy = snap->taxonomies.For(target);
    const auto ranked = Rank(sources, taxonomy);

    const auto begin = static_cast<std::size_t>(page) * kPackSize;
    json top = json::array();
    for (std::size_t i = begin;
         i < ranked.hypotheses.size() && i < begin + kPackSize; ++i) {
      auto entry = ConceptJson(ranked.hypotheses[i].id);
      entry["count"] = ranked.hypotheses[i].score;
      entry["rank"] = i + 1;
      top.push_back(std::move(entry));
    }
    const auto shares = BranchShares(snap->corpus->corpus, current);

    json context_concepts = json::array();
    for (const auto& c : current.concepts) {
      context_concepts.push_back(ConceptJson(c));
    }
    json response;
    response["context_step"] = {{"kind", ToString(current.kind)},
                                {"title", current.title},
                                {"concepts", std::move(context_concepts)}};
    response["branches"] = json::array(
        {{{"branch", "further_studies"}, {"share", shares[0]}},
         {{"branch", "job"}, {"share", shares[1]}}});
    response["branch"] = branch;
    response["goal"] = goal ? ConceptJson(*goal) : json();
    response["top_concepts"] = std::move(top);
    response["more_available"] =
        begin + kPackSize < ranked.hypotheses.size();
    response["page"] = page;
    response["pack_size"] = kPackSize;
    response["total"] = ranked.hypotheses.size();
    response["backed_off"] = ranked.backed_off;
    return JsonResponse(200, response);
  } catch (const json::exception& e) {
    return ErrorResponse(400, "bad_request", e.what());
  } catch (const ConceptNotInTaxonomyError& e) {
    return ErrorResponse(400, "invalid_concept", e.what());
  } catch (const Error& e) {
    return ErrorResponse(400, "bad_request", e.what());
  }
}

HttpResponse Service::SubmitEvaluation(std::string_view body) {
  auto snap = snapshot();
  if (!snap->corpus || snap->corpus->corpus.empty()) {
    return ErrorResponse(409, "model_not_trained", "no corpus loaded");
  }
  StepKind kind;
  Method method;
  EvalOptions options;
  try {
    const json request = json::parse(body);
    kind = ParseStepKind(request.at("target_kind").get<std::string>());
    method = ParseMethod(request.at("method").get<std::string>());
    if (auto p = request.find("params"); p != request.end() && !p->is_null()) {
      options.params.alpha = p->value("alpha", options.params.alpha);
      options.params.pack_size =
          p->value("pack_size", options.params.pack_size);
      options.params.pack_penalty =
          p->value("pack_penalty", options.params.pack_penalty);
      if (auto m = p->find("rank_mode"); m != p->end()) {
        options.params.rank_mode = ParseRankMode(m->get<std::string>());
      }
    }
    options.params.Validate();
  } catch (const json::exception& e) {
    return ErrorResponse(400, "bad_request", e.what());
  } catch (const Error& e) {
    return ErrorResponse(400, "bad_request", e.what());
  }

  auto job = std::make_shared<Job>();
  std::string id;
  {
    std::lock_guard lock(jobs_mutex_);
    id = "eval-" + std::to_string(next_job_++);
    jobs_.emplace(id, job);
    workers_.emplace_back([job, snap, kind, method, options] {
      std::string report;
      std::string error;
      try {
        report = ReportToJson(Evaluate(snap->corpus->corpus, snap->taxonomies,
                                       kind, method, options));
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard job_lock(job->mutex);
      job->status = error.empty() ? "done" : "failed";
      job->report = std::move(report);
      job->error = std::move(error);
    });
  }
  return JsonResponse(202, {{"id", id}, {"status", "running"}});
}

HttpResponse Service::PollEvaluation(std::string_view id) const {
  std::shared_ptr<Job> job;
  {
    std::lock_guard lock(jobs_mutex_);
    auto it = jobs_.find(std::string(id));
    if (it == jobs_.end()) {
      return ErrorResponse(404, "not_found",
                           "unknown evaluation '" + std::string(id) + "'");
    }
    job = it->second;
  }
  std::lock_guard job_lock(job->mutex);
  json response{{"id", id}, {"status", job->status}};
  if (job->status == "done") response["report"] = json::parse(job->report);
  if (job->status == "failed") {
    response["error"] = {{"code", "evaluation_failed"},
                         {"message", job->error}};
  }
  return JsonResponse(200, response);
}

void Service::WaitForEvaluations() {
  std::vector<std::jthread> workers;
  {
    std::lock_guard lock(jobs_mutex_);
    workers.swap(workers_);
  }
  for (auto& w : workers) {
    if (w.joinable()) w.join();
  }
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {}
};

namespace {

void Reply(httplib::Response& res, const HttpResponse& out) {
  res.status = out.status;
  res.set_content(out.body, "application/json");
}

}  // namespace

HttpServer::HttpServer(Service& service)
    : impl_(std::make_unique<Impl>(service)) {
  auto& server = impl_->server;
  Service& svc = service;
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
  server.Options(R"(/api/v1/.*)", [](const httplib::Request&,
                                     httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
  server.Get("/api/v1/concepts",
             [&svc](const httplib::Request& req, httplib::Response& res) {
               Reply(res, svc.Concepts(req.get_param_value("domain")));
             });
  server.Get("/api/v1/stats",
             [&svc](const httplib::Request&, httplib::Response& res) {
               Reply(res, svc.Stats());
             });
  server.Post("/api/v1/options",
              [&svc](const httplib::Request& req, httplib::Response& res) {
                Reply(res, svc.Options(req.body));
              });
  server.Post("/api/v1/evaluate",
              [&svc](const httplib::Request& req, httplib::Response& res) {
                Reply(res, svc.SubmitEvaluation(req.body));
              });
  server.Get(R"(/api/v1/evaluate/([A-Za-z0-9_-]+))",
             [&svc](const httplib::Request& req, httplib::Response& res) {
               Reply(res, svc.PollEvaluation(req.matches[1].str()));
             });
  server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const char* code = res.status == 404 ? "not_found" : "http_error";
    res.set_content(json{{"error", {{"code", code},
                                    {"message", httplib::status_message(
                                                    res.status)}}}}
                        .dump(),
                    "application/json");
  });
}

HttpServer::~HttpServer() { Stop(); }

int HttpServer::Bind(const std::string& host, int port) {
  auto& server = impl_->server;
  if (port == 0) {
    int bound = server.bind_to_any_port(host);
    if (bound < 0) throw Error("cannot bind " + host);
    return bound;
  }
  if (!server.bind_to_port(host, port)) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::Run() { impl_->server.listen_after_bind(); }

void HttpServer::Stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace roads
