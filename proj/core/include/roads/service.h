#ifndef ROADS_SERVICE_H_
#define ROADS_SERVICE_H_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "roads/evaluator.h"
#include "roads/ingest.h"
#include "roads/predictor.h"
#include "roads/taxonomy.h"

namespace roads {

struct HttpResponse {
  int status = 200;
  std::string body;  // JSON
};

// Everything a request reads. Immutable once built; a reload swaps the
// whole snapshot so readers see either the old or the new one.
struct ServiceSnapshot {
  TaxonomyPair taxonomies;
  AliasTable aliases;
  std::optional<LoadedCorpus> corpus;
  // PreviousStep and NextStepIntent models per target kind, present when a
  // non-empty corpus is loaded.
  std::map<std::pair<StepKind, Method>, FrequencyModel> models;
};

std::shared_ptr<const ServiceSnapshot> BuildSnapshot(
    TaxonomyPair taxonomies, AliasTable aliases,
    std::optional<LoadedCorpus> corpus);

// The /api/v1 endpoints as plain functions of (snapshot, request).
// Error bodies are {"error": {"code": ..., "message": ...}}.
class Service {
 public:
  static constexpr int kPackSize = 6;

  explicit Service(std::shared_ptr<const ServiceSnapshot> snapshot);
  ~Service();

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void Reload(std::shared_ptr<const ServiceSnapshot> snapshot);
  std::shared_ptr<const ServiceSnapshot> snapshot() const;

  // GET /api/v1/concepts?domain=diploma|job
  HttpResponse Concepts(std::string_view domain) const;
  // GET /api/v1/stats
  HttpResponse Stats() const;
  // POST /api/v1/options
  HttpResponse Options(std::string_view body) const;
  // POST /api/v1/evaluate -> 202 {"id": ...}
  HttpResponse SubmitEvaluation(std::string_view body);
  // GET /api/v1/evaluate/{id}
  HttpResponse PollEvaluation(std::string_view id) const;

  // Blocks until every submitted evaluation has finished.
  void WaitForEvaluations();

 private:
  struct Job;

  mutable std::mutex snapshot_mutex_;
  std::shared_ptr<const ServiceSnapshot> snapshot_;

  mutable std::mutex jobs_mutex_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::vector<std::jthread> workers_;
  std::uint64_t next_job_ = 1;
};

// cpp-httplib front end for a Service.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds without serving yet. Port 0 picks a free port. Returns the bound
  // port; throws Error on failure.
  int Bind(const std::string& host, int port);
  // Serves until Stop(). Must follow Bind().
  void Run();
  void Stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace roads

#endif  // ROADS_SERVICE_H_
