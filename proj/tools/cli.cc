#include "cli.h"

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "roads/errors.h"
#include "roads/evaluator.h"
#include "roads/ingest.h"
#include "roads/predictor.h"
#include "roads/service.h"
#include "roads/synthgen.h"

namespace roads::cli {
namespace {

// Flags shared by the subcommands that read a corpus.
struct DataFlags {
  std::string corpus;
  std::string taxonomy_diploma;
  std::string taxonomy_job;
  std::string aliases;
};

struct Config {
  DataFlags data;
  bool json = false;
  std::string kind = "job";
  std::string method;
  double alpha = ScoreParams{}.alpha;
  int pack_size = ScoreParams{}.pack_size;
  double pack_penalty = ScoreParams{}.pack_penalty;
  std::string rank_mode = "within_pack";
  int jobs = 1;
  std::size_t threshold = 0;
  std::string out;
  std::string histogram;
  std::vector<std::string> context;
  std::size_t top = 0;
  std::string bind = "127.0.0.1:8080";
  std::string write_taxonomies;
  GenParams gen;
};

void AddDataFlags(CLI::App* cmd, DataFlags& data, bool corpus_required) {
  auto* corpus = cmd->add_option("--corpus", data.corpus, "Corpus JSONL file");
  if (corpus_required) corpus->required();
  cmd->add_option("--taxonomy-diploma", data.taxonomy_diploma,
                  "Diploma taxonomy CSV (default: 17 synthetic concepts)");
  cmd->add_option("--taxonomy-job", data.taxonomy_job,
                  "Job taxonomy CSV (default: 47 synthetic concepts)");
  cmd->add_option("--aliases", data.aliases, "Title alias CSV");
}

void AddScoreFlags(CLI::App* cmd, Config& cfg) {
  cmd->add_option("--alpha", cfg.alpha, "Fudge factor exponent");
  cmd->add_option("--pack-size", cfg.pack_size, "Propositions per pack");
  cmd->add_option("--pack-penalty", cfg.pack_penalty,
                  "Score multiplier per further pack");
  cmd->add_option("--rank-mode", cfg.rank_mode, "within_pack or global");
  cmd->add_option("--jobs", cfg.jobs, "Worker threads")
      ->check(CLI::PositiveNumber);
}

TaxonomyPair LoadTaxonomies(const DataFlags& data) {
  auto pair = SyntheticTaxonomies(17, 47);
  if (!data.taxonomy_diploma.empty()) {
    pair.diploma = LoadTaxonomyFile(data.taxonomy_diploma, StepKind::kDiploma);
  }
  if (!data.taxonomy_job.empty()) {
    pair.job = LoadTaxonomyFile(data.taxonomy_job, StepKind::kJob);
  }
  return pair;
}

AliasTable LoadAliases(const DataFlags& data) {
  return data.aliases.empty() ? AliasTable{} : LoadAliasFile(data.aliases);
}

EvalOptions MakeEvalOptions(const Config& cfg) {
  EvalOptions options;
  options.params.alpha = cfg.alpha;
  options.params.pack_size = cfg.pack_size;
  options.params.pack_penalty = cfg.pack_penalty;
  options.params.rank_mode = ParseRankMode(cfg.rank_mode);
  options.params.Validate();
  options.jobs = cfg.jobs;
  return options;
}

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error("cannot write '" + path + "'");
  file << content;
  if (!file) throw Error("failed writing '" + path + "'");
}

// "domain:index", "domain:label" or a bare label looked up in `fallback`.
ConceptKey ParseContextConcept(const std::string& text,
                               const TaxonomyPair& taxonomies,
                               StepKind fallback) {
  StepKind domain = fallback;
  std::string rest = text;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    domain = ParseStepKind(text.substr(0, colon));
    rest = text.substr(colon + 1);
  }
  const auto& taxonomy = taxonomies.For(domain);
  if (!rest.empty() &&
      rest.find_first_not_of("0123456789") == std::string::npos) {
    return KeyOf(taxonomy.At(std::stoi(rest)));
  }
  if (const auto* c = taxonomy.FindByLabel(rest)) return KeyOf(*c);
  throw ConceptNotInTaxonomyError("unknown concept '" + text + "'");
}

int CmdGen(const Config& cfg, std::ostream& out) {
  const auto corpus = Generate(cfg.gen);
  if (!cfg.write_taxonomies.empty()) {
    std::filesystem::create_directories(cfg.write_taxonomies);
    const auto taxonomies = SyntheticTaxonomies(cfg.gen.diploma_concepts,
                                                cfg.gen.job_concepts);
    for (const auto* t : {&taxonomies.diploma, &taxonomies.job}) {
      std::ostringstream csv;
      WriteTaxonomyCsv(csv, *t);
      WriteFile(cfg.write_taxonomies + "/taxonomy_" +
                    std::string(ToString(t->domain())) + ".csv",
                csv.str());
    }
  }
  if (cfg.out.empty() || cfg.out == "-") {
    WriteCorpus(out, corpus);
    return kExitOk;
  }
  std::ostringstream jsonl;
  WriteCorpus(jsonl, corpus);
  WriteFile(cfg.out, jsonl.str());
  const auto stats = ComputeCorpusStats(corpus);
  if (cfg.json) {
    out << nlohmann::json{{"users", stats.users}, {"raw_steps", stats.steps},
                          {"out", cfg.out}}
               .dump(2)
        << '\n';
  } else {
    out << "wrote " << stats.users << " users (" << stats.steps
        << " raw steps) to " << cfg.out << '\n';
  }
  return kExitOk;
}

int CmdIngest(const Config& cfg, std::ostream& out) {
  const auto taxonomies = LoadTaxonomies(cfg.data);
  const auto loaded =
      LoadCorpus(cfg.data.corpus, LoadAliases(cfg.data), taxonomies);
  if (!cfg.out.empty()) {
    std::ostringstream jsonl;
    WriteCorpus(jsonl, loaded.corpus);
    WriteFile(cfg.out, jsonl.str());
  }
  const auto& s = loaded.stats;
  if (cfg.json) {
    out << StatsToJson(s) << '\n';
    return kExitOk;
  }
  char mean[32];
  std::snprintf(mean, sizeof(mean), "%.3f", s.mean_steps_per_user());
  out << "users               " << s.users << '\n'
      << "steps               " << s.steps << '\n'
      << "diploma_steps       " << s.diploma_steps << '\n'
      << "job_steps           " << s.job_steps << '\n'
      << "mean_steps_per_user " << mean << '\n'
      << "dropped_profiles    " << s.dropped_profiles << '\n'
      << "dropped_steps       " << s.dropped_steps << '\n';
  return kExitOk;
}

int CmdTrain(const Config& cfg, std::ostream& out) {
  const auto taxonomies = LoadTaxonomies(cfg.data);
  const auto loaded =
      LoadCorpus(cfg.data.corpus, LoadAliases(cfg.data), taxonomies);
  const auto model =
      Train(loaded.corpus, ParseStepKind(cfg.kind),
            ParseMethod(cfg.method.empty() ? "previous" : cfg.method));
  const auto dump = model.ToJson();
  if (!cfg.out.empty()) WriteFile(cfg.out, dump + "\n");
  if (cfg.json) {
    out << dump << '\n';
  } else {
    std::size_t joints = 0;
    for (const auto& [c, row] : model.joint_by_context()) joints += row.size();
    out << "target_kind  " << ToString(model.target_kind()) << '\n'
        << "method       " << ToString(model.method()) << '\n'
        << "total_steps  " << model.total_steps() << '\n'
        << "marginals    " << model.marginal().size() << '\n'
        << "joint pairs  " << joints << '\n';
  }
  return kExitOk;
}

int CmdPredict(const Config& cfg, std::ostream& out) {
  const auto taxonomies = LoadTaxonomies(cfg.data);
  const auto loaded =
      LoadCorpus(cfg.data.corpus, LoadAliases(cfg.data), taxonomies);
  const auto kind = ParseStepKind(cfg.kind);
  const auto method =
      ParseMethod(cfg.method.empty() ? "previous" : cfg.method);
  const auto model = Train(loaded.corpus, kind, method);
  std::vector<ConceptKey> context;
  for (const auto& c : cfg.context) {
    context.push_back(ParseContextConcept(c, taxonomies, kind));
  }
  const auto ranked = Rank(model, context, taxonomies.For(kind));
  const std::size_t shown =
      cfg.top == 0 ? ranked.hypotheses.size()
                   : std::min(cfg.top, ranked.hypotheses.size());
  if (cfg.json) {
    nlohmann::json doc;
    doc["method"] = std::string(ToString(ranked.method));
    doc["target_kind"] = std::string(ToString(kind));
    doc["backed_off"] = ranked.backed_off;
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& h = ranked.hypotheses[i];
      list.push_back({{"rank", i + 1},
                      {"index", h.id.index},
                      {"label", h.id.label},
                      {"score", h.score},
                      {"count", h.count}});
    }
    doc["hypotheses"] = std::move(list);
    out << doc.dump(2) << '\n';
    return kExitOk;
  }
  if (ranked.backed_off) out << "(no joint evidence; global frequencies)\n";
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& h = ranked.hypotheses[i];
    if (i > 0 && i % static_cast<std::size_t>(cfg.pack_size) == 0) {
      out << "-- more --\n";
    }
    out << i + 1 << ". " << h.id.label << "  " << h.score << '\n';
  }
  return kExitOk;
}

int CmdEvaluate(const Config& cfg, std::ostream& out) {
  const auto taxonomies = LoadTaxonomies(cfg.data);
  const auto loaded =
      LoadCorpus(cfg.data.corpus, LoadAliases(cfg.data), taxonomies);
  const auto kind = ParseStepKind(cfg.kind);
  const auto options = MakeEvalOptions(cfg);
  std::vector<Method> methods = cfg.method.empty()
                                    ? ComparedMethods(kind)
                                    : std::vector{ParseMethod(cfg.method)};
  std::vector<EvalReport> reports;
  for (Method m : methods) {
    reports.push_back(Evaluate(loaded.corpus, taxonomies, kind, m, options));
  }
  if (!cfg.histogram.empty()) WriteFile(cfg.histogram, HistogramCsv(reports[0]));
  if (cfg.json) {
    out << (reports.size() == 1 ? ReportToJson(reports[0])
                                : ReportsToJson(reports))
        << '\n';
  } else {
    out << ReportsToTable(reports);
  }
  return kExitOk;
}

int CmdReorient(const Config& cfg, std::ostream& out) {
  const auto taxonomies = LoadTaxonomies(cfg.data);
  const auto loaded =
      LoadCorpus(cfg.data.corpus, LoadAliases(cfg.data), taxonomies);
  const auto kind = ParseStepKind(cfg.kind);
  const auto method =
      ParseMethod(cfg.method.empty() ? "previous" : cfg.method);
  const auto flags = DetectReorientations(loaded.corpus, taxonomies, kind,
                                          method, MakeEvalOptions(cfg),
                                          cfg.threshold);
  if (cfg.json) {
    out << FlagsToJson(flags) << '\n';
    return kExitOk;
  }
  for (const auto& f : flags) {
    out << f.user_id << " step " << f.step_index << " rank "
        << f.rank_of_truth << " > " << f.threshold << '\n';
  }
  out << flags.size() << " reorientation(s)\n";
  return kExitOk;
}

int CmdServe(const Config& cfg, std::ostream& out) {
  const auto taxonomies = LoadTaxonomies(cfg.data);
  auto aliases = LoadAliases(cfg.data);
  std::optional<LoadedCorpus> corpus;
  if (!cfg.data.corpus.empty()) {
    corpus = LoadCorpus(cfg.data.corpus, aliases, taxonomies);
  }
  Service service(BuildSnapshot(taxonomies, std::move(aliases),
                                std::move(corpus)));
  HttpServer server(service);

  const auto colon = cfg.bind.rfind(':');
  if (colon == std::string::npos) {
    throw InvalidArgumentError("--bind expects host:port");
  }
  const std::string host = cfg.bind.substr(0, colon);
  const int port = server.Bind(host, std::stoi(cfg.bind.substr(colon + 1)));
  out << "listening on http://" << host << ':' << port << "/api/v1\n"
      << std::flush;

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::thread runner([&server] { server.Run(); });
  int received = 0;
  sigwait(&signals, &received);
  server.Stop();
  runner.join();
  return kExitOk;
}

}  // namespace

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Next-step concept prediction for academic and career paths",
               "roads"};
  app.set_config("--config", "", "key=value configuration file");
  app.require_subcommand(1);
  Config cfg;
  app.add_flag("--json", cfg.json, "Machine-readable JSON output");

  auto add_kind = [&](CLI::App* cmd) {
    cmd->add_option("--kind", cfg.kind, "Target step kind: diploma or job")
        ->check(CLI::IsMember({"diploma", "job"}));
  };
  auto add_method = [&](CLI::App* cmd) {
    cmd->add_option("--method", cfg.method,
                    "baseline|last-diploma|highest-diploma|previous|"
                    "first-job|next");
  };

  auto* gen = app.add_subcommand("gen", "Generate a synthetic corpus (JSONL)");
  gen->add_option("--seed", cfg.gen.seed, "Random seed");
  gen->add_option("--users", cfg.gen.n_users, "Number of users");
  gen->add_option("--out", cfg.out, "Output file (default: stdout)");
  gen->add_option("--diploma-concepts", cfg.gen.diploma_concepts);
  gen->add_option("--job-concepts", cfg.gen.job_concepts);
  gen->add_option("--mean-steps", cfg.gen.mean_steps);
  gen->add_option("--continuity-job", cfg.gen.continuity_job);
  gen->add_option("--continuity-diploma", cfg.gen.continuity_diploma);
  gen->add_option("--reorientation-rate", cfg.gen.reorientation_rate);
  gen->add_option("--zipf", cfg.gen.concept_popularity,
                  "Zipf exponent of concept popularity");
  gen->add_option("--diploma-fraction", cfg.gen.diploma_fraction);
  gen->add_option("--unclassified-rate", cfg.gen.unclassified_rate);
  gen->add_option("--multi-concept-rate", cfg.gen.multi_concept_rate);
  gen->add_option("--general-first-diploma", cfg.gen.general_first_diploma,
                  "Treat the first diploma as general education (true/false)");
  gen->add_option("--write-taxonomies", cfg.write_taxonomies,
                  "Directory receiving the matching taxonomy CSV files");

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus, print stats");
  AddDataFlags(ingest, cfg.data, true);
  ingest->add_option("--out", cfg.out, "Write the filtered corpus here");

  auto* train = app.add_subcommand("train", "Build and dump a model");
  AddDataFlags(train, cfg.data, true);
  add_kind(train);
  add_method(train);
  train->add_option("--out", cfg.out, "Write the model dump here");

  auto* predict = app.add_subcommand("predict", "Rank concepts for a context");
  AddDataFlags(predict, cfg.data, true);
  add_kind(predict);
  add_method(predict);
  predict->add_option("--context", cfg.context,
                      "Context concept: domain:index or domain:label");
  predict->add_option("--top", cfg.top, "Show only the first N");
  predict->add_option("--pack-size", cfg.pack_size, "Propositions per pack");

  auto* evaluate =
      app.add_subcommand("evaluate", "Leave-one-out MR / MRR report");
  AddDataFlags(evaluate, cfg.data, true);
  add_kind(evaluate);
  add_method(evaluate);
  AddScoreFlags(evaluate, cfg);
  evaluate->add_option("--histogram", cfg.histogram,
                       "Write rank_bin,count CSV (first method)");

  auto* reorient =
      app.add_subcommand("reorient", "List poorly predicted steps");
  AddDataFlags(reorient, cfg.data, true);
  add_kind(reorient);
  add_method(reorient);
  AddScoreFlags(reorient, cfg);
  reorient->add_option("--threshold", cfg.threshold,
                       "Flag ranks above this (default: pack size)");

  auto* serve = app.add_subcommand("serve", "Start the HTTP API");
  AddDataFlags(serve, cfg.data, false);
  serve->get_option("--corpus")->envname("ROADS_CORPUS");
  serve->get_option("--taxonomy-diploma")->envname("ROADS_TAXONOMY_DIPLOMA");
  serve->get_option("--taxonomy-job")->envname("ROADS_TAXONOMY_JOB");
  serve->get_option("--aliases")->envname("ROADS_ALIASES");
  serve->add_option("--bind", cfg.bind, "host:port")->envname("ROADS_BIND");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) return CmdGen(cfg, out);
    if (*ingest) return CmdIngest(cfg, out);
    if (*train) return CmdTrain(cfg, out);
    if (*predict) return CmdPredict(cfg, out);
    if (*evaluate) return CmdEvaluate(cfg, out);
    if (*reorient) return CmdReorient(cfg, out);
    if (*serve) return CmdServe(cfg, out);
  } catch (const InvalidArgumentError& e) {
    err << "roads: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "roads: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace roads::cli
