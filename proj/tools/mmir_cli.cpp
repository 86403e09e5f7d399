// mmir: coarse-then-fine multimodal retrieval from the command line.
//
//   mmir embed-ingest --store store.manifest.json
//   mmir retrieve     --dataset dataset.json [--query ID]... [--out results.jsonl]
//   mmir eval         --dataset dataset.json [--no-fine] [--no-tiebreak] [--out report.csv]
//   mmir sweep-k      --dataset dataset.json --ks 3,5,7,9 [--out sweep.csv]
//   mmir kernel-verify --fixtures tests/fixtures/kernel
//
// Data goes to --out (or stdout); logs and the resolved config go to stderr.
// Exit codes: 0 ok, 2 input/validation error, 3 backend error (strict), 4 verification failure.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mmir/config.h"
#include "mmir/dataset.h"
#include "mmir/embedstore.h"
#include "mmir/errors.h"
#include "mmir/evalharness.h"
#include "mmir/kernel_fixtures.h"
#include "mmir/pipeline.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitBackend = 3;
constexpr int kExitVerify = 4;

struct Overrides {
  std::string config_path;
  std::string store;
  std::string dataset;
  std::string backend;
  std::string endpoint;
  std::string model;
  std::size_t k = 0;
  double alpha = 0.0;
  bool no_fine = false;
  bool no_tiebreak = false;
  bool strict = false;
  std::size_t jobs = 0;
  std::uint64_t seed = 0;
  int quantize = 0;
  double noise = 0.0;
  double error_rate = 0.0;
  std::string out;

  CLI::Option* k_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* jobs_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* quantize_opt = nullptr;
  CLI::Option* noise_opt = nullptr;
  CLI::Option* error_rate_opt = nullptr;
};

void add_run_options(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "JSON config file");
  cmd->add_option("--dataset", o.dataset, "dataset manifest")->required();
  cmd->add_option("--store", o.store, "candidate store manifest (overrides the dataset's)");
  cmd->add_option("--backend", o.backend, "scoring backend")->check(CLI::IsMember({"mock", "http"}));
  cmd->add_option("--endpoint", o.endpoint, "chat-completions endpoint URL");
  cmd->add_option("--model", o.model, "model name sent to the endpoint");
  o.k_opt = cmd->add_option("--k", o.k, "coarse pool size")->check(CLI::PositiveNumber);
  o.alpha_opt = cmd->add_option("--alpha", o.alpha, "visual re-injection ratio")->check(CLI::Range(0.0, 1.0));
  cmd->add_flag("--no-fine", o.no_fine, "skip the fine stage (coarse ranking only)");
  cmd->add_flag("--no-tiebreak", o.no_tiebreak, "disable entropy tie-breaking");
  cmd->add_flag("--strict", o.strict, "fail on backend errors instead of degrading");
  o.jobs_opt = cmd->add_option("--jobs", o.jobs, "max in-flight backend calls")->check(CLI::PositiveNumber);
  o.seed_opt = cmd->add_option("--seed", o.seed, "mock backend seed");
  o.quantize_opt = cmd->add_option("--quantize", o.quantize, "mock score quantization levels (0 = off)");
  o.noise_opt = cmd->add_option("--noise", o.noise, "mock score noise amplitude");
  o.error_rate_opt = cmd->add_option("--error-rate", o.error_rate, "mock unparseable-reply rate");
  cmd->add_option("--out", o.out, "output file (default: stdout)");
}

mmir::AppConfig resolve(const Overrides& o) {
  mmir::AppConfig c = o.config_path.empty() ? mmir::AppConfig{} : mmir::load_config(o.config_path);
  if (!o.backend.empty()) c.backend.kind = mmir::backend_kind_from_name(o.backend);
  if (!o.endpoint.empty()) c.backend.http.endpoint = o.endpoint;
  if (!o.model.empty()) c.backend.http.model = o.model;
  if (o.k_opt->count()) c.pipeline.k = o.k;
  if (o.alpha_opt->count()) c.pipeline.alpha = o.alpha;
  if (o.no_fine) c.pipeline.enable_fine_stage = false;
  if (o.no_tiebreak) c.pipeline.enable_tiebreak = false;
  if (o.strict) c.pipeline.strict = true;
  if (o.jobs_opt->count()) c.pipeline.jobs = o.jobs;
  if (o.seed_opt->count()) c.backend.mock.seed = o.seed;
  if (o.quantize_opt->count()) c.backend.mock.quantization_levels = o.quantize;
  if (o.noise_opt->count()) c.backend.mock.noise = o.noise;
  if (o.error_rate_opt->count()) c.backend.mock.error_rate = o.error_rate;
  mmir::resolve_config(c);
  std::cerr << "resolved config: " << mmir::config_to_json(c).dump() << '\n';
  return c;
}

struct Session {
  mmir::AppConfig config;
  mmir::RetrievalDataset dataset;
  std::unique_ptr<mmir::ScoringBackend> backend;
};

Session open_session(const Overrides& o) {
  Session s;
  s.config = resolve(o);
  s.dataset = mmir::load_dataset(o.dataset);
  if (!o.store.empty()) s.dataset.store = std::make_shared<const mmir::EmbeddingStore>(mmir::ingest_embeddings(o.store));
  if (s.config.backend.kind == mmir::BackendKind::kMock && !s.dataset.oracle) {
    throw mmir::Error(mmir::ErrorCode::kInvalidArgument, "the mock backend needs an oracle_store in the dataset");
  }
  s.backend = mmir::make_backend(s.config.backend, s.dataset.oracle);
  return s;
}

// Writes through to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw mmir::Error(mmir::ErrorCode::kMissingFile, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

int cmd_embed_ingest(const std::string& manifest) {
  const auto store = mmir::ingest_embeddings(manifest);
  const auto s = mmir::summarize(store);
  std::printf("count=%zu dim=%zu normalization=%s min_norm=%.6f max_norm=%.6f mean_norm=%.6f\n", s.count, s.dim,
              mmir::normalization_name(store.manifest().normalization).c_str(), s.min_norm, s.max_norm, s.mean_norm);
  return kExitOk;
}

int cmd_retrieve(const Overrides& o, const std::vector<std::string>& only) {
  Session s = open_session(o);
  std::vector<mmir::RetrievalQuery> queries;
  const std::set<std::string> wanted(only.begin(), only.end());
  for (const auto& q : s.dataset.queries) {
    if (wanted.empty() || wanted.count(q.query.query_id)) queries.push_back(q.query);
  }
  if (!wanted.empty() && queries.size() != wanted.size()) {
    throw mmir::Error(mmir::ErrorCode::kUnknownId, "some --query ids are not in the dataset");
  }
  const auto outcomes =
      mmir::retrieve_batch(queries, *s.dataset.store, s.dataset.catalog, s.config.pipeline, *s.backend);
  Output out(o.out);
  int status = kExitOk;
  for (const auto& oc : outcomes) {
    if (!oc.result) {
      std::cerr << "error: query " << oc.query_id << ": " << oc.error << '\n';
      status = kExitInput;
      continue;
    }
    if (oc.result->degraded && s.config.pipeline.enable_fine_stage) {
      std::cerr << "warning: query " << oc.query_id << " degraded to coarse ranking (backend unavailable)\n";
    }
    out.stream() << mmir::result_to_json(*oc.result).dump() << '\n';
  }
  return status;
}

void log_report(const mmir::EvalReport& r) {
  std::cerr << "k=" << r.k << " recall_at_1=" << r.recall_at_1 << " ms/query=" << r.mean_ms_per_query
            << " backend_ms/query=" << r.mean_backend_ms_per_query << " calls/query=" << r.mean_backend_calls
            << " failed_queries=" << r.failed_queries << '\n';
}

int cmd_eval(const Overrides& o) {
  Session s = open_session(o);
  const auto run = mmir::evaluate(s.dataset, s.config.pipeline, *s.backend);
  log_report(run.report);
  Output out(o.out);
  mmir::write_csv_header(out.stream());
  mmir::write_csv_row(out.stream(), run.report);
  return kExitOk;
}

int cmd_sweep_k(const Overrides& o, const std::vector<std::size_t>& ks) {
  Session s = open_session(o);
  const auto reports = mmir::sweep_k(ks, s.dataset, s.config.pipeline, *s.backend);
  Output out(o.out);
  mmir::write_csv_header(out.stream());
  for (const auto& r : reports) {
    log_report(r);
    mmir::write_csv_row(out.stream(), r);
  }
  return kExitOk;
}

int cmd_kernel_verify(const std::string& dir, double tolerance) {
  const auto report = mmir::reinjection::verify_fixture_dir(dir, tolerance);
  for (const auto& f : report.outcomes) {
    std::printf("%s %s fused_dev=%.3e equiv_dev=%.3e boundaries=%s\n", f.passed ? "PASS" : "FAIL", f.name.c_str(),
                f.fused_deviation, f.equivalence_deviation, f.boundaries_exact ? "exact" : "BROKEN");
  }
  std::printf("fixtures=%zu max_relative_deviation=%.3e tolerance=%.1e\n", report.outcomes.size(),
              report.max_deviation, tolerance);
  return report.all_passed ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Coarse-then-fine multimodal retrieval"};
  app.require_subcommand(1, 1);

  std::string ingest_manifest;
  auto* ingest = app.add_subcommand("embed-ingest", "validate and summarize an embedding store");
  ingest->add_option("--store,manifest", ingest_manifest, "store manifest")->required();

  Overrides retrieve_opts;
  std::vector<std::string> only_queries;
  auto* retrieve = app.add_subcommand("retrieve", "rank candidates for dataset queries (JSONL)");
  add_run_options(retrieve, retrieve_opts);
  retrieve->add_option("--query", only_queries, "restrict to these query ids");

  Overrides eval_opts;
  auto* eval = app.add_subcommand("eval", "Recall@1 / Precision@1 report (CSV)");
  add_run_options(eval, eval_opts);

  Overrides sweep_opts;
  std::vector<std::size_t> ks{3, 5, 7, 9};
  auto* sweep = app.add_subcommand("sweep-k", "top-k sensitivity sweep (CSV)");
  add_run_options(sweep, sweep_opts);
  sweep->add_option("--ks", ks, "comma-separated k grid")->delimiter(',');

  std::string fixtures;
  double tolerance = mmir::reinjection::kKernelTolerance;
  auto* kernel = app.add_subcommand("kernel-verify", "check the re-injection kernel against fixtures");
  kernel->add_option("--fixtures,dir", fixtures, "fixture directory")->required();
  kernel->add_option("--tolerance", tolerance, "max relative deviation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (*ingest) return cmd_embed_ingest(ingest_manifest);
    if (*retrieve) return cmd_retrieve(retrieve_opts, only_queries);
    if (*eval) return cmd_eval(eval_opts);
    if (*sweep) return cmd_sweep_k(sweep_opts, ks);
    if (*kernel) return cmd_kernel_verify(fixtures, tolerance);
  } catch (const mmir::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == mmir::ErrorCode::kBackendUnavailable ? kExitBackend : kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}
