#include "mmir/evalharness.h"

#include <chrono>
#include <cstdio>
#include <limits>

#include "mmir/errors.h"

namespace mmir {

double recall_at_1(std::span<const RankedResult> results, const GoldMap& gold) {
  if (results.empty()) throw Error(ErrorCode::kEmptyResults, "no results to score");
  std::size_t hits = 0;
  for (const auto& r : results) {
    auto it = gold.find(r.query_id);
    if (it == gold.end()) throw Error(ErrorCode::kMissingGold, "no gold for query '" + r.query_id + "'");
    if (!r.ranking.empty() && r.ranking.front().candidate_id == it->second) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

double precision_at_1(std::span<const RankedResult> results, const GoldMap& gold) {
  return recall_at_1(results, gold);
}

double pool_hit_rate(const EmbeddingStore& store, const RetrievalDataset& dataset, std::size_t k) {
  if (dataset.queries.empty()) throw Error(ErrorCode::kEmptyResults, "dataset has no queries");
  std::size_t hits = 0;
  for (const auto& q : dataset.queries) {
    const auto pool = coarse_topk(store, q.query.embedding, k);
    for (const auto& e : pool.entries) {
      if (e.candidate_id == q.gold_candidate_id) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(dataset.queries.size());
}

EvalRun evaluate(const RetrievalDataset& dataset, const PipelineConfig& config, ScoringBackend& backend) {
  if (!dataset.store) throw Error(ErrorCode::kEmptyStore, "dataset has no store");
  const auto start = std::chrono::steady_clock::now();
  EvalRun run;
  run.outcomes = retrieve_batch(dataset.retrieval_queries(), *dataset.store, dataset.catalog, config, backend);
  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  std::vector<RankedResult> results;
  EvalReport& rep = run.report;
  rep.dataset = dataset.name;
  rep.k = config.k;
  rep.fine_enabled = config.enable_fine_stage;
  rep.tiebreak_enabled = config.enable_tiebreak;
  rep.queries = run.outcomes.size();
  double calls = 0.0, logical = 0.0, backend_ms = 0.0;
  rep.max_budget_excess = std::numeric_limits<long long>::min();
  for (const auto& o : run.outcomes) {
    if (!o.result) {
      ++rep.failed_queries;
      // A failed query counts as a miss.
      results.push_back(RankedResult{o.query_id, {}, true, {}, 0.0});
      continue;
    }
    const auto& c = o.result->counters;
    calls += static_cast<double>(c.total_requests());
    logical += static_cast<double>(c.logical_calls());
    backend_ms += o.result->backend_ms;
    const long long excess = static_cast<long long>(c.logical_calls()) - static_cast<long long>(config.k) -
                             static_cast<long long>(c.tied_set_size);
    rep.max_budget_excess = std::max(rep.max_budget_excess, excess);
    results.push_back(*o.result);
  }
  const auto gold = dataset.gold();
  if (rep.max_budget_excess == std::numeric_limits<long long>::min()) rep.max_budget_excess = 0;
  rep.recall_at_1 = recall_at_1(results, gold);
  rep.precision_at_1 = precision_at_1(results, gold);
  rep.pool_hit_rate = pool_hit_rate(*dataset.store, dataset, config.k);
  const double n = static_cast<double>(rep.queries);
  rep.mean_backend_calls = calls / n;
  rep.mean_logical_calls = logical / n;
  rep.mean_ms_per_query = elapsed_ms / n;
  rep.mean_backend_ms_per_query = backend_ms / n;
  return run;
}

std::vector<EvalReport> sweep_k(std::span<const std::size_t> ks, const RetrievalDataset& dataset,
                                const PipelineConfig& config, ScoringBackend& backend) {
  if (ks.empty()) throw Error(ErrorCode::kInvalidArgument, "sweep needs at least one k");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
    if (i > 0 && ks[i] <= ks[i - 1]) throw Error(ErrorCode::kInvalidArgument, "ks must be strictly increasing");
  }
  std::vector<EvalReport> reports;
  for (std::size_t k : ks) {
    PipelineConfig c = config;
    c.k = k;
    reports.push_back(evaluate(dataset, c, backend).report);
  }
  return reports;
}

void write_csv_header(std::ostream& out) {
  out << "dataset,k,recall_at_1,precision_at_1,pool_hit_rate,mean_backend_calls,mean_ms_per_query,fine_enabled,"
         "tiebreak_enabled\n";
}

void write_csv_row(std::ostream& out, const EvalReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f,%.6f,%.4f,%.4f,%d,%d", r.k, r.recall_at_1, r.precision_at_1,
                r.pool_hit_rate, r.mean_backend_calls, r.mean_ms_per_query, r.fine_enabled ? 1 : 0,
                r.tiebreak_enabled ? 1 : 0);
  std::string name = r.dataset;
  if (name.find_first_of(",\"\n") != std::string::npos) {
    std::string quoted = "\"";
    for (char ch : name) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    name = quoted + "\"";
  }
  out << name << ',' << buf << '\n';
}

}  // namespace mmir
