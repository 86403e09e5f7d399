#pragma once

#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmir/dataset.h"
#include "mmir/pipeline.h"

namespace mmir {

using GoldMap = std::unordered_map<std::string, std::string>;

struct EvalReport {
  std::string dataset;
  std::size_t k = 0;
  double recall_at_1 = 0.0;
  double precision_at_1 = 0.0;
  double pool_hit_rate = 0.0;
  double mean_backend_calls = 0.0;  // requests sent, parse re-asks included
  double mean_logical_calls = 0.0;  // fine + entropy calls
  double mean_ms_per_query = 0.0;
  double mean_backend_ms_per_query = 0.0;
  bool fine_enabled = true;
  bool tiebreak_enabled = true;
  std::size_t queries = 0;
  std::size_t failed_queries = 0;
  // Largest (logical calls - k - tied set) seen; <= 0 means the call budget held.
  long long max_budget_excess = 0;
};

// Fraction of results whose top-1 is the gold candidate.
double recall_at_1(std::span<const RankedResult> results, const GoldMap& gold);

// Single-gold datasets: identical to recall_at_1.
double precision_at_1(std::span<const RankedResult> results, const GoldMap& gold);

// Fraction of queries whose gold appears in the coarse top-k pool.
double pool_hit_rate(const EmbeddingStore& store, const RetrievalDataset& dataset, std::size_t k);

struct EvalRun {
  EvalReport report;
  std::vector<QueryOutcome> outcomes;
};

EvalRun evaluate(const RetrievalDataset& dataset, const PipelineConfig& config, ScoringBackend& backend);

// One report per k; ks must be non-empty and strictly increasing.
std::vector<EvalReport> sweep_k(std::span<const std::size_t> ks, const RetrievalDataset& dataset,
                                const PipelineConfig& config, ScoringBackend& backend);

void write_csv_header(std::ostream& out);
void write_csv_row(std::ostream& out, const EvalReport& report);

}  // namespace mmir
