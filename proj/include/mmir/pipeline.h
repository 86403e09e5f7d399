#pragma once

#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "mmir/embedstore.h"
#include "mmir/finescorer.h"

namespace mmir {

struct PipelineConfig {
  std::size_t k = 5;
  // Injection ratio for visual re-injection. Carried for provenance; the kernel consumes it.
  double alpha = 0.3;
  bool enable_fine_stage = true;
  bool enable_tiebreak = true;
  // Backend failures raise instead of degrading to coarse order.
  bool strict = false;
  // Cap on concurrent backend calls.
  std::size_t jobs = 4;
  std::string score_template;  // empty: default_score_template()
  int max_output_tokens = 16;
  int confidence_max_tokens = 1;

  void validate() const;
};

struct RetrievalQuery {
  std::string query_id;
  MultimodalContent content;
  std::vector<float> embedding;
};

// Candidate id -> content shown to the fine stage. Missing ids are presented as their id text.
using CandidateCatalog = std::unordered_map<std::string, MultimodalContent>;

struct RankedEntry {
  std::string candidate_id;
  double coarse_similarity = 0.0;
  std::optional<int> fine_score;
  std::optional<double> entropy;
  bool tie_break_applied = false;
  bool score_warning = false;  // reply never yielded a parseable score
  bool operator==(const RankedEntry&) const = default;
};

// Backend call accounting for one query.
struct CallCounters {
  std::size_t fine_calls = 0;     // one per scored candidate
  std::size_t entropy_calls = 0;  // one per tied candidate
  std::size_t retry_calls = 0;    // parse re-asks
  std::size_t failed_calls = 0;
  std::size_t tied_set_size = 0;
  bool operator==(const CallCounters&) const = default;

  std::size_t logical_calls() const noexcept { return fine_calls + entropy_calls; }
  std::size_t total_requests() const noexcept { return fine_calls + entropy_calls + retry_calls; }
};

struct RankedResult {
  std::string query_id;
  std::vector<RankedEntry> ranking;
  bool degraded = false;
  CallCounters counters;
  double backend_ms = 0.0;  // excluded from serialization
  bool operator==(const RankedResult& o) const {
    return query_id == o.query_id && ranking == o.ranking && degraded == o.degraded && counters == o.counters;
  }
};

// Caps concurrent complete() calls on a wrapped backend.
class BoundedBackend final : public ScoringBackend {
 public:
  BoundedBackend(ScoringBackend& inner, std::size_t limit);
  ~BoundedBackend() override;

  BackendReply complete(const BackendRequest& request) override;
  std::string name() const override { return inner_.name(); }
  std::size_t peak_in_flight() const;

 private:
  struct State;
  ScoringBackend& inner_;
  std::unique_ptr<State> state_;
};

// Coarse top-k, fine scoring of the pool, entropy tie-break among the top-score ties.
RankedResult retrieve(const RetrievalQuery& query, const EmbeddingStore& store, const CandidateCatalog& catalog,
                      const PipelineConfig& config, ScoringBackend& backend);

struct QueryOutcome {
  std::string query_id;
  std::optional<RankedResult> result;
  std::string error;  // set when result is empty
};

// Same results as running retrieve() per query in order. Errors are collected per query
// unless config.strict, in which case the first error (in query order) is rethrown.
std::vector<QueryOutcome> retrieve_batch(const std::vector<RetrievalQuery>& queries, const EmbeddingStore& store,
                                         const CandidateCatalog& catalog, const PipelineConfig& config,
                                         ScoringBackend& backend);

nlohmann::json result_to_json(const RankedResult& result);
RankedResult result_from_json(const nlohmann::json& j);

}  // namespace mmir
