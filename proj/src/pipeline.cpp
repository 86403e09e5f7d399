#include "mmir/pipeline.h"

#include <algorithm>
#include <condition_variable>
#include <exception>
#include <mutex>

#include "mmir/errors.h"
#include "mmir/parallel.h"
#include "mmir/tiebreak.h"

namespace mmir {

using nlohmann::json;

void PipelineConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kAlphaOutOfRange, "alpha must be in [0,1]");
  if (jobs < 1) throw Error(ErrorCode::kInvalidArgument, "jobs must be >= 1");
  if (max_output_tokens < 1 || confidence_max_tokens < 1) {
    throw Error(ErrorCode::kInvalidArgument, "token limits must be >= 1");
  }
}

struct BoundedBackend::State {
  std::mutex mu;
  std::condition_variable cv;
  std::size_t limit = 1;
  std::size_t in_flight = 0;
  std::size_t peak = 0;
};

BoundedBackend::BoundedBackend(ScoringBackend& inner, std::size_t limit)
    : inner_(inner), state_(std::make_unique<State>()) {
  state_->limit = std::max<std::size_t>(limit, 1);
}

BoundedBackend::~BoundedBackend() = default;

BackendReply BoundedBackend::complete(const BackendRequest& request) {
  {
    std::unique_lock lock(state_->mu);
    state_->cv.wait(lock, [&] { return state_->in_flight < state_->limit; });
    ++state_->in_flight;
    state_->peak = std::max(state_->peak, state_->in_flight);
  }
  struct Release {
    State& s;
    ~Release() {
      {
        std::lock_guard lock(s.mu);
        --s.in_flight;
      }
      s.cv.notify_one();
    }
  } release{*state_};
  return inner_.complete(request);
}

std::size_t BoundedBackend::peak_in_flight() const {
  std::lock_guard lock(state_->mu);
  return state_->peak;
}

namespace {

MultimodalContent content_for(const CandidateCatalog& catalog, const std::string& id) {
  auto it = catalog.find(id);
  return it == catalog.end() ? MultimodalContent::text(id) : it->second;
}

// fine desc (unscored last), entropy asc (absent last), coarse desc, id asc
bool ranks_before(const RankedEntry& a, const RankedEntry& b) {
  if (a.fine_score.has_value() != b.fine_score.has_value()) return a.fine_score.has_value();
  if (a.fine_score && *a.fine_score != *b.fine_score) return *a.fine_score > *b.fine_score;
  if (a.entropy.has_value() != b.entropy.has_value()) return a.entropy.has_value();
  if (a.entropy && *a.entropy != *b.entropy) return *a.entropy < *b.entropy;
  if (a.coarse_similarity != b.coarse_similarity) return a.coarse_similarity > b.coarse_similarity;
  return a.candidate_id < b.candidate_id;
}

}  // namespace

RankedResult retrieve(const RetrievalQuery& query, const EmbeddingStore& store, const CandidateCatalog& catalog,
                      const PipelineConfig& config, ScoringBackend& backend) {
  config.validate();
  const CandidatePool pool = coarse_topk(store, query.embedding, config.k);

  RankedResult result;
  result.query_id = query.query_id;
  result.ranking.reserve(pool.entries.size());
  for (const auto& e : pool.entries) {
    RankedEntry entry;
    entry.candidate_id = e.candidate_id;
    entry.coarse_similarity = e.coarse_similarity;
    result.ranking.push_back(std::move(entry));
  }

  if (!config.enable_fine_stage) {
    result.degraded = true;
    return result;
  }

  const std::size_t n = result.ranking.size();
  std::vector<std::optional<FineScore>> scores(n);
  std::vector<std::exception_ptr> failures(n);
  const ScoringOptions options{config.score_template, config.max_output_tokens};
  parallel_for(n, config.jobs, [&](std::size_t i) {
    const auto& id = result.ranking[i].candidate_id;
    try {
      scores[i] = score_pair(backend, {query.query_id, id}, query.content, content_for(catalog, id), options);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kBackendUnavailable) throw;
      failures[i] = std::current_exception();
    }
  });

  double backend_ms = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ++result.counters.fine_calls;
    if (!scores[i]) {
      ++result.counters.failed_calls;
      if (config.strict) std::rethrow_exception(failures[i]);
      continue;
    }
    result.counters.retry_calls += static_cast<std::size_t>(scores[i]->attempts - 1);
    backend_ms += scores[i]->backend_latency_ms;
    result.ranking[i].fine_score = scores[i]->score;
    result.ranking[i].score_warning = scores[i]->parse_failed;
  }
  if (result.counters.failed_calls == n) {
    result.degraded = true;
    result.backend_ms = backend_ms;
    return result;  // coarse order
  }

  int top = -1;
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = result.ranking[i].fine_score;
    if (!s) continue;
    if (*s > top) {
      top = *s;
      tied.clear();
    }
    if (*s == top) tied.push_back(i);
  }

  std::optional<std::string> winner;
  if (config.enable_tiebreak && tied.size() >= 2) {
    result.counters.tied_set_size = tied.size();
    std::vector<std::optional<EntropyScore>> entropies(tied.size());
    parallel_for(tied.size(), config.jobs, [&](std::size_t t) {
      const auto& id = result.ranking[tied[t]].candidate_id;
      BackendRequest request;
      request.prompt = build_confidence_prompt(query.content, content_for(catalog, id), config.confidence_max_tokens);
      request.pair = {query.query_id, id};
      request.kind = RequestKind::kConfidence;
      try {
        const BackendReply reply = backend.complete(request);
        if (reply.last_token_top_logprobs && !reply.last_token_top_logprobs->empty()) {
          entropies[t] = entropy_score(id, distribution_from_top_logprobs(*reply.last_token_top_logprobs));
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kBackendUnavailable || config.strict) throw;
      }
    });
    std::vector<EntropyScore> scored;
    for (std::size_t t = 0; t < tied.size(); ++t) {
      ++result.counters.entropy_calls;
      if (!entropies[t]) continue;
      auto& entry = result.ranking[tied[t]];
      entry.entropy = entropies[t]->h_raw;
      entry.tie_break_applied = true;
      scored.push_back(*entropies[t]);
    }
    if (!scored.empty()) winner = break_ties(scored);
  }

  std::stable_sort(result.ranking.begin(), result.ranking.end(), ranks_before);
  if (winner && result.ranking.front().candidate_id != *winner) {
    // Exact entropy tie: the winner is the smallest id, which may sit behind a higher coarse score.
    auto it = std::find_if(result.ranking.begin(), result.ranking.end(),
                           [&](const RankedEntry& e) { return e.candidate_id == *winner; });
    std::rotate(result.ranking.begin(), it, it + 1);
  }
  result.backend_ms = backend_ms;
  return result;
}

std::vector<QueryOutcome> retrieve_batch(const std::vector<RetrievalQuery>& queries, const EmbeddingStore& store,
                                         const CandidateCatalog& catalog, const PipelineConfig& config,
                                         ScoringBackend& backend) {
  config.validate();
  BoundedBackend bounded(backend, config.jobs);
  std::vector<QueryOutcome> outcomes(queries.size());
  parallel_for(queries.size(), config.jobs, [&](std::size_t i) {
    outcomes[i].query_id = queries[i].query_id;
    try {
      outcomes[i].result = retrieve(queries[i], store, catalog, config, bounded);
    } catch (const std::exception& e) {
      if (config.strict) throw;
      outcomes[i].error = e.what();
    }
  });
  return outcomes;
}

json result_to_json(const RankedResult& result) {
  json ranking = json::array();
  for (const auto& e : result.ranking) {
    ranking.push_back({{"candidate_id", e.candidate_id},
                       {"coarse_similarity", e.coarse_similarity},
                       {"fine_score", e.fine_score ? json(*e.fine_score) : json(nullptr)},
                       {"entropy", e.entropy ? json(*e.entropy) : json(nullptr)},
                       {"tie_break_applied", e.tie_break_applied},
                       {"score_warning", e.score_warning}});
  }
  const auto& c = result.counters;
  return {{"query_id", result.query_id},
          {"ranking", ranking},
          {"degraded", result.degraded},
          {"provenance",
           {{"fine_calls", c.fine_calls},
            {"entropy_calls", c.entropy_calls},
            {"retry_calls", c.retry_calls},
            {"failed_calls", c.failed_calls},
            {"tied_set_size", c.tied_set_size}}}};
}

RankedResult result_from_json(const json& j) {
  RankedResult r;
  r.query_id = j.at("query_id").get<std::string>();
  r.degraded = j.at("degraded").get<bool>();
  for (const auto& e : j.at("ranking")) {
    RankedEntry entry;
    entry.candidate_id = e.at("candidate_id").get<std::string>();
    entry.coarse_similarity = e.at("coarse_similarity").get<double>();
    if (!e.at("fine_score").is_null()) entry.fine_score = e.at("fine_score").get<int>();
    if (!e.at("entropy").is_null()) entry.entropy = e.at("entropy").get<double>();
    entry.tie_break_applied = e.at("tie_break_applied").get<bool>();
    entry.score_warning = e.value("score_warning", false);
    r.ranking.push_back(std::move(entry));
  }
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    r.counters.fine_calls = p.value("fine_calls", std::size_t{0});
    r.counters.entropy_calls = p.value("entropy_calls", std::size_t{0});
    r.counters.retry_calls = p.value("retry_calls", std::size_t{0});
    r.counters.failed_calls = p.value("failed_calls", std::size_t{0});
    r.counters.tied_set_size = p.value("tied_set_size", std::size_t{0});
  }
  return r;
}

}  // namespace mmir
