#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "mmir/content.h"

namespace mmir {

enum class RequestKind { kScore, kConfidence };

// Identifies the (query, candidate) pair behind a prompt. Remote backends ignore it;
// the mock backend uses it to look up its oracle vectors.
struct PairKey {
  std::string query_id;
  std::string candidate_id;
};

struct BackendRequest {
  ScorePrompt prompt;
  PairKey pair;
  RequestKind kind = RequestKind::kScore;
  int attempt = 0;  // 0 for the first call, 1 for the parse re-ask
};

// A generative model answering prompts. Implementations must tolerate concurrent
// calls to complete(). Throws Error(kBackendUnavailable) once retries are exhausted.
class ScoringBackend {
 public:
  virtual ~ScoringBackend() = default;
  virtual BackendReply complete(const BackendRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct FineScore {
  std::string candidate_id;
  int score = 0;  // [0, 100]
  std::string raw_text;
  double backend_latency_ms = 0.0;
  bool parse_failed = false;  // both attempts unparseable, score forced to 0
  int attempts = 0;
  std::optional<std::vector<TokenLogprob>> last_token_top_logprobs;
};

struct ScoringOptions {
  std::string template_text;
  int max_output_tokens = 16;
};

inline constexpr int kMinScore = 0;
inline constexpr int kMaxScore = 100;

std::string_view default_score_template() noexcept;
std::string_view reask_instruction() noexcept;

// Substitutes {query} and {candidate} (every occurrence) with the contents' parts.
// Image parts stay image parts. Temperature is always 0.
ScorePrompt build_score_prompt(const MultimodalContent& query, const MultimodalContent& candidate,
                               std::string_view template_text, int max_output_tokens = 16);

// First maximal run of decimal digits, clamped to [0, 100]. Throws Error(kNoScoreFound).
int parse_score(std::string_view text);

// One fine-stage judgement with a single re-ask on parse failure.
FineScore score_pair(ScoringBackend& backend, const PairKey& pair, const MultimodalContent& query,
                     const MultimodalContent& candidate, const ScoringOptions& options);

std::string load_template(const std::string& path);

}  // namespace mmir
