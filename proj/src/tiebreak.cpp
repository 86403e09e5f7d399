#include "mmir/tiebreak.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "mmir/errors.h"

namespace mmir {

namespace {

constexpr double kNormalizationTolerance = 1e-9;

}  // namespace

std::string_view confidence_instruction() noexcept { return "Does the candidate match the query, True or False."; }

double entropy(const TokenDistribution& dist) {
  if (!dist.renormalized) throw Error(ErrorCode::kNotRenormalized, "distribution has not been renormalized");
  if (dist.probs.empty()) throw Error(ErrorCode::kEmptyList, "empty distribution");
  double total = 0.0;
  double h = 0.0;
  for (const auto& tp : dist.probs) {
    if (!(tp.p > 0.0)) throw Error(ErrorCode::kNonPositiveProbability, "token '" + tp.token + "' has p <= 0");
    total += tp.p;
    h -= tp.p * std::log(tp.p);
  }
  if (std::abs(total - 1.0) > kNormalizationTolerance) {
    throw Error(ErrorCode::kNotRenormalized, "probabilities sum to " + std::to_string(total));
  }
  // Rounding can push a one-hot or uniform result a hair outside [0, ln V].
  return std::clamp(h, 0.0, std::log(static_cast<double>(dist.probs.size())));
}

TokenDistribution distribution_from_top_logprobs(std::span<const TokenLogprob> top) {
  if (top.empty()) throw Error(ErrorCode::kEmptyList, "no logprobs");
  TokenDistribution dist;
  std::unordered_set<std::string> seen;
  double coverage = 0.0;
  for (const auto& t : top) {
    if (t.logprob > 0.0) throw Error(ErrorCode::kPositiveLogprob, "token '" + t.token + "' has logprob > 0");
    if (!seen.insert(t.token).second) throw Error(ErrorCode::kInvalidArgument, "duplicate token '" + t.token + "'");
    const double p = std::exp(t.logprob);
    coverage += p;
    dist.probs.push_back({t.token, p});
  }
  if (!(coverage > 0.0)) throw Error(ErrorCode::kNonPositiveProbability, "listed tokens carry no mass");
  for (auto& tp : dist.probs) tp.p /= coverage;
  dist.coverage = std::min(coverage, 1.0);
  dist.renormalized = true;
  return dist;
}

EntropyScore entropy_score(std::string candidate_id, const TokenDistribution& dist) {
  EntropyScore s;
  s.candidate_id = std::move(candidate_id);
  s.h_raw = entropy(dist);
  const auto v = dist.probs.size();
  s.h_normalized = v <= 1 ? 0.0 : s.h_raw / std::log(static_cast<double>(v));
  return s;
}

ScorePrompt build_confidence_prompt(const MultimodalContent& query, const MultimodalContent& candidate,
                                    int max_output_tokens) {
  query.validate();
  candidate.validate();
  std::vector<Part> parts;
  for (const auto& p : query.parts()) append_part(parts, p);
  append_part(parts, TextPart{", "});
  for (const auto& p : candidate.parts()) append_part(parts, p);
  append_part(parts, TextPart{". " + std::string(confidence_instruction())});

  ScorePrompt prompt;
  prompt.messages.push_back({Role::kUser, MultimodalContent(std::move(parts))});
  prompt.max_output_tokens = max_output_tokens;
  prompt.temperature = 0.0;
  return prompt;
}

std::string break_ties(std::span<const EntropyScore> tied) {
  if (tied.empty()) throw Error(ErrorCode::kEmptyTieSet, "break_ties on an empty set");
  const auto best = std::min_element(tied.begin(), tied.end(), [](const EntropyScore& a, const EntropyScore& b) {
    return a.h_raw < b.h_raw || (a.h_raw == b.h_raw && a.candidate_id < b.candidate_id);
  });
  return best->candidate_id;
}

}  // namespace mmir
