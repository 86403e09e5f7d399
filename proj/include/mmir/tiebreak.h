#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mmir/content.h"

namespace mmir {

struct TokenProb {
  std::string token;
  double p = 0.0;
};

struct TokenDistribution {
  std::vector<TokenProb> probs;
  double coverage = 1.0;  // listed mass before renormalization
  bool renormalized = false;
};

struct EntropyScore {
  std::string candidate_id;
  double h_raw = 0.0;         // nats
  double h_normalized = 0.0;  // h_raw / ln(V_effective); 0 when V_effective = 1
};

std::string_view confidence_instruction() noexcept;

// Shannon entropy in nats over a renormalized distribution.
double entropy(const TokenDistribution& dist);

// Exponentiates top-K logprobs, records their total mass, renormalizes to 1.
TokenDistribution distribution_from_top_logprobs(std::span<const TokenLogprob> top);

EntropyScore entropy_score(std::string candidate_id, const TokenDistribution& dist);

// "<query>, <candidate>. Does the candidate match the query, True or False."
ScorePrompt build_confidence_prompt(const MultimodalContent& query, const MultimodalContent& candidate,
                                    int max_output_tokens = 1);

// Minimum h_raw; exact ties go to the smallest candidate id.
std::string break_ties(std::span<const EntropyScore> tied);

}  // namespace mmir
