#include "mmir/mock_backend.h"

#include <algorithm>
#include <array>
#include <cmath>

#include "mmir/errors.h"

namespace mmir {

namespace {

constexpr std::uint64_t kNoiseSalt = 0x6e6f697365ull;
constexpr std::uint64_t kErrorSalt = 0x6572726f72ull;
constexpr std::uint64_t kConfidenceSalt = 0x636f6e66ull;
constexpr std::uint64_t kTailSalt = 0x7461696cull;

// Mass kept outside the reported tokens, so coverage < 1 like a real top-K list.
constexpr double kHiddenMass = 0.02;

std::uint64_t fnv1a(std::string_view s, std::uint64_t h) {
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace

MockBackend::MockBackend(std::shared_ptr<const EmbeddingStore> oracle, MockOptions options)
    : oracle_(std::move(oracle)), options_(options) {
  if (!oracle_) throw Error(ErrorCode::kInvalidArgument, "mock backend needs an oracle store");
  if (options_.error_rate < 0.0 || options_.error_rate > 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "error_rate must be in [0,1]");
  }
  if (options_.noise < 0.0) throw Error(ErrorCode::kInvalidArgument, "noise must be >= 0");
  if (options_.quantization_levels < 0) throw Error(ErrorCode::kInvalidArgument, "quantization_levels must be >= 0");
}

double MockBackend::unit_hash(const PairKey& pair, std::uint64_t salt) const {
  std::uint64_t h = 0xcbf29ce484222325ull;
  h = fnv1a(pair.query_id, h);
  h = fnv1a("\x1f", h);
  h = fnv1a(pair.candidate_id, h);
  h = splitmix64(h ^ splitmix64(options_.seed) ^ splitmix64(salt));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double MockBackend::oracle_cosine(const PairKey& pair) const {
  const auto q = oracle_->find(pair.query_id);
  const auto c = oracle_->find(pair.candidate_id);
  if (!q || !c) {
    throw Error(ErrorCode::kUnknownPair, "oracle has no vectors for (" + pair.query_id + ", " + pair.candidate_id + ")");
  }
  return cosine_similarity(oracle_->row(*q), oracle_->row(*c));
}

bool MockBackend::fails(const PairKey& pair) const {
  return options_.error_rate > 0.0 && unit_hash(pair, kErrorSalt) < options_.error_rate;
}

int MockBackend::expected_score(const PairKey& pair) const {
  const double cosine = oracle_cosine(pair);
  double score = 0.0;
  if (options_.quantization_levels > 0) {
    const double levels = options_.quantization_levels;
    score = std::round(std::clamp(cosine, 0.0, 1.0) * levels) * (100.0 / levels);
  } else {
    score = 100.0 * cosine;
  }
  if (options_.noise > 0.0) score += options_.noise * (2.0 * unit_hash(pair, kNoiseSalt) - 1.0);
  return static_cast<int>(std::clamp(std::round(score), 0.0, 100.0));
}

std::vector<TokenLogprob> MockBackend::confidence_logprobs(const PairKey& pair) const {
  const double base = std::clamp(oracle_cosine(pair), 0.0, 1.0);
  const double jitter = options_.confidence_jitter * (unit_hash(pair, kConfidenceSalt) - 0.5);
  const double confidence = std::clamp(base + jitter, 0.0, 1.0);

  const double p_true = 0.02 + 0.96 * confidence;
  const double p_false = 0.9 * (1.0 - p_true);
  const double tail = 1.0 - p_true - p_false;
  std::array<double, 3> weights{};
  double weight_sum = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    weights[i] = 0.1 + unit_hash(pair, kTailSalt + i);
    weight_sum += weights[i];
  }
  static const std::array<const char*, 3> kTailTokens{"true", "false", "Yes"};
  std::vector<TokenLogprob> out;
  const double visible = 1.0 - kHiddenMass;
  out.push_back({"True", std::log(visible * p_true)});
  out.push_back({"False", std::log(visible * p_false)});
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out.push_back({kTailTokens[i], std::log(visible * tail * weights[i] / weight_sum)});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.logprob > b.logprob; });
  return out;
}

BackendReply MockBackend::complete(const BackendRequest& request) {
  BackendReply reply;
  auto logprobs = confidence_logprobs(request.pair);
  if (request.kind == RequestKind::kConfidence) {
    reply.text = logprobs.front().token == "True" ? "True" : "False";
    reply.last_token_top_logprobs = std::move(logprobs);
    return reply;
  }
  if (fails(request.pair)) {
    reply.text = "I cannot tell.";
  } else {
    reply.text = std::to_string(expected_score(request.pair));
  }
  reply.last_token_top_logprobs = std::move(logprobs);
  return reply;
}

std::unique_ptr<ScoringBackend> mock_backend(std::shared_ptr<const EmbeddingStore> oracle, MockOptions options) {
  return std::make_unique<MockBackend>(std::move(oracle), options);
}

}  // namespace mmir
