#pragma once

#include <cstdint>
#include <memory>

#include "mmir/embedstore.h"
#include "mmir/finescorer.h"

namespace mmir {

struct MockOptions {
  std::uint64_t seed = 0;
  // Uniform score noise in [-noise, +noise] points, fixed per (pair, seed).
  double noise = 0.0;
  // When > 0, scores snap to multiples of 100 / levels (forces exact ties).
  int quantization_levels = 0;
  // Fraction of pairs whose replies never contain a score.
  double error_rate = 0.0;
  // Spread of the synthetic confidence around the oracle cosine.
  double confidence_jitter = 0.2;
};

// Deterministic stand-in for a generative scorer. The oracle store holds one vector per
// query id and per candidate id; replies derive from their cosine.
class MockBackend final : public ScoringBackend {
 public:
  MockBackend(std::shared_ptr<const EmbeddingStore> oracle, MockOptions options);

  BackendReply complete(const BackendRequest& request) override;
  std::string name() const override { return "mock"; }

  // Score the mock emits for a pair before any formatting (the reference for tests).
  int expected_score(const PairKey& pair) const;
  bool fails(const PairKey& pair) const;
  std::vector<TokenLogprob> confidence_logprobs(const PairKey& pair) const;

  const MockOptions& options() const noexcept { return options_; }

 private:
  double oracle_cosine(const PairKey& pair) const;
  double unit_hash(const PairKey& pair, std::uint64_t salt) const;

  std::shared_ptr<const EmbeddingStore> oracle_;
  MockOptions options_;
};

std::unique_ptr<ScoringBackend> mock_backend(std::shared_ptr<const EmbeddingStore> oracle, MockOptions options);

}  // namespace mmir
