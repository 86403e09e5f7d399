#pragma once

#include <cstdint>
#include <filesystem>

#include "mmir/dataset.h"

namespace mmir {

// Seeded Gaussian clusters. Each query's ground-truth (oracle) vector sits on its gold
// candidate; its coarse embedding is the gold vector plus isotropic noise, which sets
// how often distractors outrank the gold at the coarse stage.
struct SyntheticOptions {
  std::size_t candidates = 200;
  std::size_t queries = 50;
  std::size_t dim = 16;
  std::size_t clusters = 10;
  double cluster_spread = 0.3;
  double coarse_noise = 0.5;
  double fine_noise = 0.0;
  // Candidate pairs are resampled until their cosine is below this, so a perfect scorer
  // (round(100 * cosine)) gives the gold a unique top score.
  double max_pair_cosine = 0.99;
  std::uint64_t seed = 7;
  std::string name = "synthetic";
};

RetrievalDataset make_synthetic(const SyntheticOptions& options);

// Writes candidates/queries/oracle stores, candidates.jsonl, queries.jsonl and dataset.json
// into dir. Returns the dataset manifest path.
std::filesystem::path write_synthetic(const SyntheticOptions& options, const std::filesystem::path& dir);

}  // namespace mmir
