#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mmir {

enum class Normalization { kNone, kL2 };

struct EmbeddingManifest {
  std::size_t dim = 0;
  std::size_t count = 0;
  std::string dtype = "f32le";
  Normalization normalization = Normalization::kNone;
  std::string ids_file;
  std::string data_file;
};

// Immutable after construction: readers need no synchronization.
class EmbeddingStore {
 public:
  // Validates ids (unique, non-empty), shape, and rejects zero rows.
  EmbeddingStore(EmbeddingManifest manifest, std::vector<std::string> ids, std::vector<float> matrix);

  const EmbeddingManifest& manifest() const noexcept { return manifest_; }
  std::size_t dim() const noexcept { return manifest_.dim; }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }

  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& id(std::size_t row) const { return ids_.at(row); }
  std::span<const float> row(std::size_t i) const;
  std::optional<std::size_t> find(const std::string& id) const;
  // Throws Error(kUnknownId).
  std::span<const float> vector_for(const std::string& id) const;

 private:
  EmbeddingManifest manifest_;
  std::vector<std::string> ids_;
  std::vector<float> matrix_;  // row-major count x dim
  std::unordered_map<std::string, std::size_t> index_;
};

struct PoolEntry {
  std::string candidate_id;
  double coarse_similarity = 0.0;
  std::size_t ordinal = 0;  // row in the store
  bool operator==(const PoolEntry&) const = default;
};

struct CandidatePool {
  std::vector<PoolEntry> entries;  // similarity desc, then ordinal asc
  std::size_t k_requested = 0;
};

struct StoreSummary {
  std::size_t count = 0;
  std::size_t dim = 0;
  double min_norm = 0.0;
  double max_norm = 0.0;
  double mean_norm = 0.0;
};

EmbeddingManifest read_manifest(const std::filesystem::path& manifest_path);

// Loads the manifest and its ids/data files (paths relative to the manifest).
EmbeddingStore ingest_embeddings(const std::filesystem::path& manifest_path);

// Writes <stem>.manifest.json, <stem>.ids, <stem>.f32 under dir; returns the manifest path.
std::filesystem::path write_embeddings(const std::filesystem::path& dir, const std::string& stem,
                                       const std::vector<std::string>& ids,
                                       std::span<const float> matrix, std::size_t dim,
                                       Normalization normalization);

StoreSummary summarize(const EmbeddingStore& store);

// a^T b / (|a| |b|), accumulated in double and clamped to [-1, 1].
double cosine_similarity(std::span<const float> a, std::span<const float> b);
double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Exact top-k by cosine similarity using a bounded min-heap.
CandidatePool coarse_topk(const EmbeddingStore& store, std::span<const float> query, std::size_t k);

std::string normalization_name(Normalization n);

}  // namespace mmir
