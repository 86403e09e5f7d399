#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "mmir/embedstore.h"

namespace mmir::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("mmir_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

inline std::vector<float> random_matrix(std::size_t rows, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> normal(0.0f, 1.0f);
  std::vector<float> m(rows * dim);
  for (auto& v : m) v = normal(rng);
  return m;
}

inline std::vector<std::string> numbered_ids(std::size_t n, const std::string& prefix = "id") {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(i));
  return ids;
}

inline EmbeddingStore make_store(std::vector<std::string> ids, std::vector<float> matrix, std::size_t dim) {
  EmbeddingManifest m;
  m.dim = dim;
  m.count = ids.size();
  return EmbeddingStore(m, std::move(ids), std::move(matrix));
}

}  // namespace mmir::test
