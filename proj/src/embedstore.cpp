#include "mmir/embedstore.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include "json.hpp"
#include "mmir/errors.h"

namespace mmir {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kL2Tolerance = 1e-4;

template <typename T>
double squared_norm(std::span<const T> v) {
  double acc = 0.0;
  for (T x : v) acc += static_cast<double>(x) * static_cast<double>(x);
  return acc;
}

template <typename A, typename B>
double dot(std::span<const A> a, std::span<const B> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

double clamp_unit(double c) { return std::clamp(c, -1.0, 1.0); }

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cosine of vectors with dims " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  const double na = squared_norm(a);
  const double nb = squared_norm(b);
  if (na == 0.0 || nb == 0.0) throw Error(ErrorCode::kZeroVector, "cosine of a zero vector");
  return clamp_unit(dot(a, b) / (std::sqrt(na) * std::sqrt(nb)));
}

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0xff00u) | ((v << 8) & 0xff0000u) | (v << 24);
}

float from_le(float f) {
  if constexpr (std::endian::native == std::endian::little) {
    return f;
  } else {
    return std::bit_cast<float>(byteswap32(std::bit_cast<std::uint32_t>(f)));
  }
}

std::vector<std::string> read_ids(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open ids file " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ids.push_back(line);
  }
  return ids;
}

}  // namespace

std::string normalization_name(Normalization n) { return n == Normalization::kL2 ? "l2" : "none"; }

EmbeddingStore::EmbeddingStore(EmbeddingManifest manifest, std::vector<std::string> ids,
                               std::vector<float> matrix)
    : manifest_(std::move(manifest)), ids_(std::move(ids)), matrix_(std::move(matrix)) {
  if (manifest_.dim == 0) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 1");
  if (ids_.size() != manifest_.count) {
    throw Error(ErrorCode::kSizeMismatch, "manifest count " + std::to_string(manifest_.count) + " but " +
                                              std::to_string(ids_.size()) + " ids");
  }
  if (matrix_.size() != manifest_.count * manifest_.dim) {
    throw Error(ErrorCode::kSizeMismatch, "matrix holds " + std::to_string(matrix_.size()) + " values, expected " +
                                              std::to_string(manifest_.count * manifest_.dim));
  }
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (ids_[i].empty()) throw Error(ErrorCode::kInvalidArgument, "empty id at row " + std::to_string(i));
    if (!index_.emplace(ids_[i], i).second) throw Error(ErrorCode::kDuplicateId, "duplicate id '" + ids_[i] + "'");
    const double n2 = squared_norm(row(i));
    if (n2 == 0.0) throw Error(ErrorCode::kZeroVector, "zero vector for id '" + ids_[i] + "'");
    if (manifest_.normalization == Normalization::kL2 && std::abs(std::sqrt(n2) - 1.0) > kL2Tolerance) {
      throw Error(ErrorCode::kInvalidArgument,
                  "id '" + ids_[i] + "' has norm " + std::to_string(std::sqrt(n2)) + " in an l2-normalized store");
    }
  }
}

std::span<const float> EmbeddingStore::row(std::size_t i) const {
  return std::span<const float>(matrix_).subspan(i * manifest_.dim, manifest_.dim);
}

std::optional<std::size_t> EmbeddingStore::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::span<const float> EmbeddingStore::vector_for(const std::string& id) const {
  auto row_index = find(id);
  if (!row_index) throw Error(ErrorCode::kUnknownId, "id '" + id + "' not in store");
  return row(*row_index);
}

EmbeddingManifest read_manifest(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open manifest " + manifest_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, manifest_path.string() + ": " + e.what());
  }
  EmbeddingManifest m;
  try {
    const auto dim = j.at("dim").get<long long>();
    const auto count = j.at("count").get<long long>();
    if (dim < 1) throw Error(ErrorCode::kInvalidArgument, "dim must be >= 1");
    if (count < 0) throw Error(ErrorCode::kInvalidArgument, "count must be >= 0");
    m.dim = static_cast<std::size_t>(dim);
    m.count = static_cast<std::size_t>(count);
    m.dtype = j.value("dtype", std::string("f32le"));
    const auto norm = j.value("normalization", std::string("none"));
    if (norm == "l2") {
      m.normalization = Normalization::kL2;
    } else if (norm == "none") {
      m.normalization = Normalization::kNone;
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown normalization '" + norm + "'");
    }
    m.ids_file = j.at("ids_file").get<std::string>();
    m.data_file = j.at("data_file").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, manifest_path.string() + ": " + e.what());
  }
  if (m.dtype != "f32le") throw Error(ErrorCode::kInvalidArgument, "unsupported dtype '" + m.dtype + "'");
  return m;
}

EmbeddingStore ingest_embeddings(const fs::path& manifest_path) {
  EmbeddingManifest m = read_manifest(manifest_path);
  const fs::path base = manifest_path.parent_path();
  const fs::path ids_path = base / m.ids_file;
  const fs::path data_path = base / m.data_file;
  if (!fs::exists(ids_path)) throw Error(ErrorCode::kMissingFile, "missing ids file " + ids_path.string());
  if (!fs::exists(data_path)) throw Error(ErrorCode::kMissingFile, "missing data file " + data_path.string());

  auto ids = read_ids(ids_path);
  if (ids.size() != m.count) {
    throw Error(ErrorCode::kSizeMismatch, ids_path.string() + " has " + std::to_string(ids.size()) +
                                              " ids, manifest count is " + std::to_string(m.count));
  }
  const auto expected_bytes = static_cast<std::uintmax_t>(m.count) * m.dim * sizeof(float);
  const auto actual_bytes = fs::file_size(data_path);
  if (actual_bytes != expected_bytes) {
    throw Error(ErrorCode::kSizeMismatch, data_path.string() + " is " + std::to_string(actual_bytes) +
                                              " bytes, expected " + std::to_string(expected_bytes));
  }
  std::vector<float> matrix(m.count * m.dim);
  if (!matrix.empty()) {
    std::ifstream in(data_path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kMissingFile, "cannot open data file " + data_path.string());
    in.read(reinterpret_cast<char*>(matrix.data()), static_cast<std::streamsize>(expected_bytes));
    if (!in) throw Error(ErrorCode::kSizeMismatch, "short read from " + data_path.string());
    for (float& f : matrix) f = from_le(f);
  }
  return EmbeddingStore(std::move(m), std::move(ids), std::move(matrix));
}

fs::path write_embeddings(const fs::path& dir, const std::string& stem, const std::vector<std::string>& ids,
                          std::span<const float> matrix, std::size_t dim, Normalization normalization) {
  if (dim == 0 || matrix.size() != ids.size() * dim) {
    throw Error(ErrorCode::kSizeMismatch, "matrix shape does not match ids and dim");
  }
  fs::create_directories(dir);
  const std::string ids_name = stem + ".ids";
  const std::string data_name = stem + ".f32";
  {
    std::ofstream out(dir / ids_name, std::ios::binary);
    for (const auto& id : ids) out << id << '\n';
  }
  {
    std::ofstream out(dir / data_name, std::ios::binary);
    for (float f : matrix) {
      const float le = from_le(f);
      out.write(reinterpret_cast<const char*>(&le), sizeof(le));
    }
  }
  const json j = {{"dim", dim},
                  {"count", ids.size()},
                  {"dtype", "f32le"},
                  {"normalization", normalization_name(normalization)},
                  {"ids_file", ids_name},
                  {"data_file", data_name}};
  const fs::path manifest_path = dir / (stem + ".manifest.json");
  std::ofstream out(manifest_path);
  out << j.dump(2) << '\n';
  return manifest_path;
}

StoreSummary summarize(const EmbeddingStore& store) {
  StoreSummary s;
  s.count = store.size();
  s.dim = store.dim();
  if (store.empty()) return s;
  s.min_norm = std::numeric_limits<double>::infinity();
  double total = 0.0;
  for (std::size_t i = 0; i < store.size(); ++i) {
    const double n = std::sqrt(squared_norm(store.row(i)));
    s.min_norm = std::min(s.min_norm, n);
    s.max_norm = std::max(s.max_norm, n);
    total += n;
  }
  s.mean_norm = total / static_cast<double>(store.size());
  return s;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) { return cosine_impl(a, b); }

double cosine_similarity(std::span<const double> a, std::span<const double> b) { return cosine_impl(a, b); }

CandidatePool coarse_topk(const EmbeddingStore& store, std::span<const float> query, std::size_t k) {
  if (k == 0) throw Error(ErrorCode::kInvalidArgument, "k must be >= 1");
  if (query.size() != store.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "query dim " + std::to_string(query.size()) + " vs store dim " +
                                                   std::to_string(store.dim()));
  }
  if (store.empty()) throw Error(ErrorCode::kEmptyStore, "coarse_topk on an empty store");
  const double qn = squared_norm(query);
  if (qn == 0.0) throw Error(ErrorCode::kZeroVector, "query is the zero vector");
  const double q_norm = std::sqrt(qn);

  struct Scored {
    double sim;
    std::size_t ordinal;
  };
  // True when a ranks ahead of b.
  const auto ahead = [](const Scored& a, const Scored& b) {
    return a.sim > b.sim || (a.sim == b.sim && a.ordinal < b.ordinal);
  };
  // Top of the heap is the weakest survivor.
  std::priority_queue<Scored, std::vector<Scored>, decltype(ahead)> heap(ahead);
  const std::size_t keep = std::min(k, store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto row = store.row(i);
    const double sim = clamp_unit(dot(query, row) / (q_norm * std::sqrt(squared_norm(row))));
    Scored s{sim, i};
    if (heap.size() < keep) {
      heap.push(s);
    } else if (ahead(s, heap.top())) {
      heap.pop();
      heap.push(s);
    }
  }
  std::vector<Scored> best;
  best.reserve(heap.size());
  while (!heap.empty()) {
    best.push_back(heap.top());
    heap.pop();
  }
  std::sort(best.begin(), best.end(), ahead);

  CandidatePool pool;
  pool.k_requested = k;
  pool.entries.reserve(best.size());
  for (const auto& s : best) pool.entries.push_back({store.id(s.ordinal), s.sim, s.ordinal});
  return pool;
}

}  // namespace mmir
