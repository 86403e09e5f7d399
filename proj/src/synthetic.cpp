#include "mmir/synthetic.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "json.hpp"
#include "mmir/errors.h"

namespace mmir {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Generated {
  std::vector<std::string> candidate_ids;
  std::vector<float> candidates;
  std::vector<std::size_t> cluster_of;
  std::vector<std::string> query_ids;
  std::vector<float> coarse_queries;
  std::vector<float> oracle_queries;
  std::vector<std::string> gold;
};

std::string padded(char prefix, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%04zu", prefix, i);
  return buf;
}

double cosine_rows(const float* a, const float* b, std::size_t d) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    ab += double(a[i]) * b[i];
    aa += double(a[i]) * a[i];
    bb += double(b[i]) * b[i];
  }
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

Generated generate(const SyntheticOptions& o) {
  if (o.candidates == 0 || o.dim == 0 || o.clusters == 0) {
    throw Error(ErrorCode::kInvalidArgument, "synthetic dataset needs candidates, dim and clusters > 0");
  }
  if (o.queries > o.candidates) throw Error(ErrorCode::kInvalidArgument, "more queries than candidates");
  std::mt19937_64 rng(o.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t d = o.dim;

  std::vector<double> centers(o.clusters * d);
  for (double& c : centers) c = normal(rng);

  Generated g;
  g.candidates.resize(o.candidates * d);
  for (std::size_t i = 0; i < o.candidates; ++i) {
    const std::size_t cluster = i % o.clusters;
    float* row = &g.candidates[i * d];
    for (int attempt = 0;; ++attempt) {
      double norm2 = 0.0;
      for (std::size_t r = 0; r < d; ++r) {
        row[r] = static_cast<float>(centers[cluster * d + r] + o.cluster_spread * normal(rng));
        norm2 += double(row[r]) * row[r];
      }
      bool ok = norm2 > 0.0;
      for (std::size_t j = 0; ok && j < i; ++j) ok = cosine_rows(row, &g.candidates[j * d], d) < o.max_pair_cosine;
      if (ok) break;
      if (attempt > 10000) throw Error(ErrorCode::kInvalidArgument, "cannot place candidates under max_pair_cosine");
    }
    g.candidate_ids.push_back(padded('c', i));
    g.cluster_of.push_back(cluster);
  }

  std::vector<std::size_t> order(o.candidates);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  g.coarse_queries.resize(o.queries * d);
  g.oracle_queries.resize(o.queries * d);
  for (std::size_t q = 0; q < o.queries; ++q) {
    const std::size_t gold = order[q];
    g.query_ids.push_back(padded('q', q));
    g.gold.push_back(g.candidate_ids[gold]);
    for (std::size_t r = 0; r < d; ++r) {
      const double base = g.candidates[gold * d + r];
      g.coarse_queries[q * d + r] = static_cast<float>(base + o.coarse_noise * normal(rng));
      g.oracle_queries[q * d + r] = static_cast<float>(base + o.fine_noise * normal(rng));
    }
  }
  return g;
}

std::string candidate_text(const Generated& g, std::size_t i) {
  return "synthetic item " + g.candidate_ids[i] + " from cluster " + std::to_string(g.cluster_of[i]);
}

std::string query_text(const Generated& g, std::size_t q) { return "synthetic query " + g.query_ids[q]; }

}  // namespace

RetrievalDataset make_synthetic(const SyntheticOptions& o) {
  Generated g = generate(o);
  RetrievalDataset ds;
  ds.name = o.name;
  ds.direction = Direction::kGeneric;

  EmbeddingManifest m;
  m.dim = o.dim;
  m.count = o.candidates;
  ds.store = std::make_shared<const EmbeddingStore>(m, g.candidate_ids, g.candidates);

  std::vector<std::string> oracle_ids = g.candidate_ids;
  oracle_ids.insert(oracle_ids.end(), g.query_ids.begin(), g.query_ids.end());
  std::vector<float> oracle = g.candidates;
  oracle.insert(oracle.end(), g.oracle_queries.begin(), g.oracle_queries.end());
  m.count = oracle_ids.size();
  ds.oracle = std::make_shared<const EmbeddingStore>(m, std::move(oracle_ids), std::move(oracle));

  for (std::size_t i = 0; i < o.candidates; ++i) {
    ds.catalog.emplace(g.candidate_ids[i], MultimodalContent::text(candidate_text(g, i)));
  }
  for (std::size_t q = 0; q < o.queries; ++q) {
    DatasetQuery dq;
    dq.query.query_id = g.query_ids[q];
    dq.query.content = MultimodalContent::text(query_text(g, q));
    dq.query.embedding.assign(g.coarse_queries.begin() + q * o.dim, g.coarse_queries.begin() + (q + 1) * o.dim);
    dq.gold_candidate_id = g.gold[q];
    ds.queries.push_back(std::move(dq));
  }
  return ds;
}

fs::path write_synthetic(const SyntheticOptions& o, const fs::path& dir) {
  Generated g = generate(o);
  fs::create_directories(dir);
  write_embeddings(dir, "candidates", g.candidate_ids, g.candidates, o.dim, Normalization::kNone);
  write_embeddings(dir, "queries", g.query_ids, g.coarse_queries, o.dim, Normalization::kNone);

  std::vector<std::string> oracle_ids = g.candidate_ids;
  oracle_ids.insert(oracle_ids.end(), g.query_ids.begin(), g.query_ids.end());
  std::vector<float> oracle = g.candidates;
  oracle.insert(oracle.end(), g.oracle_queries.begin(), g.oracle_queries.end());
  write_embeddings(dir, "oracle", oracle_ids, oracle, o.dim, Normalization::kNone);

  {
    std::ofstream out(dir / "candidates.jsonl");
    for (std::size_t i = 0; i < o.candidates; ++i) {
      out << json{{"id", g.candidate_ids[i]}, {"text", candidate_text(g, i)}}.dump() << '\n';
    }
  }
  {
    std::ofstream out(dir / "queries.jsonl");
    for (std::size_t q = 0; q < o.queries; ++q) {
      out << json{{"query_id", g.query_ids[q]}, {"text", query_text(g, q)}, {"gold_candidate_id", g.gold[q]}}.dump()
          << '\n';
    }
  }
  const json manifest = {{"name", o.name},
                         {"direction", "generic"},
                         {"store", "candidates.manifest.json"},
                         {"query_store", "queries.manifest.json"},
                         {"oracle_store", "oracle.manifest.json"},
                         {"candidates", "candidates.jsonl"},
                         {"queries_file", "queries.jsonl"}};
  const fs::path path = dir / "dataset.json";
  std::ofstream out(path);
  out << manifest.dump(2) << '\n';
  return path;
}

}  // namespace mmir
