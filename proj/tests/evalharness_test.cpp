#include "mmir/evalharness.h"

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"

#include "mmir/errors.h"
#include "mmir/mock_backend.h"
#include "mmir/synthetic.h"
#include "test_util.h"

namespace mmir {
namespace {

RankedResult result_with_top(const std::string& query, const std::string& top) {
  RankedResult r;
  r.query_id = query;
  r.ranking.push_back({top, 0.5});
  r.ranking.push_back({"other", 0.4});
  return r;
}

GoldMap gold_for(std::size_t n) {
  GoldMap g;
  for (std::size_t i = 0; i < n; ++i) g["q" + std::to_string(i)] = "g" + std::to_string(i);
  return g;
}

std::vector<RankedResult> results_with_hits(std::size_t n, std::size_t hits) {
  std::vector<RankedResult> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(result_with_top("q" + std::to_string(i), i < hits ? "g" + std::to_string(i) : "miss"));
  }
  return out;
}

TEST(RecallAt1, Counting) {
  const auto gold = gold_for(10);
  EXPECT_DOUBLE_EQ(recall_at_1(results_with_hits(5, 5), gold), 1.0);
  EXPECT_DOUBLE_EQ(recall_at_1(results_with_hits(5, 0), gold), 0.0);
  EXPECT_DOUBLE_EQ(recall_at_1(results_with_hits(5, 3), gold), 0.6);
}

TEST(RecallAt1, Errors) {
  try {
    recall_at_1({}, gold_for(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyResults);
  }
  const std::vector<RankedResult> stray{result_with_top("unknown", "x")};
  try {
    recall_at_1(stray, gold_for(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kMissingGold);
  }
}

TEST(PrecisionAt1, SingleGoldIdentity) {
  const auto gold = gold_for(10);
  for (std::size_t hits = 0; hits <= 10; ++hits) {
    const auto r = results_with_hits(10, hits);
    EXPECT_EQ(precision_at_1(r, gold), recall_at_1(r, gold));
  }
  EXPECT_DOUBLE_EQ(precision_at_1(results_with_hits(10, 10), gold), 1.0);
  EXPECT_DOUBLE_EQ(precision_at_1(results_with_hits(10, 7), gold), 0.7);
}

TEST(PoolHitRate, FullPoolAndSelfMatch) {
  SyntheticOptions o;
  o.candidates = 60;
  o.queries = 20;
  auto ds = make_synthetic(o);
  EXPECT_DOUBLE_EQ(pool_hit_rate(*ds.store, ds, ds.store->size()), 1.0);
  for (auto& q : ds.queries) {
    const auto v = ds.store->vector_for(q.gold_candidate_id);
    q.query.embedding.assign(v.begin(), v.end());
  }
  EXPECT_DOUBLE_EQ(pool_hit_rate(*ds.store, ds, 1), 1.0);
}

TEST(PoolHitRate, MatchesExhaustiveMembershipCheck) {
  SyntheticOptions o;
  o.candidates = 500;
  o.queries = 100;
  o.dim = 16;
  o.seed = 99;
  const auto ds = make_synthetic(o);
  double previous = 0.0;
  for (std::size_t k : {1u, 3u, 5u, 9u}) {
    std::size_t hits = 0;
    for (const auto& q : ds.queries) {
      // Rank of the gold = number of candidates strictly ahead of it.
      const double gold_sim = cosine_similarity(q.query.embedding, ds.store->vector_for(q.gold_candidate_id));
      const std::size_t gold_row = *ds.store->find(q.gold_candidate_id);
      std::size_t ahead = 0;
      for (std::size_t i = 0; i < ds.store->size(); ++i) {
        const double s = cosine_similarity(q.query.embedding, ds.store->row(i));
        ahead += s > gold_sim || (s == gold_sim && i < gold_row);
      }
      hits += ahead < k;
    }
    const double rate = pool_hit_rate(*ds.store, ds, k);
    EXPECT_DOUBLE_EQ(rate, static_cast<double>(hits) / 100.0);
    EXPECT_GE(rate, previous);
    previous = rate;
  }
}

TEST(Evaluate, PerfectOracleSaturatesPoolBound) {
  const auto ds = make_synthetic({});
  MockBackend mock(ds.oracle, {});
  for (std::size_t k : {3u, 5u, 7u, 9u}) {
    PipelineConfig c;
    c.k = k;
    const auto run = evaluate(ds, c, mock);
    EXPECT_DOUBLE_EQ(run.report.recall_at_1, run.report.pool_hit_rate);
    EXPECT_LE(run.report.max_budget_excess, 0);
  }
}

TEST(Evaluate, RecallNeverExceedsPoolBound) {
  const auto ds = make_synthetic({});
  MockBackend mock(ds.oracle, {.seed = 4, .noise = 15, .quantization_levels = 10, .error_rate = 0.1});
  for (std::size_t k : {1u, 3u, 5u, 9u}) {
    PipelineConfig c;
    c.k = k;
    const auto r = evaluate(ds, c, mock).report;
    EXPECT_LE(r.recall_at_1, r.pool_hit_rate);
  }
}

TEST(SweepK, DefaultGridMatchesDirectRuns) {
  const auto ds = make_synthetic({});
  MockBackend mock(ds.oracle, {.seed = 9, .error_rate = 0.2});
  PipelineConfig config;
  const std::vector<std::size_t> ks{3, 5, 7, 9};
  const auto reports = sweep_k(ks, ds, config, mock);
  ASSERT_EQ(reports.size(), 4u);
  double previous = 0.0;
  for (std::size_t i = 0; i < ks.size(); ++i) {
    PipelineConfig c = config;
    c.k = ks[i];
    const auto direct = evaluate(ds, c, mock).report;
    EXPECT_EQ(reports[i].k, ks[i]);
    EXPECT_EQ(reports[i].recall_at_1, direct.recall_at_1);
    EXPECT_EQ(reports[i].mean_backend_calls, direct.mean_backend_calls);
    // Recall may dip as distractors join the pool; the pool bound may not.
    EXPECT_GE(reports[i].pool_hit_rate, previous);
    EXPECT_LE(reports[i].recall_at_1, reports[i].pool_hit_rate);
    previous = reports[i].pool_hit_rate;
  }
}

TEST(SweepK, RejectsBadGrids) {
  const auto ds = make_synthetic({});
  MockBackend mock(ds.oracle, {});
  const std::vector<std::size_t> empty, unordered{5, 3}, zero{0, 1};
  EXPECT_THROW(sweep_k(empty, ds, {}, mock), Error);
  EXPECT_THROW(sweep_k(unordered, ds, {}, mock), Error);
  EXPECT_THROW(sweep_k(zero, ds, {}, mock), Error);
}

TEST(Csv, HeaderAndRow) {
  std::ostringstream out;
  write_csv_header(out);
  EvalReport r;
  r.dataset = "syn";
  r.k = 5;
  r.recall_at_1 = 0.5;
  r.precision_at_1 = 0.5;
  r.pool_hit_rate = 0.75;
  r.tiebreak_enabled = false;
  write_csv_row(out, r);
  EXPECT_EQ(out.str(),
            "dataset,k,recall_at_1,precision_at_1,pool_hit_rate,mean_backend_calls,mean_ms_per_query,fine_enabled,"
            "tiebreak_enabled\n"
            "syn,5,0.500000,0.500000,0.750000,0.0000,0.0000,1,0\n");
}

TEST(LoadDataset, SyntheticFilesMatchInMemory) {
  test::TempDir dir("ds");
  SyntheticOptions o;
  o.candidates = 80;
  o.queries = 10;
  const auto path = write_synthetic(o, dir.path());
  const auto loaded = load_dataset(path);
  const auto mem = make_synthetic(o);
  ASSERT_EQ(loaded.queries.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(loaded.queries[i].query.query_id, mem.queries[i].query.query_id);
    EXPECT_EQ(loaded.queries[i].query.embedding, mem.queries[i].query.embedding);
    EXPECT_EQ(loaded.queries[i].gold_candidate_id, mem.queries[i].gold_candidate_id);
    EXPECT_EQ(loaded.queries[i].query.content, mem.queries[i].query.content);
  }
  EXPECT_EQ(loaded.store->ids(), mem.store->ids());
  EXPECT_EQ(loaded.oracle->size(), 90u);
  EXPECT_EQ(loaded.catalog.size(), 80u);
}

void write(const std::filesystem::path& p, const std::string& s) { std::ofstream(p) << s; }

std::filesystem::path tiny_store(const std::filesystem::path& dir) {
  return write_embeddings(dir, "cands", {"c1", "c2"}, std::vector<float>{1, 0, 0, 1}, 2, Normalization::kNone);
}

TEST(LoadDataset, MinimalInlineQuery) {
  test::TempDir dir("ds");
  tiny_store(dir.path());
  write(dir.path() / "d.json",
        R"({"name":"tiny","store":"cands.manifest.json","queries":[)"
        R"({"query_id":"q1","text":"hello","embedding":[1,0.5],"gold_candidate_id":"c2"}]})");
  const auto ds = load_dataset(dir.path() / "d.json");
  EXPECT_EQ(ds.name, "tiny");
  ASSERT_EQ(ds.queries.size(), 1u);
  EXPECT_EQ(ds.queries[0].query.embedding, (std::vector<float>{1.0f, 0.5f}));
  EXPECT_EQ(ds.direction, Direction::kGeneric);
}

ErrorCode load_error(const std::filesystem::path& p) {
  try {
    load_dataset(p);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "loaded";
  return ErrorCode::kInvalidArgument;
}

TEST(LoadDataset, Errors) {
  test::TempDir dir("ds");
  tiny_store(dir.path());
  write(dir.path() / "gold.json",
        R"({"store":"cands.manifest.json","queries":[{"query_id":"q1","text":"x","embedding":[1,0],"gold_candidate_id":"c9"}]})");
  EXPECT_EQ(load_error(dir.path() / "gold.json"), ErrorCode::kMissingGoldCandidate);
  write(dir.path() / "dup.json",
        R"({"store":"cands.manifest.json","queries":[{"query_id":"q1","text":"x","embedding":[1,0],"gold_candidate_id":"c1"},)"
        R"({"query_id":"q1","text":"y","embedding":[0,1],"gold_candidate_id":"c2"}]})");
  EXPECT_EQ(load_error(dir.path() / "dup.json"), ErrorCode::kDuplicateQueryId);
  write(dir.path() / "missing.json", R"({"store":"nope.manifest.json","queries":[]})");
  EXPECT_EQ(load_error(dir.path() / "missing.json"), ErrorCode::kMissingFile);
  EXPECT_EQ(load_error(dir.path() / "absent.json"), ErrorCode::kMissingFile);
  write(dir.path() / "dim.json",
        R"({"store":"cands.manifest.json","queries":[{"query_id":"q1","text":"x","embedding":[1,0,0],"gold_candidate_id":"c1"}]})");
  EXPECT_EQ(load_error(dir.path() / "dim.json"), ErrorCode::kDimensionMismatch);
}

TEST(ConvertCaptions, QueryCountEqualsLineCount) {
  test::TempDir dir("conv");
  const std::size_t lines = 23;
  {
    std::ofstream in(dir.path() / "flickr.jsonl");
    for (std::size_t i = 0; i < lines; ++i) {
      in << nlohmann::json{{"image", "images/" + std::to_string(1000 + i) + ".jpg"},
                           {"caption", "a photo number " + std::to_string(i)}}
                .dump()
         << '\n';
    }
  }
  // Line-count oracle, independent of the converter.
  std::size_t counted = 0;
  {
    std::ifstream in(dir.path() / "flickr.jsonl");
    for (std::string l; std::getline(in, l);) counted += !l.empty();
  }
  for (auto direction : {Direction::kTextToImage, Direction::kImageToText}) {
    const auto out = dir.path() / direction_name(direction);
    ConvertOptions opts;
    opts.direction = direction;
    const auto manifest = convert_caption_jsonl(dir.path() / "flickr.jsonl", out, opts);

    // Stand-in embeddings for the converter's ids (what the export tool would produce).
    const auto catalog = load_catalog(out / "candidates.jsonl");
    std::vector<std::string> cand_ids;
    {
      std::ifstream in(out / "candidates.jsonl");
      for (std::string l; std::getline(in, l);) cand_ids.push_back(nlohmann::json::parse(l)["id"]);
    }
    std::vector<std::string> query_ids;
    {
      std::ifstream in(out / "queries.jsonl");
      for (std::string l; std::getline(in, l);) query_ids.push_back(nlohmann::json::parse(l)["query_id"]);
    }
    write_embeddings(out, "candidates", cand_ids, test::random_matrix(cand_ids.size(), 4, 1), 4, Normalization::kNone);
    write_embeddings(out, "queries", query_ids, test::random_matrix(query_ids.size(), 4, 2), 4, Normalization::kNone);

    const auto ds = load_dataset(manifest);
    EXPECT_EQ(ds.queries.size(), counted);
    EXPECT_EQ(ds.direction, direction);
    EXPECT_EQ(catalog.size(), lines);
    if (direction == Direction::kTextToImage) {
      EXPECT_EQ(ds.queries[0].query.content, MultimodalContent::text("a photo number 0"));
      EXPECT_EQ(ds.queries[0].gold_candidate_id, "1000");
    } else {
      EXPECT_EQ(ds.queries[0].query.content, MultimodalContent::image("images/1000.jpg"));
      EXPECT_EQ(ds.queries[0].gold_candidate_id, "1000#0");
    }
  }
}

}  // namespace
}  // namespace mmir
