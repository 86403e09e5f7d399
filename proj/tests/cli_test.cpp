#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "mmir/dataset.h"
#include "mmir/embedstore.h"
#include "run_util.h"
#include "test_util.h"

namespace mmir {
namespace {

using test::quote;

class CliTest : public ::testing::Test {
 protected:
  test::TempDir dir_{"cli"};

  test::RunResult cli(const std::string& args) {
    return test::run(quote(MMIR_CLI_PATH) + " " + args, dir_.path() / "stderr.txt");
  }

  // Synthetic dataset with the given number of queries; returns the manifest path.
  std::string synth(std::size_t queries, const std::string& extra = "") {
    const auto out = dir_.path() / ("syn" + std::to_string(queries));
    const auto r = test::run(quote(MMIR_SYNTH_PATH) + " --out " + quote(out.string()) + " --queries " +
                                 std::to_string(queries) + " " + extra,
                             dir_.path() / "synth_err.txt");
    EXPECT_EQ(r.exit_code, 0) << r.err;
    return (out / "dataset.json").string();
  }

  std::filesystem::path small_store(const std::string& stem = "s") {
    return write_embeddings(dir_.path(), stem, {"a", "b", "c"}, std::vector<float>{1, 0, 0, 1, 1, 1}, 2,
                            Normalization::kNone);
  }
};

TEST_F(CliTest, EmbedIngestSummary) {
  const auto r = cli("embed-ingest --store " + quote(small_store().string()));
  EXPECT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("count=3 dim=2"), std::string::npos) << r.out;
}

TEST_F(CliTest, EmbedIngestSizeMismatchNamesFile) {
  const auto manifest = small_store();
  const auto data = dir_.path() / "s.f32";
  std::filesystem::resize_file(data, std::filesystem::file_size(data) - 4);
  const auto r = cli("embed-ingest --store " + quote(manifest.string()));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("s.f32"), std::string::npos) << r.err;
}

TEST_F(CliTest, EmbedIngestDuplicateIdNamesId) {
  const auto manifest = write_embeddings(dir_.path(), "dup", {"a", "zebra", "zebra"},
                                         std::vector<float>{1, 0, 0, 1, 1, 1}, 2, Normalization::kNone);
  const auto r = cli("embed-ingest --store " + quote(manifest.string()));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("zebra"), std::string::npos) << r.err;
}

TEST_F(CliTest, RetrieveSingleQuery) {
  const auto ds = synth(5);
  const auto r = cli("retrieve --dataset " + quote(ds) + " --k 7 --query q0002");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  ASSERT_EQ(test::count_lines(r.out), 1u);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["query_id"], "q0002");
  EXPECT_EQ(j["ranking"].size(), 7u);
  EXPECT_NE(r.err.find("resolved config"), std::string::npos);
}

TEST_F(CliTest, UnknownQueryIsInputError) {
  const auto ds = synth(3);
  EXPECT_EQ(cli("retrieve --dataset " + quote(ds) + " --query nope").exit_code, 2);
}

TEST_F(CliTest, NoFineReturnsCoarseOrder) {
  const auto ds_path = synth(10);
  const auto r = cli("retrieve --dataset " + quote(ds_path) + " --k 5 --no-fine");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto ds = load_dataset(ds_path);
  std::istringstream lines(r.out);
  std::size_t i = 0;
  for (std::string line; std::getline(lines, line); ++i) {
    const auto j = nlohmann::json::parse(line);
    const auto pool = coarse_topk(*ds.store, ds.queries[i].query.embedding, 5);
    ASSERT_EQ(j["ranking"].size(), pool.entries.size());
    for (std::size_t r2 = 0; r2 < pool.entries.size(); ++r2) {
      EXPECT_EQ(j["ranking"][r2]["candidate_id"], pool.entries[r2].candidate_id);
      EXPECT_TRUE(j["ranking"][r2]["fine_score"].is_null());
    }
    EXPECT_EQ(j["provenance"]["fine_calls"], 0);
  }
  EXPECT_EQ(i, 10u);
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  const auto ds = synth(50);
  const std::string args = "retrieve --dataset " + quote(ds) + " --quantize 10 --noise 5 --error-rate 0.1";
  const auto a = cli(args + " --jobs 1");
  const auto b = cli(args + " --jobs 8");
  const auto c = cli(args + " --jobs 8");
  ASSERT_EQ(a.exit_code, 0) << a.err;
  EXPECT_EQ(test::count_lines(a.out), 50u);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(b.out, c.out);
}

TEST_F(CliTest, OutFlagWritesFile) {
  const auto ds = synth(4);
  const auto out = dir_.path() / "r.jsonl";
  const auto r = cli("retrieve --dataset " + quote(ds) + " --out " + quote(out.string()));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(out);
  std::ostringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(test::count_lines(ss.str()), 4u);
}

TEST_F(CliTest, StrictUnreachableBackendExits3) {
  const auto ds = synth(2);
  const auto r = cli("retrieve --dataset " + quote(ds) +
                     " --backend http --endpoint http://127.0.0.1:1/v1/chat/completions --model m --strict");
  EXPECT_EQ(r.exit_code, 3) << r.err;
}

TEST_F(CliTest, LenientUnreachableBackendDegrades) {
  const auto ds = synth(2);
  const auto r = cli("retrieve --dataset " + quote(ds) +
                     " --backend http --endpoint http://127.0.0.1:1/v1/chat/completions --model m");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream lines(r.out);
  for (std::string line; std::getline(lines, line);) EXPECT_TRUE(nlohmann::json::parse(line)["degraded"].get<bool>());
  EXPECT_NE(r.err.find("degraded"), std::string::npos);
}

TEST_F(CliTest, EvalWithAndWithoutTiebreak) {
  const auto ds = synth(20);
  const auto on = cli("eval --dataset " + quote(ds) + " --quantize 10");
  const auto off = cli("eval --dataset " + quote(ds) + " --quantize 10 --no-tiebreak");
  ASSERT_EQ(on.exit_code, 0) << on.err;
  ASSERT_EQ(off.exit_code, 0) << off.err;
  EXPECT_EQ(test::count_lines(on.out), 2u);
  EXPECT_NE(on.out.find(",1,1\n"), std::string::npos) << on.out;
  EXPECT_NE(off.out.find(",1,0\n"), std::string::npos) << off.out;
}

TEST_F(CliTest, SweepKDefaultGrid) {
  const auto ds = synth(20);
  const auto r = cli("sweep-k --dataset " + quote(ds));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  ASSERT_EQ(test::count_lines(r.out), 5u);
  std::istringstream lines(r.out);
  std::string line;
  std::getline(lines, line);
  for (const char* k : {"3", "5", "7", "9"}) {
    std::getline(lines, line);
    EXPECT_EQ(line.substr(0, line.find(',', line.find(',') + 1)), std::string("synthetic,") + k);
  }
  EXPECT_EQ(cli("sweep-k --dataset " + quote(ds) + " --ks 5,3").exit_code, 2);
}

TEST_F(CliTest, MissingDatasetIsInputError) {
  EXPECT_EQ(cli("eval --dataset " + quote((dir_.path() / "none.json").string())).exit_code, 2);
  EXPECT_EQ(cli("eval").exit_code, 2);
}

TEST_F(CliTest, KernelVerifyShippedFixtures) {
  const auto r = cli("kernel-verify --fixtures " + quote(std::string(MMIR_FIXTURE_DIR) + "/kernel"));
  EXPECT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, KernelVerifyCorruptedFixtureFails) {
  const auto dir = dir_.path() / "kernel";
  std::filesystem::copy(std::string(MMIR_FIXTURE_DIR) + "/kernel", dir);
  const auto target = dir / "hand_default_alpha.json";
  nlohmann::json j;
  std::ifstream(target) >> j;
  j["expected"][0] = j["expected"][0].get<double>() + 1e-2;
  std::ofstream(target) << j.dump();
  const auto r = cli("kernel-verify --fixtures " + quote(dir.string()));
  EXPECT_EQ(r.exit_code, 4);
  EXPECT_NE(r.out.find("FAIL hand_default_alpha"), std::string::npos) << r.out;
}

TEST_F(CliTest, KernelVerifyEmptyDirIsInputError) {
  std::filesystem::create_directories(dir_.path() / "empty");
  EXPECT_EQ(cli("kernel-verify --fixtures " + quote((dir_.path() / "empty").string())).exit_code, 2);
}

}  // namespace
}  // namespace mmir
