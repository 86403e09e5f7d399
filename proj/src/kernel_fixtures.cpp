#include "mmir/kernel_fixtures.h"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "mmir/errors.h"

namespace mmir::reinjection {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> flatten(const json& rows, std::size_t d, std::size_t hidden, const char* what) {
  std::vector<double> flat;
  flat.reserve(d * hidden);
  if (rows.size() != d) throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " must have d rows");
  for (const auto& row : rows) {
    if (row.size() != hidden) throw Error(ErrorCode::kDimensionMismatch, std::string(what) + " rows must have D entries");
    for (const auto& v : row) flat.push_back(v.get<double>());
  }
  return flat;
}

}  // namespace

KernelFixture load_fixture(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open fixture " + path.string());
  try {
    const json j = json::parse(in);
    const auto d = j.at("d").get<std::size_t>();
    const auto hidden = j.at("D").get<std::size_t>();
    const auto activation = activation_from_name(j.at("activation").get<std::string>());
    FfnParams params(d, hidden, flatten(j.at("w1"), d, hidden, "w1"), flatten(j.at("w2"), d, hidden, "w2"),
                     activation);
    return KernelFixture{path.stem().string(),
                         std::move(params),
                         j.at("x").get<std::vector<double>>(),
                         VisualTokenSet(j.at("zv").get<std::vector<std::vector<double>>>()),
                         j.at("alpha").get<double>(),
                         j.at("expected").get<std::vector<double>>()};
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
}

FixtureOutcome verify_fixture(const KernelFixture& f, double tolerance) {
  FixtureOutcome out;
  out.name = f.name;
  const auto fused = ffn_fused(f.x, f.params, f.zv, f.alpha);
  const auto dense = ffn_matrix(f.x, f.params);
  const auto memory = ffn_keyvalue(f.x, f.params);
  const auto correction = visual_correction(f.x, f.zv, f.params.activation());
  out.fused_deviation = relative_deviation(fused, f.expected);
  out.equivalence_deviation = relative_deviation(memory, dense);

  auto scaled = dense;
  for (double& v : scaled) v *= (1.0 - f.alpha);
  out.boundaries_exact = ffn_fused(f.x, f.params, f.zv, 0.0) == dense &&
                         ffn_fused(f.x, f.params, f.zv, 1.0) == correction &&
                         ffn_fused(f.x, f.params, VisualTokenSet{}, f.alpha) == scaled;

  out.passed = out.fused_deviation <= tolerance && out.equivalence_deviation <= tolerance && out.boundaries_exact;
  return out;
}

VerifyReport verify_fixture_dir(const fs::path& dir, double tolerance) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kMissingFile, "fixture directory " + dir.string() + " not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (files.empty()) throw Error(ErrorCode::kMissingFile, "no fixtures in " + dir.string());
  std::sort(files.begin(), files.end());

  VerifyReport report;
  for (const auto& file : files) {
    auto outcome = verify_fixture(load_fixture(file), tolerance);
    report.max_deviation = std::max({report.max_deviation, outcome.fused_deviation, outcome.equivalence_deviation});
    report.all_passed = report.all_passed && outcome.passed;
    report.outcomes.push_back(std::move(outcome));
  }
  return report;
}

}  // namespace mmir::reinjection
