#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mmir/reinjection.h"

namespace mmir::reinjection {

// One kernel test vector: {d, D, activation, w1, w2, x, zv, alpha, expected}.
struct KernelFixture {
  std::string name;
  FfnParams params;
  std::vector<double> x;
  VisualTokenSet zv;
  double alpha = 0.0;
  std::vector<double> expected;  // fused output
};

KernelFixture load_fixture(const std::filesystem::path& path);

struct FixtureOutcome {
  std::string name;
  double fused_deviation = 0.0;       // ffn_fused vs expected
  double equivalence_deviation = 0.0;  // ffn_matrix vs ffn_keyvalue
  bool boundaries_exact = false;      // alpha = 0 / 1 and empty token set identities
  bool passed = false;
};

struct VerifyReport {
  std::vector<FixtureOutcome> outcomes;
  double max_deviation = 0.0;
  bool all_passed = true;
};

inline constexpr double kKernelTolerance = 1e-5;

FixtureOutcome verify_fixture(const KernelFixture& fixture, double tolerance = kKernelTolerance);

// Loads every *.json in dir (sorted by name). Throws Error(kMissingFile) if the directory
// is missing or holds no fixtures.
VerifyReport verify_fixture_dir(const std::filesystem::path& dir, double tolerance = kKernelTolerance);

}  // namespace mmir::reinjection
