// Writes a seeded synthetic retrieval dataset (stores, oracle, catalog, manifest).
#include <iostream>

#include "CLI11.hpp"
#include "mmir/errors.h"
#include "mmir/synthetic.h"

int main(int argc, char** argv) {
  CLI::App app{"Generate a synthetic clustered retrieval dataset"};
  mmir::SyntheticOptions o;
  std::string out;
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--candidates", o.candidates)->check(CLI::PositiveNumber);
  app.add_option("--queries", o.queries);
  app.add_option("--dim", o.dim)->check(CLI::PositiveNumber);
  app.add_option("--clusters", o.clusters)->check(CLI::PositiveNumber);
  app.add_option("--spread", o.cluster_spread);
  app.add_option("--coarse-noise", o.coarse_noise, "noise on coarse query embeddings");
  app.add_option("--fine-noise", o.fine_noise, "noise on oracle query vectors");
  app.add_option("--seed", o.seed);
  app.add_option("--name", o.name);
  CLI11_PARSE(app, argc, argv);
  try {
    std::cout << mmir::write_synthetic(o, out).string() << '\n';
  } catch (const mmir::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
