// Converts caption-retrieval JSONL into the engine's dataset layout.
#include <iostream>

#include "CLI11.hpp"
#include "mmir/dataset.h"
#include "mmir/errors.h"

int main(int argc, char** argv) {
  CLI::App app{"Convert caption JSONL into a dataset manifest"};
  std::string input, out, direction = "query_text_to_image";
  mmir::ConvertOptions o;
  app.add_option("--input", input, "JSONL with image/caption(s) per line")->required();
  app.add_option("--out", out, "output directory")->required();
  app.add_option("--direction", direction)->check(CLI::IsMember({"query_text_to_image", "query_image_to_text"}));
  app.add_option("--name", o.name);
  app.add_option("--store", o.store_manifest, "candidate store manifest, relative to --out");
  app.add_option("--query-store", o.query_store_manifest, "query store manifest, relative to --out");
  CLI11_PARSE(app, argc, argv);
  try {
    o.direction = mmir::direction_from_name(direction);
    std::cout << mmir::convert_caption_jsonl(input, out, o).string() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
