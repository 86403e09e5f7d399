#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "mmir/embedstore.h"
#include "mmir/pipeline.h"

namespace mmir {

enum class Direction { kImageToText, kTextToImage, kGeneric };

std::string direction_name(Direction d);
Direction direction_from_name(const std::string& name);

struct DatasetQuery {
  RetrievalQuery query;
  std::string gold_candidate_id;
};

struct RetrievalDataset {
  std::string name;
  Direction direction = Direction::kGeneric;
  std::vector<DatasetQuery> queries;
  std::shared_ptr<const EmbeddingStore> store;
  CandidateCatalog catalog;
  // Ground-truth vectors for the mock backend (query ids and candidate ids), if provided.
  std::shared_ptr<const EmbeddingStore> oracle;

  std::unordered_map<std::string, std::string> gold() const;
  std::vector<RetrievalQuery> retrieval_queries() const;
};

// Manifest (paths relative to the manifest):
// {"name", "direction", "store", "query_store"?, "oracle_store"?, "candidates"?,
//  "queries": [...] | "queries_file": "x.jsonl"}
// Query record: {"query_id", "text"|"image"|"parts", "embedding": [...] | "embedding_id",
//                "gold_candidate_id"}. Without either embedding field, query_id is looked up
// in query_store.
RetrievalDataset load_dataset(const std::filesystem::path& manifest_path);

// Reads a JSONL of {"id", "text"|"image"|"parts"} records.
CandidateCatalog load_catalog(const std::filesystem::path& path);

struct ConvertOptions {
  Direction direction = Direction::kTextToImage;
  std::string name = "captions";
  // Written into the dataset manifest as given (relative to out_dir).
  std::string store_manifest = "candidates.manifest.json";
  std::string query_store_manifest = "queries.manifest.json";
};

// Converts caption-retrieval JSONL (one {"image", "image_id"?, "caption"|"captions"} per line)
// into queries.jsonl, candidates.jsonl and dataset.json under out_dir.
// Text-to-image emits one query per caption; image-to-text one query per line whose gold
// is the line's first caption. Returns the dataset manifest path.
std::filesystem::path convert_caption_jsonl(const std::filesystem::path& input, const std::filesystem::path& out_dir,
                                            const ConvertOptions& options);

}  // namespace mmir
