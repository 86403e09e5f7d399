#include "mmir/dataset.h"

#include <fstream>
#include <unordered_set>

#include "json.hpp"
#include "mmir/errors.h"

namespace mmir {

namespace fs = std::filesystem;
using nlohmann::json;

std::string direction_name(Direction d) {
  switch (d) {
    case Direction::kImageToText: return "query_image_to_text";
    case Direction::kTextToImage: return "query_text_to_image";
    case Direction::kGeneric: return "generic";
  }
  return "generic";
}

Direction direction_from_name(const std::string& name) {
  if (name == "query_image_to_text") return Direction::kImageToText;
  if (name == "query_text_to_image") return Direction::kTextToImage;
  if (name == "generic") return Direction::kGeneric;
  throw Error(ErrorCode::kInvalidArgument, "unknown direction '" + name + "'");
}

std::unordered_map<std::string, std::string> RetrievalDataset::gold() const {
  std::unordered_map<std::string, std::string> out;
  for (const auto& q : queries) out.emplace(q.query.query_id, q.gold_candidate_id);
  return out;
}

std::vector<RetrievalQuery> RetrievalDataset::retrieval_queries() const {
  std::vector<RetrievalQuery> out;
  out.reserve(queries.size());
  for (const auto& q : queries) out.push_back(q.query);
  return out;
}

namespace {

std::vector<json> read_jsonl(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open " + path.string());
  std::vector<json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return rows;
}

std::shared_ptr<const EmbeddingStore> load_store_ref(const fs::path& base, const json& j, const char* key) {
  if (!j.contains(key)) return nullptr;
  return std::make_shared<const EmbeddingStore>(ingest_embeddings(base / j.at(key).get<std::string>()));
}

MultimodalContent record_content(const json& r) {
  json c = json::object();
  for (const char* key : {"text", "image", "parts"}) {
    if (r.contains(key)) c[key] = r.at(key);
  }
  return content_from_json(c);
}

}  // namespace

CandidateCatalog load_catalog(const fs::path& path) {
  CandidateCatalog catalog;
  for (const auto& r : read_jsonl(path)) {
    try {
      catalog.emplace(r.at("id").get<std::string>(), record_content(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
    }
  }
  return catalog;
}

RetrievalDataset load_dataset(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open dataset manifest " + manifest_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, manifest_path.string() + ": " + e.what());
  }
  const fs::path base = manifest_path.parent_path();

  RetrievalDataset ds;
  try {
    ds.name = j.value("name", manifest_path.stem().string());
    ds.direction = direction_from_name(j.value("direction", std::string("generic")));
    ds.store = load_store_ref(base, j, "store");
    if (!ds.store) throw Error(ErrorCode::kParseError, "dataset manifest needs \"store\"");
    const auto query_store = load_store_ref(base, j, "query_store");
    ds.oracle = load_store_ref(base, j, "oracle_store");
    if (j.contains("candidates")) ds.catalog = load_catalog(base / j.at("candidates").get<std::string>());

    std::vector<json> records;
    if (j.contains("queries_file")) {
      records = read_jsonl(base / j.at("queries_file").get<std::string>());
    } else {
      records = j.at("queries").get<std::vector<json>>();
    }

    std::unordered_set<std::string> seen;
    for (const auto& r : records) {
      DatasetQuery q;
      q.query.query_id = r.at("query_id").get<std::string>();
      if (!seen.insert(q.query.query_id).second) {
        throw Error(ErrorCode::kDuplicateQueryId, "duplicate query id '" + q.query.query_id + "'");
      }
      q.query.content = record_content(r);
      q.gold_candidate_id = r.at("gold_candidate_id").get<std::string>();
      if (!ds.store->find(q.gold_candidate_id)) {
        throw Error(ErrorCode::kMissingGoldCandidate,
                    "gold '" + q.gold_candidate_id + "' of query '" + q.query.query_id + "' not in store");
      }
      if (r.contains("embedding")) {
        q.query.embedding = r.at("embedding").get<std::vector<float>>();
      } else {
        if (!query_store) {
          throw Error(ErrorCode::kParseError, "query '" + q.query.query_id + "' needs an embedding or a query_store");
        }
        const auto id = r.value("embedding_id", q.query.query_id);
        const auto v = query_store->vector_for(id);
        q.query.embedding.assign(v.begin(), v.end());
      }
      if (q.query.embedding.size() != ds.store->dim()) {
        throw Error(ErrorCode::kDimensionMismatch, "query '" + q.query.query_id + "' embedding has dim " +
                                                       std::to_string(q.query.embedding.size()));
      }
      ds.queries.push_back(std::move(q));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, manifest_path.string() + ": " + e.what());
  }
  return ds;
}

fs::path convert_caption_jsonl(const fs::path& input, const fs::path& out_dir, const ConvertOptions& options) {
  const auto rows = read_jsonl(input);
  fs::create_directories(out_dir);
  std::ofstream queries(out_dir / "queries.jsonl");
  std::ofstream candidates(out_dir / "candidates.jsonl");
  std::unordered_set<std::string> emitted;

  for (const auto& r : rows) {
    const auto image = r.at("image").get<std::string>();
    const auto image_id = r.value("image_id", fs::path(image).stem().string());
    std::vector<std::string> captions;
    if (r.contains("captions")) {
      captions = r.at("captions").get<std::vector<std::string>>();
    } else {
      captions.push_back(r.at("caption").get<std::string>());
    }
    if (captions.empty()) throw Error(ErrorCode::kParseError, "line for '" + image_id + "' has no caption");
    const auto caption_id = [&](std::size_t i) { return image_id + "#" + std::to_string(i); };

    if (options.direction == Direction::kImageToText) {
      queries << json{{"query_id", image_id}, {"image", image}, {"gold_candidate_id", caption_id(0)}}.dump() << '\n';
      for (std::size_t i = 0; i < captions.size(); ++i) {
        if (emitted.insert(caption_id(i)).second) {
          candidates << json{{"id", caption_id(i)}, {"text", captions[i]}}.dump() << '\n';
        }
      }
    } else {
      for (std::size_t i = 0; i < captions.size(); ++i) {
        queries << json{{"query_id", caption_id(i)}, {"text", captions[i]}, {"gold_candidate_id", image_id}}.dump()
                << '\n';
      }
      if (emitted.insert(image_id).second) candidates << json{{"id", image_id}, {"image", image}}.dump() << '\n';
    }
  }

  const json manifest = {{"name", options.name},
                         {"direction", direction_name(options.direction)},
                         {"store", options.store_manifest},
                         {"query_store", options.query_store_manifest},
                         {"candidates", "candidates.jsonl"},
                         {"queries_file", "queries.jsonl"}};
  const fs::path manifest_path = out_dir / "dataset.json";
  std::ofstream out(manifest_path);
  out << manifest.dump(2) << '\n';
  return manifest_path;
}

}  // namespace mmir
