#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "json.hpp"
#include "mmir/http_backend.h"
#include "mmir/mock_backend.h"
#include "mmir/pipeline.h"

namespace mmir {

enum class BackendKind { kMock, kHttp };

struct BackendConfig {
  BackendKind kind = BackendKind::kMock;
  HttpBackendOptions http;
  std::string api_key_env = "MMIR_API_KEY";
  MockOptions mock;
};

struct AppConfig {
  PipelineConfig pipeline;
  BackendConfig backend;
  std::string score_template_path;
};

inline constexpr const char* kDefaultApiKeyEnv = "MMIR_API_KEY";

// Fields absent from the file keep their defaults. Unknown top-level keys are rejected.
AppConfig load_config(const std::filesystem::path& path);
AppConfig config_from_json(const nlohmann::json& j);

// Resolved view for the run log; the API key is redacted.
nlohmann::json config_to_json(const AppConfig& config);

// Reads the template file (if any) and the API key environment variable.
void resolve_config(AppConfig& config);

std::string backend_kind_name(BackendKind kind);
BackendKind backend_kind_from_name(const std::string& name);

// The mock needs an oracle store; pass nullptr for the http backend.
std::unique_ptr<ScoringBackend> make_backend(const BackendConfig& config,
                                             std::shared_ptr<const EmbeddingStore> oracle);

}  // namespace mmir
