#include "mmir/config.h"

#include <cstdlib>
#include <fstream>

#include "mmir/errors.h"

namespace mmir {

using nlohmann::json;

std::string backend_kind_name(BackendKind kind) { return kind == BackendKind::kHttp ? "http" : "mock"; }

BackendKind backend_kind_from_name(const std::string& name) {
  if (name == "mock") return BackendKind::kMock;
  if (name == "http") return BackendKind::kHttp;
  throw Error(ErrorCode::kInvalidArgument, "unknown backend '" + name + "'");
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      throw Error(ErrorCode::kParseError, "unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace

AppConfig config_from_json(const json& j) {
  AppConfig c;
  try {
    reject_unknown(j,
                   {"k", "alpha", "enable_fine_stage", "enable_tiebreak", "strict", "jobs", "score_template_path",
                    "max_output_tokens", "confidence_max_tokens", "backend"},
                   "config");
    auto& p = c.pipeline;
    p.k = j.value("k", p.k);
    p.alpha = j.value("alpha", p.alpha);
    p.enable_fine_stage = j.value("enable_fine_stage", p.enable_fine_stage);
    p.enable_tiebreak = j.value("enable_tiebreak", p.enable_tiebreak);
    p.strict = j.value("strict", p.strict);
    p.jobs = j.value("jobs", p.jobs);
    p.max_output_tokens = j.value("max_output_tokens", p.max_output_tokens);
    p.confidence_max_tokens = j.value("confidence_max_tokens", p.confidence_max_tokens);
    c.score_template_path = j.value("score_template_path", std::string());

    if (j.contains("backend")) {
      const auto& b = j.at("backend");
      reject_unknown(b, {"kind", "http", "mock", "api_key_env"}, "backend");
      c.backend.kind = backend_kind_from_name(b.value("kind", std::string("mock")));
      c.backend.api_key_env = b.value("api_key_env", c.backend.api_key_env);
      if (b.contains("http")) {
        const auto& h = b.at("http");
        reject_unknown(h, {"endpoint", "model", "top_logprobs", "max_retries", "timeout_s", "retry_backoff_s"},
                       "backend.http");
        auto& o = c.backend.http;
        o.endpoint = h.value("endpoint", o.endpoint);
        o.model = h.value("model", o.model);
        o.top_logprobs = h.value("top_logprobs", o.top_logprobs);
        o.max_retries = h.value("max_retries", o.max_retries);
        o.timeout_s = h.value("timeout_s", o.timeout_s);
        o.retry_backoff_s = h.value("retry_backoff_s", o.retry_backoff_s);
      }
      if (b.contains("mock")) {
        const auto& m = b.at("mock");
        reject_unknown(m, {"seed", "noise", "quantization_levels", "error_rate", "confidence_jitter"}, "backend.mock");
        auto& o = c.backend.mock;
        o.seed = m.value("seed", o.seed);
        o.noise = m.value("noise", o.noise);
        o.quantization_levels = m.value("quantization_levels", o.quantization_levels);
        o.error_rate = m.value("error_rate", o.error_rate);
        o.confidence_jitter = m.value("confidence_jitter", o.confidence_jitter);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("config: ") + e.what());
  }
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParseError, path.string() + ": " + e.what());
  }
  AppConfig c = config_from_json(j);
  // Relative template paths resolve against the config file's directory.
  if (!c.score_template_path.empty() && std::filesystem::path(c.score_template_path).is_relative()) {
    c.score_template_path = (path.parent_path() / c.score_template_path).string();
  }
  return c;
}

json config_to_json(const AppConfig& c) {
  const auto& p = c.pipeline;
  const auto& h = c.backend.http;
  const auto& m = c.backend.mock;
  return {{"k", p.k},
          {"alpha", p.alpha},
          {"enable_fine_stage", p.enable_fine_stage},
          {"enable_tiebreak", p.enable_tiebreak},
          {"strict", p.strict},
          {"jobs", p.jobs},
          {"max_output_tokens", p.max_output_tokens},
          {"confidence_max_tokens", p.confidence_max_tokens},
          {"score_template_path", c.score_template_path},
          {"backend",
           {{"kind", backend_kind_name(c.backend.kind)},
            {"api_key_env", c.backend.api_key_env},
            {"http",
             {{"endpoint", h.endpoint},
              {"model", h.model},
              {"api_key", h.api_key.empty() ? "" : "<redacted>"},
              {"top_logprobs", h.top_logprobs},
              {"max_retries", h.max_retries},
              {"timeout_s", h.timeout_s},
              {"retry_backoff_s", h.retry_backoff_s}}},
            {"mock",
             {{"seed", m.seed},
              {"noise", m.noise},
              {"quantization_levels", m.quantization_levels},
              {"error_rate", m.error_rate},
              {"confidence_jitter", m.confidence_jitter}}}}}};
}

void resolve_config(AppConfig& c) {
  if (!c.score_template_path.empty()) c.pipeline.score_template = load_template(c.score_template_path);
  if (const char* key = std::getenv(c.backend.api_key_env.c_str()); key && *key) c.backend.http.api_key = key;
  c.pipeline.validate();
}

std::unique_ptr<ScoringBackend> make_backend(const BackendConfig& config,
                                             std::shared_ptr<const EmbeddingStore> oracle) {
  if (config.kind == BackendKind::kHttp) return std::make_unique<HttpBackend>(config.http);
  if (!oracle) throw Error(ErrorCode::kInvalidArgument, "the mock backend needs an oracle store");
  return mock_backend(std::move(oracle), config.mock);
}

}  // namespace mmir
