#pragma once

#include <memory>
#include <string>

#include "json.hpp"
#include "mmir/finescorer.h"

namespace mmir {

struct HttpBackendOptions {
  // Full URL of a chat-completions endpoint, e.g. http://localhost:8000/v1/chat/completions
  std::string endpoint;
  std::string model;
  std::string api_key;
  int top_logprobs = 20;
  int max_retries = 2;
  double timeout_s = 60.0;
  double retry_backoff_s = 0.5;
};

// Request body for one prompt. Local image paths are inlined as base64 data URIs.
nlohmann::json build_chat_request(const ScorePrompt& prompt, const HttpBackendOptions& options);

// Extracts message text and the last generated token's top logprobs (sorted desc).
BackendReply parse_chat_response(const nlohmann::json& response);

class HttpBackend final : public ScoringBackend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  ~HttpBackend() override;

  BackendReply complete(const BackendRequest& request) override;
  std::string name() const override { return "http"; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::string image_to_url(const std::string& uri);

}  // namespace mmir
