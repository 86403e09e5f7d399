#include "mmir/http_backend.h"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "mmir/errors.h"

namespace mmir {

using nlohmann::json;

namespace {

std::string base64(const std::string& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string mime_for(const std::string& path) {
  auto ext = std::filesystem::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") return "image/png";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "image/jpeg";
}

struct ParsedUrl {
  std::string scheme_host_port;
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorCode::kInvalidArgument, "endpoint must be a URL: " + url);
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

bool retryable_status(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

std::string image_to_url(const std::string& uri) {
  if (uri.rfind("http://", 0) == 0 || uri.rfind("https://", 0) == 0 || uri.rfind("data:", 0) == 0) return uri;
  std::ifstream in(uri, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot read image " + uri);
  std::ostringstream ss;
  ss << in.rdbuf();
  return "data:" + mime_for(uri) + ";base64," + base64(ss.str());
}

json build_chat_request(const ScorePrompt& prompt, const HttpBackendOptions& options) {
  json messages = json::array();
  for (const auto& message : prompt.messages) {
    json content = json::array();
    for (const auto& part : message.content.parts()) {
      if (const auto* t = std::get_if<TextPart>(&part)) {
        content.push_back({{"type", "text"}, {"text", t->text}});
      } else {
        content.push_back(
            {{"type", "image_url"}, {"image_url", {{"url", image_to_url(std::get<ImagePart>(part).uri)}}}});
      }
    }
    messages.push_back({{"role", role_name(message.role)}, {"content", content}});
  }
  return {{"model", options.model},
          {"messages", messages},
          {"temperature", prompt.temperature},
          {"max_tokens", prompt.max_output_tokens},
          {"logprobs", true},
          {"top_logprobs", options.top_logprobs}};
}

BackendReply parse_chat_response(const json& response) {
  BackendReply reply;
  try {
    const auto& choice = response.at("choices").at(0);
    const auto& content = choice.at("message").at("content");
    reply.text = content.is_null() ? std::string() : content.get<std::string>();
    if (choice.contains("logprobs") && choice["logprobs"].is_object() && choice["logprobs"].contains("content") &&
        choice["logprobs"]["content"].is_array() && !choice["logprobs"]["content"].empty()) {
      const auto& last = choice["logprobs"]["content"].back();
      std::vector<TokenLogprob> top;
      if (last.contains("top_logprobs")) {
        for (const auto& t : last.at("top_logprobs")) {
          top.push_back({t.at("token").get<std::string>(), t.at("logprob").get<double>()});
        }
      }
      if (top.empty() && last.contains("token")) {
        top.push_back({last.at("token").get<std::string>(), last.at("logprob").get<double>()});
      }
      if (!top.empty()) {
        std::stable_sort(top.begin(), top.end(), [](const auto& a, const auto& b) { return a.logprob > b.logprob; });
        reply.last_token_top_logprobs = std::move(top);
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kBackendUnavailable, std::string("malformed chat response: ") + e.what());
  }
  return reply;
}

struct HttpBackend::Impl {
  HttpBackendOptions options;
  ParsedUrl url;
};

HttpBackend::HttpBackend(HttpBackendOptions options) : impl_(std::make_unique<Impl>()) {
  if (options.endpoint.empty()) throw Error(ErrorCode::kInvalidArgument, "http backend needs an endpoint");
  if (options.top_logprobs < 1) throw Error(ErrorCode::kInvalidArgument, "top_logprobs must be >= 1");
  impl_->url = split_url(options.endpoint);
  impl_->options = std::move(options);
}

HttpBackend::~HttpBackend() = default;

BackendReply HttpBackend::complete(const BackendRequest& request) {
  const auto& opts = impl_->options;
  const std::string body = build_chat_request(request.prompt, opts).dump();

  // One client per call keeps complete() safe under concurrent use.
  httplib::Client client(impl_->url.scheme_host_port);
  const auto timeout = std::chrono::duration<double>(opts.timeout_s);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (!opts.api_key.empty()) headers.emplace("Authorization", "Bearer " + opts.api_key);

  std::string last_error;
  for (int attempt = 0; attempt <= opts.max_retries; ++attempt) {
    if (attempt > 0 && opts.retry_backoff_s > 0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(opts.retry_backoff_s * attempt));
    }
    auto res = client.Post(impl_->url.path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      json parsed;
      try {
        parsed = json::parse(res->body);
      } catch (const json::exception& e) {
        last_error = std::string("invalid JSON body: ") + e.what();
        continue;
      }
      return parse_chat_response(parsed);
    }
    last_error = "HTTP " + std::to_string(res->status);
    if (!retryable_status(res->status)) break;
  }
  throw Error(ErrorCode::kBackendUnavailable, opts.endpoint + ": " + last_error);
}

}  // namespace mmir
