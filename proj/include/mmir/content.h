#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

namespace mmir {

struct TextPart {
  std::string text;
  bool operator==(const TextPart&) const = default;
};

// Image by URL, data URI or local path. Never flattened into text.
struct ImagePart {
  std::string uri;
  bool operator==(const ImagePart&) const = default;
};

using Part = std::variant<TextPart, ImagePart>;

// Text, image, or interleaved image-text content. At least one part; text parts non-empty.
class MultimodalContent {
 public:
  MultimodalContent() = default;
  explicit MultimodalContent(std::vector<Part> parts);

  static MultimodalContent text(std::string text);
  static MultimodalContent image(std::string uri);

  const std::vector<Part>& parts() const noexcept { return parts_; }
  bool empty() const noexcept { return parts_.empty(); }
  std::size_t image_count() const noexcept;

  // Throws Error(kInvalidContent) when the invariants do not hold.
  void validate() const;

  bool operator==(const MultimodalContent&) const = default;

 private:
  std::vector<Part> parts_;
};

// Appends parts, merging adjacent text so that prompts stay compact.
void append_part(std::vector<Part>& parts, Part part);

enum class Role { kSystem, kUser };

struct Message {
  Role role = Role::kUser;
  MultimodalContent content;
};

struct ScorePrompt {
  std::vector<Message> messages;
  int max_output_tokens = 16;
  double temperature = 0.0;
};

struct TokenLogprob {
  std::string token;
  double logprob = 0.0;
  bool operator==(const TokenLogprob&) const = default;
};

struct BackendReply {
  std::string text;
  // Sorted by logprob descending when present.
  std::optional<std::vector<TokenLogprob>> last_token_top_logprobs;
  bool operator==(const BackendReply&) const = default;
};

std::string_view role_name(Role role) noexcept;

// {"text": ...} | {"image": ...} | {"parts": [{"text": ...} | {"image": ...}, ...]}
MultimodalContent content_from_json(const nlohmann::json& j);
nlohmann::json content_to_json(const MultimodalContent& content);

}  // namespace mmir
