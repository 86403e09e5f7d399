#include "mmir/content.h"

#include "mmir/errors.h"

namespace mmir {

MultimodalContent::MultimodalContent(std::vector<Part> parts) : parts_(std::move(parts)) {}

MultimodalContent MultimodalContent::text(std::string text) {
  return MultimodalContent({TextPart{std::move(text)}});
}

MultimodalContent MultimodalContent::image(std::string uri) {
  return MultimodalContent({ImagePart{std::move(uri)}});
}

std::size_t MultimodalContent::image_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : parts_) n += std::holds_alternative<ImagePart>(p) ? 1 : 0;
  return n;
}

void MultimodalContent::validate() const {
  if (parts_.empty()) throw Error(ErrorCode::kInvalidContent, "content has no parts");
  for (const auto& p : parts_) {
    if (const auto* t = std::get_if<TextPart>(&p); t && t->text.empty()) {
      throw Error(ErrorCode::kInvalidContent, "empty text part");
    }
    if (const auto* i = std::get_if<ImagePart>(&p); i && i->uri.empty()) {
      throw Error(ErrorCode::kInvalidContent, "empty image reference");
    }
  }
}

void append_part(std::vector<Part>& parts, Part part) {
  if (auto* t = std::get_if<TextPart>(&part)) {
    if (t->text.empty()) return;
    if (!parts.empty()) {
      if (auto* last = std::get_if<TextPart>(&parts.back())) {
        last->text += t->text;
        return;
      }
    }
  }
  parts.push_back(std::move(part));
}

std::string_view role_name(Role role) noexcept {
  return role == Role::kSystem ? "system" : "user";
}

namespace {

Part part_from_json(const nlohmann::json& j) {
  if (j.contains("text")) return TextPart{j.at("text").get<std::string>()};
  if (j.contains("image")) return ImagePart{j.at("image").get<std::string>()};
  throw Error(ErrorCode::kInvalidContent, "content part needs \"text\" or \"image\": " + j.dump());
}

}  // namespace

MultimodalContent content_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidContent, "content must be an object");
  std::vector<Part> parts;
  if (j.contains("parts")) {
    for (const auto& p : j.at("parts")) parts.push_back(part_from_json(p));
  } else {
    parts.push_back(part_from_json(j));
  }
  MultimodalContent content(std::move(parts));
  content.validate();
  return content;
}

nlohmann::json content_to_json(const MultimodalContent& content) {
  nlohmann::json parts = nlohmann::json::array();
  for (const auto& p : content.parts()) {
    if (const auto* t = std::get_if<TextPart>(&p)) {
      parts.push_back({{"text", t->text}});
    } else {
      parts.push_back({{"image", std::get<ImagePart>(p).uri}});
    }
  }
  if (parts.size() == 1) return parts[0];
  return {{"parts", parts}};
}

}  // namespace mmir
