#include "mmir/finescorer.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "mmir/errors.h"

namespace mmir {

namespace {

constexpr std::string_view kQueryPlaceholder = "{query}";
constexpr std::string_view kCandidatePlaceholder = "{candidate}";

}  // namespace

std::string_view default_score_template() noexcept {
  return "Query: {query}\n"
         "Candidate: {candidate}\n"
         "Rate how well the candidate matches the query on a scale from 0 to 100. "
         "Output a single integer from 0 to 100 and nothing else.";
}

std::string_view reask_instruction() noexcept {
  return "Your previous answer did not contain a score. Reply with a single integer from 0 to 100 only.";
}

ScorePrompt build_score_prompt(const MultimodalContent& query, const MultimodalContent& candidate,
                               std::string_view template_text, int max_output_tokens) {
  if (template_text.find(kQueryPlaceholder) == std::string_view::npos) {
    throw Error(ErrorCode::kMissingPlaceholder, "template lacks {query}");
  }
  if (template_text.find(kCandidatePlaceholder) == std::string_view::npos) {
    throw Error(ErrorCode::kMissingPlaceholder, "template lacks {candidate}");
  }
  if (max_output_tokens < 1) throw Error(ErrorCode::kInvalidArgument, "max_output_tokens must be >= 1");
  query.validate();
  candidate.validate();

  std::vector<Part> parts;
  std::size_t pos = 0;
  while (pos < template_text.size()) {
    const auto q = template_text.find(kQueryPlaceholder, pos);
    const auto c = template_text.find(kCandidatePlaceholder, pos);
    const auto next = std::min(q, c);
    if (next == std::string_view::npos) {
      append_part(parts, TextPart{std::string(template_text.substr(pos))});
      break;
    }
    append_part(parts, TextPart{std::string(template_text.substr(pos, next - pos))});
    const bool is_query = next == q;
    for (const auto& p : (is_query ? query : candidate).parts()) append_part(parts, p);
    pos = next + (is_query ? kQueryPlaceholder.size() : kCandidatePlaceholder.size());
  }

  ScorePrompt prompt;
  prompt.messages.push_back({Role::kUser, MultimodalContent(std::move(parts))});
  prompt.max_output_tokens = max_output_tokens;
  prompt.temperature = 0.0;
  return prompt;
}

int parse_score(std::string_view text) {
  const auto is_digit = [](char ch) { return ch >= '0' && ch <= '9'; };
  const auto begin = std::find_if(text.begin(), text.end(), is_digit);
  if (begin == text.end()) throw Error(ErrorCode::kNoScoreFound, "no digits in reply");
  const auto end = std::find_if_not(begin, text.end(), is_digit);
  long long value = 0;
  for (auto it = begin; it != end; ++it) {
    value = value * 10 + (*it - '0');
    if (value > kMaxScore) return kMaxScore;  // saturate before overflow on long runs
  }
  return static_cast<int>(std::clamp<long long>(value, kMinScore, kMaxScore));
}

FineScore score_pair(ScoringBackend& backend, const PairKey& pair, const MultimodalContent& query,
                     const MultimodalContent& candidate, const ScoringOptions& options) {
  if (candidate.empty()) throw Error(ErrorCode::kInvalidContent, "candidate is empty");
  const std::string_view tmpl =
      options.template_text.empty() ? default_score_template() : std::string_view(options.template_text);

  BackendRequest request;
  request.prompt = build_score_prompt(query, candidate, tmpl, options.max_output_tokens);
  request.pair = pair;
  request.kind = RequestKind::kScore;

  FineScore result;
  result.candidate_id = pair.candidate_id;
  const auto start = std::chrono::steady_clock::now();
  for (int attempt = 0; attempt < 2; ++attempt) {
    request.attempt = attempt;
    if (attempt == 1) {
      request.prompt.messages.push_back({Role::kUser, MultimodalContent::text(std::string(reask_instruction()))});
    }
    BackendReply reply = backend.complete(request);
    result.attempts = attempt + 1;
    result.raw_text = std::move(reply.text);
    result.last_token_top_logprobs = std::move(reply.last_token_top_logprobs);
    try {
      result.score = parse_score(result.raw_text);
      result.parse_failed = false;
      break;
    } catch (const Error&) {
      result.score = 0;
      result.parse_failed = true;
    }
  }
  result.backend_latency_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return result;
}

std::string load_template(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingFile, "cannot open template " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace mmir
