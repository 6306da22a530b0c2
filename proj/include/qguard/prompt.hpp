#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qguard/question_set.hpp"

namespace qguard {

struct ImageAttachment {
  std::string media_type;
  std::vector<std::uint8_t> bytes;

  bool operator==(const ImageAttachment&) const = default;
};

struct UserInput {
  std::string text;
  std::optional<ImageAttachment> image;
};

// Template ids recorded in white-box reports and cache digests.
inline constexpr const char* kQuestionTemplateId = "qguard-v1";
inline constexpr const char* kBaselineTemplateId = "baseline-v1";
inline constexpr const char* kBaselineQuestionId = "baseline";

struct ComposedPrompt {
  std::string body;
  std::optional<ImageAttachment> image;
  std::string question_id;
  std::string template_id;
};

// body = question text + "\n" + "Prompt: " + user text, byte-for-byte.
// User text is never escaped, truncated, or re-encoded.
ComposedPrompt compose_question_prompt(const UserInput& input, const GuardQuestion& question);

// The single-probe detector prompt with a fixed instruction prefix.
ComposedPrompt compose_baseline_prompt(const UserInput& input);

}  // namespace qguard
