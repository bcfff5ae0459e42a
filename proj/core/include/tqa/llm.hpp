#pragma once

// Chat-style LLM client and the fixed prompt templates used for unit
// extraction and the cell-id baseline.

#include <string>
#include <string_view>

namespace tqa {

class LlmClient {
 public:
  virtual ~LlmClient() = default;

  /// One chat turn. An empty `system` sends only the user message.
  /// Throws LlmUnavailable.
  virtual std::string complete(std::string_view system, std::string_view user) const = 0;
};

struct LlmSettings {
  std::string endpoint;  // full URL of an OpenAI-compatible chat completions route
  std::string model = "gpt-4o-mini";
  std::string api_key;
  int timeout_seconds = 60;
};

/// POSTs {"model", "temperature":0, "messages":[...]} and returns
/// choices[0].message.content.
class HttpLlmClient final : public LlmClient {
 public:
  explicit HttpLlmClient(LlmSettings settings);
  std::string complete(std::string_view system, std::string_view user) const override;

 private:
  LlmSettings settings_;
};

namespace prompts {

inline constexpr std::string_view kVersion = "v1";

std::string_view cell_id_template();
std::string_view value_template();
std::string_view value_system();

/// Substitutes the literal placeholders {question} and {table}; every other
/// brace in the template is left untouched.
std::string render(std::string_view tmpl, std::string_view question, std::string_view table);

}  // namespace prompts

struct LlmValueAnswer {
  std::string value;
  std::string unit;
};

/// Sends the value prompt and parses the {"value":..., "unit":...} object
/// out of the reply (surrounding prose or code fences are tolerated).
/// Throws LlmUnavailable or MalformedLlmResponse.
LlmValueAnswer ask_value(std::string_view question, std::string_view table_html, const LlmClient& client);

/// Sends the cell-id prompt and returns the trimmed reply.
std::string ask_cell_id(std::string_view question, std::string_view table_html, const LlmClient& client);

LlmValueAnswer parse_value_answer(std::string_view reply);

}  // namespace tqa
