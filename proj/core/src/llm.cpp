#include "tqa/llm.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tqa/error.hpp"
#include "tqa/prompts_generated.hpp"
#include "tqa/utf8.hpp"
#include "url.hpp"

namespace tqa {

HttpLlmClient::HttpLlmClient(LlmSettings settings) : settings_(std::move(settings)) {
  if (settings_.endpoint.empty()) throw Error(ErrorCode::kConfigError, "LLM endpoint is not configured");
}

std::string HttpLlmClient::complete(std::string_view system, std::string_view user) const {
  nlohmann::json body;
  body["model"] = settings_.model;
  body["temperature"] = 0;
  body["messages"] = nlohmann::json::array();
  if (!system.empty()) body["messages"].push_back({{"role", "system"}, {"content", std::string(system)}});
  body["messages"].push_back({{"role", "user"}, {"content", std::string(user)}});

  const Url url = parse_url(settings_.endpoint);
  httplib::Client client(url.scheme_host_port);
  client.set_connection_timeout(5);
  client.set_read_timeout(settings_.timeout_seconds);
  httplib::Headers headers;
  if (!settings_.api_key.empty()) headers.emplace("Authorization", "Bearer " + settings_.api_key);
  const auto res = client.Post(url.path.empty() ? "/" : url.path, headers, body.dump(), "application/json");
  if (!res) {
    throw Error(ErrorCode::kLlmUnavailable,
                settings_.endpoint + " unreachable (" + httplib::to_string(res.error()) + ")");
  }
  if (res->status != 200) {
    throw Error(ErrorCode::kLlmUnavailable, settings_.endpoint + " answered HTTP " + std::to_string(res->status));
  }
  try {
    const auto reply = nlohmann::json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kLlmUnavailable, std::string("unexpected chat completion payload: ") + e.what());
  }
}

namespace prompts {

std::string_view cell_id_template() { return generated::k_cell_id_v1; }
std::string_view value_template() { return generated::k_value_v1; }
std::string_view value_system() { return generated::k_value_system_v1; }

std::string render(std::string_view tmpl, std::string_view question, std::string_view table) {
  static constexpr std::string_view kQuestion = "{question}";
  static constexpr std::string_view kTable = "{table}";
  std::string out;
  out.reserve(tmpl.size() + question.size() + table.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    const std::string_view rest = tmpl.substr(i);
    if (rest.starts_with(kQuestion)) {
      out += question;
      i += kQuestion.size();
    } else if (rest.starts_with(kTable)) {
      out += table;
      i += kTable.size();
    } else {
      out.push_back(tmpl[i++]);
    }
  }
  return out;
}

}  // namespace prompts

LlmValueAnswer parse_value_answer(std::string_view reply) {
  const auto open = reply.find('{');
  const auto close = reply.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw Error(ErrorCode::kMalformedLlmResponse, "no JSON object in reply: " + std::string(reply.substr(0, 200)));
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(reply.substr(open, close - open + 1));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedLlmResponse, std::string("reply is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("value")) {
    throw Error(ErrorCode::kMalformedLlmResponse, "reply object lacks \"value\"");
  }
  auto as_text = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_null()) return "";
    return v.dump();
  };
  LlmValueAnswer answer;
  answer.value = as_text(j["value"]);
  answer.unit = j.contains("unit") ? as_text(j["unit"]) : "";
  return answer;
}

LlmValueAnswer ask_value(std::string_view question, std::string_view table_html, const LlmClient& client) {
  const std::string reply =
      client.complete(prompts::value_system(), prompts::render(prompts::value_template(), question, table_html));
  return parse_value_answer(reply);
}

std::string ask_cell_id(std::string_view question, std::string_view table_html, const LlmClient& client) {
  const std::string reply = client.complete({}, prompts::render(prompts::cell_id_template(), question, table_html));
  return utf8::trim(reply);
}

}  // namespace tqa
