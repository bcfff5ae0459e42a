#include "app/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "tqa/error.hpp"
#include "tqa/utf8.hpp"

namespace tqa::app {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "alpha",        "tokenizer",   "tokenizer_cmd", "embed_endpoint", "llm_endpoint", "llm_model",
      "llm_api_key",  "unit_source", "dataset_path",  "cache_size",     "cell_id_attr", "workers"};
  return keys;
}

const std::map<std::string, std::string>& env_names() {
  static const std::map<std::string, std::string> names = {
      {"TQA_ALPHA", "alpha"},
      {"TQA_TOKENIZER", "tokenizer"},
      {"TQA_TOKENIZER_CMD", "tokenizer_cmd"},
      {"EMBED_ENDPOINT", "embed_endpoint"},
      {"LLM_ENDPOINT", "llm_endpoint"},
      {"LLM_MODEL", "llm_model"},
      {"LLM_API_KEY", "llm_api_key"},
      {"TQA_UNIT_SOURCE", "unit_source"},
      {"TQA_DATASET", "dataset_path"},
      {"TQA_CACHE_SIZE", "cache_size"},
      {"TQA_CELL_ID_ATTR", "cell_id_attr"},
      {"TQA_WORKERS", "workers"},
  };
  return names;
}

[[noreturn]] void invalid(bool from_flags, const std::string& msg) {
  if (from_flags) throw UsageError(msg);
  throw Error(ErrorCode::kConfigError, msg);
}

double parse_alpha(const std::string& text, bool from_flags) {
  double value = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) invalid(from_flags, "alpha '" + text + "' is not a number");
  if (!(value >= 0.0 && value <= 1.0)) invalid(from_flags, "alpha " + text + " outside [0, 1]");
  return value;
}

std::size_t parse_count(const std::string& key, const std::string& text, bool from_flags, std::size_t min) {
  std::size_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || value < min) {
    invalid(from_flags, key + " '" + text + "' must be an integer >= " + std::to_string(min));
  }
  return value;
}

}  // namespace

Settings parse_config_file(std::string_view text, std::string_view source_name) {
  Settings out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = utf8::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no);
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::kConfigError, where + ": expected key = value");
    std::string key = utf8::trim(trimmed.substr(0, eq));
    if (!known_keys().contains(key)) throw Error(ErrorCode::kConfigError, where + ": unknown key '" + key + "'");
    out[key] = utf8::trim(trimmed.substr(eq + 1));
  }
  return out;
}

Settings load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_file(text.str(), path);
}

Settings env_settings(const EnvLookup& lookup) {
  Settings out;
  for (const auto& [var, key] : env_names()) {
    if (auto value = lookup(var.c_str()); value && !value->empty()) out[key] = *value;
  }
  return out;
}

Settings process_env_settings() {
  return env_settings([](const char* name) -> std::optional<std::string> {
    const char* v = std::getenv(name);
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  });
}

void apply_settings(AppConfig& cfg, const Settings& settings, bool from_flags) {
  for (const auto& [key, value] : settings) {
    if (key == "alpha") {
      cfg.alpha = parse_alpha(value, from_flags);
    } else if (key == "tokenizer") {
      if (value != "default" && value != "external") invalid(from_flags, "tokenizer must be default or external");
      cfg.tokenizer = value;
    } else if (key == "tokenizer_cmd") {
      cfg.tokenizer_cmd = value;
    } else if (key == "embed_endpoint") {
      cfg.embed_endpoint = value;
    } else if (key == "llm_endpoint") {
      cfg.llm_endpoint = value;
    } else if (key == "llm_model") {
      cfg.llm_model = value;
    } else if (key == "llm_api_key") {
      cfg.llm_api_key = value;
    } else if (key == "unit_source") {
      if (value != "llm" && value != "rule" && value != "auto") invalid(from_flags, "unit_source must be llm, rule or auto");
      cfg.unit_source = value;
    } else if (key == "dataset_path") {
      cfg.dataset_path = value;
    } else if (key == "cache_size") {
      cfg.cache_size = parse_count(key, value, from_flags, 0);
    } else if (key == "cell_id_attr") {
      cfg.cell_id_attr = value;
    } else if (key == "workers") {
      cfg.workers = parse_count(key, value, from_flags, 1);
    } else {
      invalid(from_flags, "unknown setting '" + key + "'");
    }
  }
}

AppConfig resolve_config(const Settings& file, const Settings& env, const Settings& flags) {
  AppConfig cfg;
  apply_settings(cfg, file, false);
  apply_settings(cfg, env, false);
  apply_settings(cfg, flags, true);
  if (cfg.tokenizer == "external" && utf8::trim(cfg.tokenizer_cmd).empty()) {
    throw Error(ErrorCode::kConfigError, "tokenizer 'external' needs tokenizer_cmd");
  }
  return cfg;
}

UnitStrategy effective_unit_strategy(const AppConfig& cfg) {
  if (cfg.unit_source == "rule") return UnitStrategy::kRule;
  if (cfg.unit_source == "llm") {
    if (cfg.llm_endpoint.empty()) throw Error(ErrorCode::kConfigError, "unit_source 'llm' needs llm_endpoint");
    return UnitStrategy::kLlm;
  }
  return cfg.llm_endpoint.empty() ? UnitStrategy::kRule : UnitStrategy::kAuto;
}

}  // namespace tqa::app
