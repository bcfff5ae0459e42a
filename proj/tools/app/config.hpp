#pragma once

// Application settings and their layering: command-line flags override
// environment variables, which override the config file, which overrides
// the built-in defaults.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tqa/retrieval.hpp"
#include "tqa/units.hpp"

namespace tqa::app {

struct AppConfig {
  double alpha = kDefaultAlpha;
  std::string tokenizer = "default";  // default | external
  std::string tokenizer_cmd;           // argv of the external tokenizer
  std::string embed_endpoint;
  std::string llm_endpoint;
  std::string llm_model = "gpt-4o-mini";
  std::string llm_api_key;
  std::string unit_source = "auto";  // llm | rule | auto
  std::string dataset_path;
  std::size_t cache_size = 100000;
  std::string cell_id_attr;
  std::size_t workers = 1;
};

// Flat key=value view of one configuration layer.
using Settings = std::map<std::string, std::string>;

// Bad value given on the command line.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `key = value` lines; '#' starts a comment line. Throws Error(ConfigError)
/// on malformed lines or unknown keys, Error(IoError) if unreadable.
Settings parse_config_file(std::string_view text, std::string_view source_name);
Settings load_config_file(const std::string& path);

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

/// Reads EMBED_ENDPOINT, LLM_ENDPOINT, LLM_MODEL, LLM_API_KEY and the TQA_*
/// variables (TQA_ALPHA, TQA_UNIT_SOURCE, ...).
Settings env_settings(const EnvLookup& lookup);
Settings process_env_settings();

/// Applies one layer. Invalid values throw UsageError when `from_flags`,
/// Error(ConfigError) otherwise.
void apply_settings(AppConfig& cfg, const Settings& settings, bool from_flags);

AppConfig resolve_config(const Settings& file, const Settings& env, const Settings& flags);

/// Unit strategy actually used: auto without an LLM endpoint degrades to
/// rules. Throws Error(ConfigError) for `llm` without an endpoint.
UnitStrategy effective_unit_strategy(const AppConfig& cfg);

}  // namespace tqa::app
