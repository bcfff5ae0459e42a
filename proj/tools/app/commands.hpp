#pragma once

// The tqa subcommands. Each returns a process exit code and writes results
// to `out`, diagnostics to `err`.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "app/runtime.hpp"
#include "tqa/error.hpp"

namespace tqa::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitNoTable = 2;
inline constexpr int kExitUsage = 64;
inline constexpr int kExitData = 65;
inline constexpr int kExitNoInput = 66;
inline constexpr int kExitUnavailable = 69;
inline constexpr int kExitConfig = 78;

int exit_code_for(ErrorCode code);

enum class CleanFormat { kJson, kHtml };

/// Grid JSON (one object, or an array when the document has several
/// tables) or minimal cleaned HTML.
int run_clean(const AppConfig& cfg, const std::string& input_path, CleanFormat format, std::ostream& out,
              std::ostream& err);

struct PredictOptions {
  Method method = Method::kHybrid;
  std::string out_path;     // predictions JSONL; stdout when empty
  std::string report_path;  // EvalReport JSON, optional
};

int run_predict(const Runtime& runtime, const std::string& dataset_path, const PredictOptions& opts,
                std::ostream& out, std::ostream& err);

struct PairsOptions {
  std::string out_path;
  std::string valid_out_path;  // defaults to <out stem>.valid.jsonl
  std::uint64_t seed = 42;
};

int run_pairs(const AppConfig& cfg, const std::string& dataset_path, const PairsOptions& opts, std::ostream& out,
              std::ostream& err);

/// CSV to `out_path` (or `out`), chosen alpha on `err`.
int run_sweep(const Runtime& runtime, const std::string& dataset_path, const std::string& out_path,
              std::ostream& out, std::ostream& err);

std::string default_valid_path(const std::string& out_path);

/// One line of predictions JSONL: the prediction record fields when
/// retrieval succeeded, plus the normalized value and any error.
nlohmann::ordered_json prediction_line(const Prediction& p, const PredictionRecord* record);

}  // namespace tqa::app
