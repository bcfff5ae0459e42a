#pragma once

// Dataset loading, the end-to-end pipeline, exact-match scoring, the alpha
// sweep and the LLM baselines.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tqa/llm.hpp"
#include "tqa/retrieval.hpp"
#include "tqa/units.hpp"

namespace tqa {

enum class Split { kTrain, kValidation, kTest };

std::string_view to_string(Split split);
std::optional<Split> split_from_string(std::string_view name);

struct QARecord {
  std::string question_id;
  std::string question;
  std::string document_html;
  std::optional<std::string> gold_cell_id;
  std::optional<std::string> gold_value;
  Split split = Split::kTest;
};

/// JSON Lines, one QARecord per line:
/// {question_id, question, document_html, gold_cell_id?, gold_value?, split}.
/// Blank lines are skipped. Result is sorted by question_id. Throws
/// ParseError (with line number, also for duplicate ids) or MissingField.
std::vector<QARecord> load_dataset(const std::filesystem::path& path);
std::vector<QARecord> parse_dataset(std::istream& in, std::string_view source_name = "<stream>");

nlohmann::ordered_json to_json(const QARecord& record);

/// One system answer. Absent fields mean the pipeline produced nothing for
/// that stage; `error` carries the failure that stopped it.
struct Prediction {
  std::string question_id;
  std::optional<std::string> cell_id;
  std::optional<std::string> value;
  std::optional<std::string> error;
  double elapsed_ms = 0.0;
};

struct QuestionResult {
  std::string question_id;
  std::optional<std::string> predicted_cell;
  std::optional<std::string> gold_cell;
  std::optional<std::string> predicted_value;
  std::optional<std::string> gold_value;
  bool cell_correct = false;
  bool value_correct = false;
  std::optional<std::string> error;
  double elapsed_ms = 0.0;
};

struct EvalReport {
  std::size_t n = 0;
  double cell_accuracy = 0.0;
  double value_accuracy = 0.0;
  std::vector<QuestionResult> per_question;  // sorted by question_id
};

/// Byte-exact comparison against gold; questions without a prediction score
/// as incorrect. Throws UnknownQuestionId, or ParseError for two
/// predictions of the same question.
EvalReport evaluate(std::span<const Prediction> predictions, std::span<const QARecord> gold);

/// `include_timing` false drops elapsed_ms so reports can be compared
/// byte for byte.
nlohmann::ordered_json to_json(const EvalReport& report, bool include_timing = true);

enum class Method { kTfidfOnly, kVectorOnly, kHybrid, kLlmBaseline };

std::string_view to_string(Method method);
std::optional<Method> method_from_string(std::string_view name);

struct PipelineConfig {
  RetrievalConfig retrieval;
  UnitStrategy unit_strategy = UnitStrategy::kRule;
  std::string cell_id_attr;  // dataset attribute carrying cell ids, if any
  std::size_t workers = 1;
};

struct PipelineDeps {
  const Tokenizer* tokenizer = nullptr;
  const EmbeddingProvider* provider = nullptr;
  const LlmClient* llm = nullptr;
};

/// Alpha actually used by a method: 1 for TF-IDF only, 0 for vector only.
double effective_alpha(Method method, const PipelineConfig& cfg);

struct ExperimentResult {
  Method method = Method::kHybrid;
  double alpha = kDefaultAlpha;
  std::vector<Prediction> predictions;  // sorted by question_id
  std::vector<PredictionRecord> records;  // retrieval methods only
  EvalReport report;  // over the records that carry both gold labels
};

/// Cleaning, retrieval, unit extraction and normalization for every record.
/// Per-question failures are recorded, never thrown. Throws ConfigError
/// when the method needs an LLM client and none is given.
ExperimentResult run_experiment(std::span<const QARecord> dataset, Method method, const PipelineConfig& cfg,
                                const PipelineDeps& deps);

/// Asks the LLM for the answer cell id of one question.
std::string llm_baseline_cell(std::string_view question, std::string_view table_html, const LlmClient& client);

struct SweepRow {
  double alpha = 0.0;
  double cell_accuracy = 0.0;
  double value_accuracy = 0.0;
  bool fine = false;
};

struct SweepResult {
  double best_alpha = 0.0;
  std::vector<SweepRow> rows;  // 11 coarse rows, then the fine rows
};

/// Coarse pass over 0.0..1.0 step 0.1, then a fine pass at step 0.01 within
/// +-0.1 of the best coarse alpha. Objective is value accuracy; ties go to
/// the smaller alpha. Throws EmptyValidation or MissingField (record
/// without gold labels).
SweepResult sweep_alpha(std::span<const QARecord> validation, const PipelineConfig& cfg, const PipelineDeps& deps);

std::string sweep_csv(const SweepResult& sweep);

struct ReportRow {
  std::string model;
  bool table_cleaning = true;
  bool unit_extraction = true;
  bool value_normalization = true;
  std::optional<double> cell_accuracy;
  std::optional<double> value_accuracy;
};

/// Plain-text results table: model, T.C., U.E., V.N., Cell ID, Value.
std::string format_results_table(std::span<const ReportRow> rows);

ReportRow report_row(const ExperimentResult& result);

}  // namespace tqa
