#include "app/commands.hpp"

#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "tqa/pairs.hpp"

namespace tqa::app {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path);
  out << bytes;
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path);
}

int report_error(const Error& e, std::ostream& err) {
  err << "tqa: " << e.what() << "\n";
  return exit_code_for(e.code());
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoTableFound:
      return kExitNoTable;
    case ErrorCode::kAlphaOutOfRange:
      return kExitUsage;
    case ErrorCode::kConfigError:
      return kExitConfig;
    case ErrorCode::kIoError:
      return kExitNoInput;
    case ErrorCode::kProviderUnavailable:
    case ErrorCode::kLlmUnavailable:
      return kExitUnavailable;
    case ErrorCode::kMalformedTable:
    case ErrorCode::kDuplicateCellId:
    case ErrorCode::kEmptyCorpus:
    case ErrorCode::kDimensionMismatch:
    case ErrorCode::kNoCandidates:
    case ErrorCode::kNoValidPair:
    case ErrorCode::kIntersectionIsIndicator:
    case ErrorCode::kMalformedLlmResponse:
    case ErrorCode::kNotNumeric:
    case ErrorCode::kGoldCellNotInTable:
    case ErrorCode::kParseError:
    case ErrorCode::kMissingField:
    case ErrorCode::kUnknownQuestionId:
    case ErrorCode::kEmptyValidation:
      return kExitData;
  }
  return kExitFailure;
}

int run_clean(const AppConfig& cfg, const std::string& input_path, CleanFormat format, std::ostream& out,
              std::ostream& err) {
  try {
    const std::string html = read_file(input_path);
    const auto tables = clean_document(RawDocument{fs::path(input_path).stem().string(), html}, cfg.cell_id_attr);
    if (format == CleanFormat::kHtml) {
      for (const auto& t : tables) out << to_html(t) << "\n";
    } else if (tables.size() == 1) {
      out << to_json(tables.front()).dump(2) << "\n";
    } else {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& t : tables) arr.push_back(to_json(t));
      out << arr.dump(2) << "\n";
    }
    return kExitOk;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

nlohmann::ordered_json prediction_line(const Prediction& p, const PredictionRecord* record) {
  nlohmann::ordered_json j;
  if (record != nullptr) {
    j = to_json(*record);
  } else {
    j["question_id"] = p.question_id;
    j["cell_id"] = p.cell_id ? nlohmann::ordered_json(*p.cell_id) : nlohmann::ordered_json(nullptr);
  }
  j["value"] = p.value ? nlohmann::ordered_json(*p.value) : nlohmann::ordered_json(nullptr);
  j["error"] = p.error ? nlohmann::ordered_json(*p.error) : nlohmann::ordered_json(nullptr);
  return j;
}

int run_predict(const Runtime& runtime, const std::string& dataset_path, const PredictOptions& opts,
                std::ostream& out, std::ostream& err) {
  try {
    const auto dataset = load_dataset(dataset_path);
    const auto result = run_experiment(dataset, opts.method, runtime.pipeline(), runtime.deps());

    std::map<std::string, const PredictionRecord*> records;
    for (const auto& r : result.records) records.emplace(r.question_id, &r);
    std::string lines;
    for (const auto& p : result.predictions) {
      const auto it = records.find(p.question_id);
      lines += prediction_line(p, it == records.end() ? nullptr : it->second).dump() + "\n";
    }
    if (opts.out_path.empty()) {
      out << lines;
    } else {
      write_file(opts.out_path, lines);
    }
    if (!opts.report_path.empty()) write_file(opts.report_path, to_json(result.report).dump(2) + "\n");

    const ReportRow row = report_row(result);
    err << format_results_table(std::span<const ReportRow>(&row, 1));
    char summary[160];
    std::snprintf(summary, sizeof summary, "n=%zu cell_accuracy=%.6f value_accuracy=%.6f\n", result.report.n,
                  result.report.cell_accuracy, result.report.value_accuracy);
    err << summary;
    return kExitOk;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

std::string default_valid_path(const std::string& out_path) {
  fs::path p(out_path);
  return (p.parent_path() / (p.stem().string() + ".valid.jsonl")).string();
}

int run_pairs(const AppConfig& cfg, const std::string& dataset_path, const PairsOptions& opts, std::ostream& out,
              std::ostream& err) {
  try {
    if (opts.out_path.empty()) throw Error(ErrorCode::kConfigError, "pairs needs --out");
    const auto dataset = load_dataset(dataset_path);
    std::vector<TrainingPair> pairs;
    std::size_t questions = 0;
    for (const auto& rec : dataset) {
      if (rec.split == Split::kTest) continue;  // held out
      if (!rec.gold_cell_id) {
        throw Error(ErrorCode::kMissingField, "record '" + rec.question_id + "' has no gold_cell_id");
      }
      const auto tables = clean_document(RawDocument{rec.question_id, rec.document_html}, cfg.cell_id_attr);
      const LogicalTable* home = nullptr;
      const Cell* gold = nullptr;
      for (const auto& t : tables) {
        if (const Cell* c = t.find(*rec.gold_cell_id); c != nullptr) {
          home = &t;
          gold = c;
          break;
        }
      }
      if (gold == nullptr) {
        throw Error(ErrorCode::kGoldCellNotInTable,
                    "gold cell '" + *rec.gold_cell_id + "' of '" + rec.question_id + "' is in no table");
      }
      const auto lines = line_texts(*home);
      auto labelled = label_pairs(rec.question, *gold, *home, lines);
      pairs.insert(pairs.end(), std::make_move_iterator(labelled.begin()), std::make_move_iterator(labelled.end()));
      ++questions;
    }
    const PairSplit split = split_dataset(pairs, opts.seed);
    const std::string valid_path = opts.valid_out_path.empty() ? default_valid_path(opts.out_path) : opts.valid_out_path;
    write_file(opts.out_path, to_jsonl(split.train));
    write_file(valid_path, to_jsonl(split.valid));
    out << "questions=" << questions << " pairs=" << pairs.size() << " train=" << split.train.size()
        << " valid=" << split.valid.size() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

int run_sweep(const Runtime& runtime, const std::string& dataset_path, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  try {
    const auto dataset = load_dataset(dataset_path);
    std::vector<QARecord> validation;
    for (const auto& rec : dataset) {
      if (rec.split == Split::kValidation) validation.push_back(rec);
    }
    // With no validation-split records the whole file is the validation set.
    if (validation.empty()) validation = dataset;
    const SweepResult sweep = sweep_alpha(validation, runtime.pipeline(), runtime.deps());
    const std::string csv = sweep_csv(sweep);
    if (out_path.empty()) {
      out << csv;
    } else {
      write_file(out_path, csv);
    }
    char line[64];
    std::snprintf(line, sizeof line, "best_alpha=%.2f\n", sweep.best_alpha);
    err << line;
    return kExitOk;
  } catch (const Error& e) {
    return report_error(e, err);
  }
}

}  // namespace tqa::app
