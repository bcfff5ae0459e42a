#include "tqa/eval.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "tqa/error.hpp"
#include "tqa/utf8.hpp"

namespace tqa {

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

std::string required_string(const nlohmann::json& j, const char* field, std::string_view where) {
  if (!j.contains(field) || j[field].is_null()) {
    throw Error(ErrorCode::kMissingField, std::string(where) + ": missing \"" + field + "\"");
  }
  if (!j[field].is_string()) {
    throw Error(ErrorCode::kParseError, std::string(where) + ": \"" + field + "\" must be a string");
  }
  return j[field].get<std::string>();
}

std::optional<std::string> optional_string(const nlohmann::json& j, const char* field, std::string_view where) {
  if (!j.contains(field) || j[field].is_null()) return std::nullopt;
  if (!j[field].is_string()) {
    throw Error(ErrorCode::kParseError, std::string(where) + ": \"" + field + "\" must be a string");
  }
  return j[field].get<std::string>();
}

template <typename T>
nlohmann::ordered_json opt(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

double elapsed_ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string joined_html(std::span<const LogicalTable> tables, bool with_ids) {
  std::string html;
  for (const auto& t : tables) html += to_html(t, with_ids);
  return html;
}

// Everything about one question that does not depend on alpha.
struct PreparedQuestion {
  std::vector<LogicalTable> tables;
  std::vector<TableCandidates> scored;
  std::vector<UnitInfo> units;
  std::optional<std::string> error;
};

PreparedQuestion prepare(const QARecord& rec, const PipelineConfig& cfg, const PipelineDeps& deps) {
  PreparedQuestion prep;
  try {
    prep.tables = clean_document(RawDocument{rec.question_id, rec.document_html}, cfg.cell_id_attr);
    prep.scored = score_tables(rec.question, prep.tables, cfg.retrieval, Scorers{deps.tokenizer, deps.provider});
    for (const auto& t : prep.tables) prep.units.push_back(extract_unit(rec.question, t, cfg.unit_strategy, deps.llm));
  } catch (const std::exception& e) {
    prep.error = e.what();
  }
  return prep;
}

Prediction predict_prepared(const QARecord& rec, const PreparedQuestion& prep, double alpha,
                            std::optional<PredictionRecord>* record) {
  Prediction p;
  p.question_id = rec.question_id;
  if (prep.error) {
    p.error = prep.error;
    return p;
  }
  try {
    const Extraction ex = extract_scored(prep.scored, prep.tables, alpha);
    p.cell_id = ex.cell_id;
    if (record != nullptr) *record = make_prediction(rec.question_id, ex, alpha);
    p.value = normalize_value(ex.raw_text, prep.units[ex.table_index]).canonical;
  } catch (const std::exception& e) {
    p.error = e.what();
  }
  return p;
}

Prediction predict_llm(const QARecord& rec, const PipelineConfig& cfg, const LlmClient& llm) {
  Prediction p;
  p.question_id = rec.question_id;
  std::vector<LogicalTable> tables;
  try {
    tables = clean_document(RawDocument{rec.question_id, rec.document_html}, cfg.cell_id_attr);
  } catch (const std::exception& e) {
    p.error = e.what();
    return p;
  }
  std::vector<std::string> errors;
  try {
    p.cell_id = llm_baseline_cell(rec.question, joined_html(tables, true), llm);
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  try {
    const LlmValueAnswer answer = ask_value(rec.question, joined_html(tables, false), llm);
    UnitInfo unit;
    if (const std::string label = utf8::trim(answer.unit); !label.empty()) {
      unit = UnitInfo{label, unit_scale(label).value_or(Decimal(1)), UnitSource::kLlm};
    }
    p.value = normalize_value(answer.value, unit).canonical;
  } catch (const std::exception& e) {
    errors.emplace_back(e.what());
  }
  if (!errors.empty()) {
    std::string joined;
    for (const auto& e : errors) joined += (joined.empty() ? "" : "; ") + e;
    p.error = joined;
  }
  return p;
}

std::string format_accuracy(double acc) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", acc * 100.0);
  return buf;
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValidation: return "validation";
    case Split::kTest: return "test";
  }
  return "test";
}

std::optional<Split> split_from_string(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "validation") return Split::kValidation;
  if (name == "test") return Split::kTest;
  return std::nullopt;
}

std::vector<QARecord> parse_dataset(std::istream& in, std::string_view source_name) {
  std::vector<QARecord> records;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (utf8::trim(line).empty()) continue;
    const std::string where = std::string(source_name) + ":" + std::to_string(line_no);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kParseError, where + ": " + e.what());
    }
    if (!j.is_object()) throw Error(ErrorCode::kParseError, where + ": record is not a JSON object");
    QARecord rec;
    rec.question_id = required_string(j, "question_id", where);
    rec.question = required_string(j, "question", where);
    rec.document_html = required_string(j, "document_html", where);
    rec.gold_cell_id = optional_string(j, "gold_cell_id", where);
    rec.gold_value = optional_string(j, "gold_value", where);
    const std::string split = required_string(j, "split", where);
    const auto parsed_split = split_from_string(split);
    if (!parsed_split) throw Error(ErrorCode::kParseError, where + ": unknown split '" + split + "'");
    rec.split = *parsed_split;
    if (rec.question_id.empty()) throw Error(ErrorCode::kMissingField, where + ": empty \"question_id\"");
    if (rec.question.empty()) throw Error(ErrorCode::kMissingField, where + ": empty \"question\"");
    if (rec.split != Split::kTest && (!rec.gold_cell_id || !rec.gold_value)) {
      throw Error(ErrorCode::kMissingField, where + ": " + split + " record needs gold_cell_id and gold_value");
    }
    if (!seen.insert(rec.question_id).second) {
      throw Error(ErrorCode::kParseError, where + ": duplicate question_id '" + rec.question_id + "'");
    }
    records.push_back(std::move(rec));
  }
  std::sort(records.begin(), records.end(),
            [](const QARecord& a, const QARecord& b) { return a.question_id < b.question_id; });
  return records;
}

std::vector<QARecord> load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  return parse_dataset(in, path.string());
}

nlohmann::ordered_json to_json(const QARecord& record) {
  nlohmann::ordered_json j;
  j["question_id"] = record.question_id;
  j["question"] = record.question;
  j["document_html"] = record.document_html;
  if (record.gold_cell_id) j["gold_cell_id"] = *record.gold_cell_id;
  if (record.gold_value) j["gold_value"] = *record.gold_value;
  j["split"] = to_string(record.split);
  return j;
}

EvalReport evaluate(std::span<const Prediction> predictions, std::span<const QARecord> gold) {
  std::map<std::string, const QARecord*> by_id;
  for (const auto& rec : gold) by_id.emplace(rec.question_id, &rec);
  std::map<std::string, const Prediction*> predicted;
  for (const auto& p : predictions) {
    if (!by_id.contains(p.question_id)) {
      throw Error(ErrorCode::kUnknownQuestionId, "prediction for unknown question '" + p.question_id + "'");
    }
    if (!predicted.emplace(p.question_id, &p).second) {
      throw Error(ErrorCode::kParseError, "two predictions for question '" + p.question_id + "'");
    }
  }
  EvalReport report;
  report.n = by_id.size();
  std::size_t cells_ok = 0;
  std::size_t values_ok = 0;
  for (const auto& [id, rec] : by_id) {
    QuestionResult r;
    r.question_id = id;
    r.gold_cell = rec->gold_cell_id;
    r.gold_value = rec->gold_value;
    if (const auto it = predicted.find(id); it != predicted.end()) {
      const Prediction& p = *it->second;
      r.predicted_cell = p.cell_id;
      r.predicted_value = p.value;
      r.error = p.error;
      r.elapsed_ms = p.elapsed_ms;
    } else {
      r.error = "no prediction";
    }
    r.cell_correct = r.predicted_cell && r.gold_cell && *r.predicted_cell == *r.gold_cell;
    r.value_correct = r.predicted_value && r.gold_value && *r.predicted_value == *r.gold_value;
    cells_ok += r.cell_correct ? 1 : 0;
    values_ok += r.value_correct ? 1 : 0;
    report.per_question.push_back(std::move(r));
  }
  if (report.n > 0) {
    report.cell_accuracy = static_cast<double>(cells_ok) / static_cast<double>(report.n);
    report.value_accuracy = static_cast<double>(values_ok) / static_cast<double>(report.n);
  }
  return report;
}

nlohmann::ordered_json to_json(const EvalReport& report, bool include_timing) {
  nlohmann::ordered_json j;
  j["n"] = report.n;
  j["cell_accuracy"] = report.cell_accuracy;
  j["value_accuracy"] = report.value_accuracy;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& r : report.per_question) {
    nlohmann::ordered_json row;
    row["question_id"] = r.question_id;
    row["predicted_cell"] = opt(r.predicted_cell);
    row["gold_cell"] = opt(r.gold_cell);
    row["predicted_value"] = opt(r.predicted_value);
    row["gold_value"] = opt(r.gold_value);
    row["cell_correct"] = r.cell_correct;
    row["value_correct"] = r.value_correct;
    row["error"] = opt(r.error);
    if (include_timing) row["elapsed_ms"] = r.elapsed_ms;
    rows.push_back(std::move(row));
  }
  j["per_question"] = std::move(rows);
  return j;
}

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kTfidfOnly: return "tfidf";
    case Method::kVectorOnly: return "vector";
    case Method::kHybrid: return "hybrid";
    case Method::kLlmBaseline: return "llm";
  }
  return "hybrid";
}

std::optional<Method> method_from_string(std::string_view name) {
  if (name == "tfidf" || name == "tfidf_only") return Method::kTfidfOnly;
  if (name == "vector" || name == "vector_only") return Method::kVectorOnly;
  if (name == "hybrid") return Method::kHybrid;
  if (name == "llm" || name == "llm_baseline") return Method::kLlmBaseline;
  return std::nullopt;
}

double effective_alpha(Method method, const PipelineConfig& cfg) {
  switch (method) {
    case Method::kTfidfOnly: return 1.0;
    case Method::kVectorOnly: return 0.0;
    default: return cfg.retrieval.alpha;
  }
}

std::string llm_baseline_cell(std::string_view question, std::string_view table_html, const LlmClient& client) {
  return ask_cell_id(question, table_html, client);
}

ExperimentResult run_experiment(std::span<const QARecord> dataset, Method method, const PipelineConfig& cfg,
                                const PipelineDeps& deps) {
  const double alpha = effective_alpha(method, cfg);
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kAlphaOutOfRange, "alpha " + std::to_string(alpha) + " outside [0, 1]");
  }
  if ((method == Method::kLlmBaseline || cfg.unit_strategy == UnitStrategy::kLlm) && deps.llm == nullptr) {
    throw Error(ErrorCode::kConfigError, "method '" + std::string(to_string(method)) + "' needs an LLM endpoint");
  }
  PipelineConfig run_cfg = cfg;
  run_cfg.retrieval.alpha = alpha;

  std::vector<Prediction> predictions(dataset.size());
  std::vector<std::optional<PredictionRecord>> records(dataset.size());
  parallel_for(dataset.size(), cfg.workers, [&](std::size_t i) {
    const QARecord& rec = dataset[i];
    const auto start = std::chrono::steady_clock::now();
    if (method == Method::kLlmBaseline) {
      predictions[i] = predict_llm(rec, run_cfg, *deps.llm);
    } else {
      predictions[i] = predict_prepared(rec, prepare(rec, run_cfg, deps), alpha, &records[i]);
    }
    predictions[i].elapsed_ms = elapsed_ms_since(start);
  });

  ExperimentResult result;
  result.method = method;
  result.alpha = alpha;
  std::vector<std::size_t> order(dataset.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return dataset[a].question_id < dataset[b].question_id; });
  for (std::size_t i : order) {
    result.predictions.push_back(predictions[i]);
    if (records[i]) result.records.push_back(*records[i]);
  }
  std::vector<QARecord> labelled;
  std::vector<Prediction> labelled_predictions;
  for (std::size_t i : order) {
    if (!dataset[i].gold_cell_id || !dataset[i].gold_value) continue;
    labelled.push_back(dataset[i]);
    labelled_predictions.push_back(predictions[i]);
  }
  result.report = evaluate(labelled_predictions, labelled);
  return result;
}

SweepResult sweep_alpha(std::span<const QARecord> validation, const PipelineConfig& cfg, const PipelineDeps& deps) {
  if (validation.empty()) throw Error(ErrorCode::kEmptyValidation, "validation set is empty");
  for (const auto& rec : validation) {
    if (!rec.gold_cell_id || !rec.gold_value) {
      throw Error(ErrorCode::kMissingField, "record '" + rec.question_id + "' has no gold labels");
    }
  }
  if (cfg.unit_strategy == UnitStrategy::kLlm && deps.llm == nullptr) {
    throw Error(ErrorCode::kConfigError, "unit source 'llm' needs an LLM endpoint");
  }

  std::vector<PreparedQuestion> prepared(validation.size());
  parallel_for(validation.size(), cfg.workers,
               [&](std::size_t i) { prepared[i] = prepare(validation[i], cfg, deps); });

  auto evaluate_at = [&](double alpha, bool fine) {
    std::vector<Prediction> preds(validation.size());
    parallel_for(validation.size(), cfg.workers, [&](std::size_t i) {
      preds[i] = predict_prepared(validation[i], prepared[i], alpha, nullptr);
    });
    const EvalReport report = evaluate(preds, validation);
    return SweepRow{alpha, report.cell_accuracy, report.value_accuracy, fine};
  };
  auto better = [](const SweepRow& candidate, const SweepRow& incumbent) {
    if (candidate.value_accuracy != incumbent.value_accuracy) {
      return candidate.value_accuracy > incumbent.value_accuracy;
    }
    return candidate.alpha < incumbent.alpha;
  };

  SweepResult result;
  int best_coarse = 0;
  for (int i = 0; i <= 10; ++i) {
    result.rows.push_back(evaluate_at(static_cast<double>(i) / 10.0, false));
    if (better(result.rows.back(), result.rows[best_coarse])) best_coarse = i;
  }
  const int lo = std::max(0, best_coarse * 10 - 10);
  const int hi = std::min(100, best_coarse * 10 + 10);
  for (int k = lo; k <= hi; ++k) result.rows.push_back(evaluate_at(static_cast<double>(k) / 100.0, true));

  const SweepRow* best = &result.rows.front();
  for (const auto& row : result.rows) {
    if (better(row, *best)) best = &row;
  }
  result.best_alpha = best->alpha;
  return result;
}

std::string sweep_csv(const SweepResult& sweep) {
  std::string out = "alpha,cell_acc,value_acc\n";
  char buf[96];
  for (const auto& row : sweep.rows) {
    std::snprintf(buf, sizeof buf, "%.2f,%.6f,%.6f\n", row.alpha, row.cell_accuracy, row.value_accuracy);
    out += buf;
  }
  return out;
}

ReportRow report_row(const ExperimentResult& result) {
  ReportRow row;
  char alpha[32];
  std::snprintf(alpha, sizeof alpha, "%.2f", result.alpha);
  switch (result.method) {
    case Method::kTfidfOnly: row.model = "TF-IDF"; break;
    case Method::kVectorOnly: row.model = "Vector"; break;
    case Method::kHybrid: row.model = std::string("TF-IDF + Vector (alpha=") + alpha + ")"; break;
    case Method::kLlmBaseline: row.model = "LLM"; break;
  }
  row.cell_accuracy = result.report.cell_accuracy;
  row.value_accuracy = result.report.value_accuracy;
  return row;
}

std::string format_results_table(std::span<const ReportRow> rows) {
  const std::vector<std::string> header = {"model", "T.C.", "U.E.", "V.N.", "Cell ID", "Value"};
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({r.model, r.table_cleaning ? "yes" : "no", r.unit_extraction ? "yes" : "no",
                     r.value_normalization ? "yes" : "no",
                     r.cell_accuracy ? format_accuracy(*r.cell_accuracy) : "--",
                     r.value_accuracy ? format_accuracy(*r.value_accuracy) : "--"});
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], utf8::length(row[c]));
  }
  auto emit = [&](const std::vector<std::string>& row) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::size_t pad = width[c] - utf8::length(row[c]);
      if (c == 0) {
        line += row[c] + std::string(pad, ' ');
      } else {
        line += "  " + std::string(pad, ' ') + row[c];
      }
    }
    return line + "\n";
  };
  std::string out = emit(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& row : cells) out += emit(row);
  return out;
}

}  // namespace tqa
