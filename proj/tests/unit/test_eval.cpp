#include <doctest.h>

#include <sstream>

#include "fake_servers.hpp"
#include "synthetic.hpp"
#include "tqa/error.hpp"
#include "tqa/eval.hpp"

using namespace tqa;
using tqa::testing::synthetic_suite;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIoError;
}

std::vector<QARecord> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_dataset(in, "mem");
}

Prediction pred(std::string id, std::optional<std::string> cell, std::optional<std::string> value) {
  Prediction p;
  p.question_id = std::move(id);
  p.cell_id = std::move(cell);
  p.value = std::move(value);
  return p;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("dataset loader") {
    const auto recs = parse(
        R"({"question_id":"b","question":"Q2","document_html":"<table></table>","split":"test"})"
        "\n\n"
        R"({"question_id":"a","question":"Q1","document_html":"<table></table>","gold_cell_id":"r0c0","gold_value":"1","split":"validation"})"
        "\n");
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].question_id == "a");
    CHECK(recs[0].split == Split::kValidation);
    CHECK(recs[1].gold_cell_id == std::nullopt);
    CHECK(to_json(recs[0]).dump() ==
          R"({"question_id":"a","question":"Q1","document_html":"<table></table>","gold_cell_id":"r0c0","gold_value":"1","split":"validation"})");
  }

  TEST_CASE("dataset loader errors carry the line number") {
    const std::string ok = R"({"question_id":"a","question":"Q","document_html":"","split":"test"})";
    CHECK_THROWS_WITH_AS(parse(ok + "\n{broken\n"), doctest::Contains("mem:2"), Error);
    CHECK(code_of([&] { parse(ok + "\n" + ok + "\n"); }) == ErrorCode::kParseError);
    CHECK(code_of([] { parse(R"({"question":"Q","document_html":"","split":"test"})"); }) == ErrorCode::kMissingField);
    CHECK(code_of([] { parse(R"({"question_id":"a","question":"Q","document_html":"","split":"train"})"); }) ==
          ErrorCode::kMissingField);
    CHECK(code_of([] { parse(R"({"question_id":"a","question":"Q","document_html":"","split":"dev"})"); }) ==
          ErrorCode::kParseError);
    CHECK(code_of([] { parse(R"({"question_id":1,"question":"Q","document_html":"","split":"test"})"); }) ==
          ErrorCode::kParseError);
    CHECK(code_of([] { load_dataset("/nonexistent/x.jsonl"); }) == ErrorCode::kIoError);
  }

  TEST_CASE("exact-match scoring") {
    std::vector<QARecord> gold(2);
    gold[0] = {"q1", "", "", "r1c1", "1,000,000", Split::kTest};
    gold[1] = {"q2", "", "", "r2c2", "5", Split::kTest};
    const std::vector<Prediction> preds = {pred("q1", "r1c1", "1000000"), pred("q2", "r2c2", "5")};
    const EvalReport r = evaluate(preds, gold);
    CHECK(r.n == 2);
    CHECK(r.cell_accuracy == 1.0);
    CHECK(r.value_accuracy == 0.5);
    CHECK_FALSE(r.per_question[0].value_correct);
    CHECK(r.per_question[1].value_correct);
  }

  TEST_CASE("missing predictions count as wrong; strays are rejected") {
    std::vector<QARecord> gold(2);
    gold[0] = {"q1", "", "", "c", "v", Split::kTest};
    gold[1] = {"q2", "", "", "c", "v", Split::kTest};
    const std::vector<Prediction> one = {pred("q1", "c", "v")};
    const EvalReport r = evaluate(one, gold);
    CHECK(r.cell_accuracy == 0.5);
    CHECK(r.per_question[1].error == std::optional<std::string>("no prediction"));
    const std::vector<Prediction> stray = {pred("zz", "c", "v")};
    CHECK(code_of([&] { evaluate(stray, gold); }) == ErrorCode::kUnknownQuestionId);
    const std::vector<Prediction> twice = {pred("q1", "c", "v"), pred("q1", "c", "v")};
    CHECK(code_of([&] { evaluate(twice, gold); }) == ErrorCode::kParseError);
  }

  TEST_CASE("report JSON omits timing on request") {
    std::vector<QARecord> gold(1);
    gold[0] = {"q1", "", "", "c", "v", Split::kTest};
    const std::vector<Prediction> preds = {pred("q1", "c", std::nullopt)};
    const auto j = to_json(evaluate(preds, gold), false);
    CHECK(j.dump() ==
          R"({"n":1,"cell_accuracy":1.0,"value_accuracy":0.0,"per_question":[{"question_id":"q1","predicted_cell":"c","gold_cell":"c","predicted_value":null,"gold_value":"v","cell_correct":true,"value_correct":false,"error":null}]})");
    CHECK(to_json(evaluate(preds, gold)).dump().find("elapsed_ms") != std::string::npos);
  }

  TEST_CASE("methods") {
    PipelineConfig cfg;
    cfg.retrieval.alpha = 0.4;
    CHECK(effective_alpha(Method::kTfidfOnly, cfg) == 1.0);
    CHECK(effective_alpha(Method::kVectorOnly, cfg) == 0.0);
    CHECK(effective_alpha(Method::kHybrid, cfg) == 0.4);
    CHECK(method_from_string("tfidf") == Method::kTfidfOnly);
    CHECK(method_from_string("bogus") == std::nullopt);
  }

  TEST_CASE("experiment over the synthetic suite") {
    const auto suite = synthetic_suite(20, 3);
    HashEmbeddingProvider hash;
    PipelineDeps deps{nullptr, &hash, nullptr};
    PipelineConfig cfg;
    const auto hybrid = run_experiment(suite, Method::kHybrid, cfg, deps);
    CHECK(hybrid.report.cell_accuracy == 1.0);
    CHECK(hybrid.report.value_accuracy == 1.0);
    CHECK(hybrid.records.size() == suite.size());

    cfg.workers = 4;
    const auto parallel = run_experiment(suite, Method::kHybrid, cfg, deps);
    CHECK(to_json(parallel.report, false) == to_json(hybrid.report, false));

    const auto tfidf = run_experiment(suite, Method::kTfidfOnly, cfg, deps);
    cfg.retrieval.alpha = 1.0;
    const auto alpha_one = run_experiment(suite, Method::kHybrid, cfg, deps);
    CHECK(to_json(tfidf.report, false) == to_json(alpha_one.report, false));
  }

  TEST_CASE("per-question failures are recorded, not thrown") {
    std::vector<QARecord> ds(2);
    ds[0] = {"bad", "q", "<p>no table</p>", "r0c0", "1", Split::kTrain};
    ds[1] = synthetic_suite(1, 4)[0];
    const auto res = run_experiment(ds, Method::kHybrid, PipelineConfig{}, PipelineDeps{});
    REQUIRE(res.predictions.size() == 2);
    CHECK(res.predictions[0].error->find("NoTableFound") != std::string::npos);
    CHECK(res.report.n == 2);
    CHECK(res.report.cell_accuracy == 0.5);
  }

  TEST_CASE("test-split records are predicted but not scored") {
    auto ds = synthetic_suite(3, 5);
    ds[0].split = Split::kTest;
    ds[0].gold_cell_id.reset();
    ds[0].gold_value.reset();
    const auto res = run_experiment(ds, Method::kHybrid, PipelineConfig{}, PipelineDeps{});
    CHECK(res.predictions.size() == 3);
    CHECK(res.report.n == 2);
  }

  TEST_CASE("LLM method needs a client") {
    const auto ds = synthetic_suite(1, 1);
    CHECK(code_of([&] { run_experiment(ds, Method::kLlmBaseline, PipelineConfig{}, PipelineDeps{}); }) ==
          ErrorCode::kConfigError);
    PipelineConfig cfg;
    cfg.unit_strategy = UnitStrategy::kLlm;
    CHECK(code_of([&] { run_experiment(ds, Method::kHybrid, cfg, PipelineDeps{}); }) == ErrorCode::kConfigError);
  }

  TEST_CASE("LLM baseline uses both prompts") {
    const auto ds = synthetic_suite(1, 1);
    const std::string gold_cell = *ds[0].gold_cell_id;
    tqa::testing::FakeLlmServer server([&](const std::string& system, const std::string& user) -> std::string {
      if (system.empty()) {
        CHECK(user.find("id=\"" + gold_cell + "\"") != std::string::npos);
        return " " + gold_cell + "\n";
      }
      return R"({"value": "12", "unit": "千円"})";
    });
    HttpLlmClient client(LlmSettings{server.chat_url()});
    const auto res = run_experiment(ds, Method::kLlmBaseline, PipelineConfig{}, PipelineDeps{nullptr, nullptr, &client});
    CHECK(res.predictions[0].cell_id == gold_cell);
    CHECK(res.predictions[0].value == std::optional<std::string>("12000"));
    CHECK(res.report.cell_accuracy == 1.0);
    CHECK(res.records.empty());
  }

  TEST_CASE("alpha sweep") {
    const auto suite = synthetic_suite(10, 2);
    HashEmbeddingProvider hash;
    const auto sweep = sweep_alpha(suite, PipelineConfig{}, PipelineDeps{nullptr, &hash, nullptr});
    REQUIRE(sweep.rows.size() == 11 + 11);  // coarse best 0.0, fine 0.00..0.10
    CHECK(sweep.best_alpha == 0.0);
    for (std::size_t i = 0; i < 11; ++i) {
      CHECK_FALSE(sweep.rows[i].fine);
      CHECK(sweep.rows[i].alpha == doctest::Approx(i / 10.0));
    }
    const std::string csv = sweep_csv(sweep);
    CHECK(csv.starts_with("alpha,cell_acc,value_acc\n0.00,1.000000,1.000000\n"));
    CHECK(code_of([] { sweep_alpha({}, PipelineConfig{}, PipelineDeps{}); }) == ErrorCode::kEmptyValidation);
    auto unlabelled = suite;
    unlabelled[3].gold_value.reset();
    CHECK(code_of([&] { sweep_alpha(unlabelled, PipelineConfig{}, PipelineDeps{}); }) == ErrorCode::kMissingField);
  }

  TEST_CASE("results table") {
    ExperimentResult r;
    r.method = Method::kHybrid;
    r.alpha = 0.21;
    r.report.cell_accuracy = 0.788;
    r.report.value_accuracy = 0.746;
    const std::vector<ReportRow> rows = {report_row(r), ReportRow{"Human", true, true, true, std::nullopt, 0.85}};
    const std::string table = format_results_table(rows);
    CHECK(table.find("TF-IDF + Vector (alpha=0.21)") != std::string::npos);
    CHECK(table.find("78.8%") != std::string::npos);
    CHECK(table.find("--") != std::string::npos);
    CHECK(table.find("Cell ID") != std::string::npos);
  }
}
