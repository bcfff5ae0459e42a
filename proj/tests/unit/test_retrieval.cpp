#include <doctest.h>

#include <random>

#include "tqa/error.hpp"
#include "tqa/retrieval.hpp"

using namespace tqa;

namespace {

const char* kTable =
    "<table><tr><th>（単位：千円）</th><th>前期</th><th>当期</th></tr>"
    "<tr><td>売上高</td><td>1,000</td><td>1,200</td></tr>"
    "<tr><td>営業利益</td><td>300</td><td>△20</td></tr></table>";

LogicalTable table() { return clean_document(RawDocument{"d", kTable}).front(); }

ScoredCell scored(std::string id, std::size_t r, std::size_t c, double s_h, std::size_t rs = 1, std::size_t cs = 1) {
  ScoredCell s;
  s.cell_id = std::move(id);
  s.row = r;
  s.col = c;
  s.row_span = rs;
  s.col_span = cs;
  s.s_h = s_h;
  return s;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kIoError;
}

}  // namespace

TEST_SUITE("retrieval") {
  TEST_CASE("hybrid score endpoints and range check") {
    CHECK(hybrid_score(0.3, 0.9, 0.0) == 0.3);
    CHECK(hybrid_score(0.3, 0.9, 1.0) == 0.9);
    CHECK(hybrid_score(0.2, 0.6, 0.5) == doctest::Approx(0.4));
    CHECK(code_of([] { hybrid_score(0, 0, 1.5); }) == ErrorCode::kAlphaOutOfRange);
    CHECK(code_of([] { hybrid_score(0, 0, -0.01); }) == ErrorCode::kAlphaOutOfRange);
    CHECK(kDefaultAlpha == 0.21);
  }

  TEST_CASE("numeric cells are not candidates") {
    CHECK(is_numeric_text("1,234"));
    CHECK(is_numeric_text("△ 20"));
    CHECK(is_numeric_text("１２．５%"));
    CHECK(is_numeric_text("(78)"));
    CHECK_FALSE(is_numeric_text("当期"));
    CHECK_FALSE(is_numeric_text("FY2023"));
    CHECK_FALSE(is_numeric_text(""));

    const auto cands = score_candidates("売上高の当期は？", table(), {}, {});
    for (const auto& c : cands) CHECK_FALSE(is_numeric_text(table().find(c.cell_id)->text));
    CHECK(cands.size() == 5);
  }

  TEST_CASE("empty cells are never candidates") {
    const auto t = clean_document(RawDocument{"d", "<table><tr><td></td><td>a</td></tr><tr><td>b</td></tr></table>"}).front();
    const auto cands = score_candidates("a b", t, {}, {});
    CHECK(cands.size() == 2);
  }

  TEST_CASE("no candidates") {
    const auto t = clean_document(RawDocument{"d", "<table><tr><td>1</td><td>2</td></tr></table>"}).front();
    CHECK(code_of([&] { score_candidates("q", t, {}, {}); }) == ErrorCode::kNoCandidates);
  }

  TEST_CASE("ranking sorts by score then anchor") {
    std::vector<ScoredCell> cells = {scored("b", 1, 0, 0), scored("a", 0, 1, 0), scored("c", 0, 0, 0)};
    cells[0].s_t = 0.5;
    cells[1].s_t = 0.5;
    cells[2].s_t = 0.1;
    const auto ranked = rank_scored(cells, 1.0);
    CHECK(ranked[0].cell_id == "a");
    CHECK(ranked[1].cell_id == "b");
    CHECK(ranked[2].cell_id == "c");
  }

  TEST_CASE("indicator selection skips cells sharing a row or column") {
    const LogicalTable t = table();
    const std::vector<ScoredCell> ranked = {scored("r1c0", 1, 0, 0.9), scored("r2c0", 2, 0, 0.8),
                                            scored("r0c1", 0, 1, 0.7), scored("r0c2", 0, 2, 0.6)};
    const auto pair = select_indicators(ranked, t);
    CHECK(pair.row_indicator.cell_id == "r1c0");
    CHECK(pair.col_indicator.cell_id == "r0c1");
    CHECK(answer_cell(pair, t).cell_id == "r1c1");
  }

  TEST_CASE("larger anchor indicates the row regardless of rank order") {
    const LogicalTable t = table();
    const std::vector<ScoredCell> ranked = {scored("r0c2", 0, 2, 0.9), scored("r2c0", 2, 0, 0.8)};
    const auto pair = select_indicators(ranked, t);
    CHECK(pair.row_indicator.cell_id == "r2c0");
    CHECK(answer_cell(pair, t).cell_id == "r2c2");
  }

  TEST_CASE("spans count as occupied rows and columns") {
    const auto t = clean_document(RawDocument{"d",
        "<table><tr><td colspan=\"2\">h</td><td>x</td></tr><tr><td>a</td><td>b</td><td>c</td></tr></table>"}).front();
    // h covers columns 0-1, so b (row 1, col 1) shares a column with it.
    const std::vector<ScoredCell> ranked = {scored("r0c0", 0, 0, 0.9, 1, 2), scored("r1c1", 1, 1, 0.8),
                                            scored("r1c2", 1, 2, 0.7)};
    const auto pair = select_indicators(ranked, t);
    CHECK(pair.row_indicator.cell_id == "r1c2");
    CHECK(pair.col_indicator.cell_id == "r0c0");
    // Row 1 x columns 0-1 holds a and b; a comes first.
    CHECK(answer_cell(pair, t).cell_id == "r1c0");
  }

  TEST_CASE("no disjoint partner") {
    const LogicalTable t = table();
    const std::vector<ScoredCell> ranked = {scored("r1c0", 1, 0, 0.9), scored("r2c0", 2, 0, 0.8)};
    CHECK(code_of([&] { select_indicators(ranked, t); }) == ErrorCode::kNoValidPair);
    CHECK(code_of([&] { select_indicators({}, t); }) == ErrorCode::kNoValidPair);
  }

  TEST_CASE("end to end on one table") {
    const LogicalTable t = table();
    for (double alpha : {0.0, 0.21, 0.5, 1.0}) {
      RetrievalConfig cfg;
      cfg.alpha = alpha;
      HashEmbeddingProvider hash;
      const auto ex = extract_value("営業利益の当期はいくら？", t, cfg, Scorers{nullptr, &hash});
      CAPTURE(alpha);
      CHECK(ex.cell_id == "r2c2");
      CHECK(ex.raw_text == "△20");
    }
  }

  TEST_CASE("tfidf-only equals hybrid at alpha 1 whatever the provider") {
    const LogicalTable t = table();
    RetrievalConfig cfg;
    cfg.alpha = 1.0;
    HashEmbeddingProvider hash;
    const auto with = rank_cells("売上高の前期", t, cfg, Scorers{nullptr, &hash});
    const auto without = rank_cells("売上高の前期", t, cfg, Scorers{});
    REQUIRE(with.size() == without.size());
    for (std::size_t i = 0; i < with.size(); ++i) {
      CHECK(with[i].cell_id == without[i].cell_id);
      CHECK(with[i].s_h == without[i].s_h);
    }
  }

  TEST_CASE("multi-table documents pick the best-scoring table") {
    const std::string html = std::string("<table><tr><td>従業員数</td><td>期末</td></tr><tr><td>本社</td><td>10</td></tr></table>") +
                             kTable;
    const auto tables = clean_document(RawDocument{"d", html});
    const auto ex = extract_value(std::string_view("売上高の当期"), tables, RetrievalConfig{}, Scorers{});
    CHECK(ex.table_index == 1);
    CHECK(ex.cell_id == "t1.r1c2");
  }

  TEST_CASE("a table without candidates is skipped") {
    const std::string html = std::string("<table><tr><td>1</td><td>2</td></tr></table>") + kTable;
    const auto tables = clean_document(RawDocument{"d", html});
    const auto ex = extract_value(std::string_view("売上高の当期"), tables, RetrievalConfig{}, Scorers{});
    CHECK(ex.cell_id == "t1.r1c2");
    const auto only_numbers = clean_document(RawDocument{"d", "<table><tr><td>1</td></tr></table>"});
    CHECK(code_of([&] { extract_value(std::string_view("q"), only_numbers, RetrievalConfig{}, Scorers{}); }) ==
          ErrorCode::kNoCandidates);
  }

  TEST_CASE("prediction record carries c(1) scores") {
    HashEmbeddingProvider hash;
    const auto ex = extract_value("売上高の当期", table(), RetrievalConfig{}, Scorers{nullptr, &hash});
    const auto rec = make_prediction("q1", ex, 0.21);
    const double top = std::max(ex.indicators.row_indicator.s_h, ex.indicators.col_indicator.s_h);
    CHECK(rec.s_h == top);
    CHECK(rec.s_h == doctest::Approx(0.79 * rec.s_v + 0.21 * rec.s_t));
    const auto j = to_json(rec);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"question_id", "cell_id", "raw_text", "s_t", "s_v", "s_h", "alpha"});
  }
}
