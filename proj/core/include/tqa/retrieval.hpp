#pragma once

// Hybrid lexical/semantic cell scoring, indicator-cell selection and the
// row/column intersection that yields the answer cell.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "tqa/error.hpp"
#include "tqa/lexical.hpp"
#include "tqa/semantic.hpp"
#include "tqa/table_grid.hpp"

namespace tqa {

inline constexpr double kDefaultAlpha = 0.21;

struct RetrievalConfig {
  double alpha = kDefaultAlpha;  // weight of the TF-IDF score
  bool exclude_numeric_candidates = true;
  std::size_t min_candidate_len = 0;  // in code points
};

struct ScoredCell {
  std::string cell_id;
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t row_span = 1;
  std::size_t col_span = 1;
  double s_t = 0.0;
  double s_v = 0.0;
  double s_h = 0.0;

  bool shares_row_or_col(const ScoredCell& other) const;
};

struct IndicatorPair {
  ScoredCell row_indicator;
  ScoredCell col_indicator;
};

/// What the two scorers need. The provider may be shared across threads.
struct Scorers {
  const Tokenizer* tokenizer = nullptr;
  const EmbeddingProvider* provider = nullptr;
};

/// (1 - alpha) * s_v + alpha * s_t. Throws AlphaOutOfRange.
double hybrid_score(double s_v, double s_t, double alpha);

/// True for text made only of digits, commas, periods, currency and percent
/// signs, plus/minus signs, parentheses and the triangle negative markers
/// (whitespace ignored).
bool is_numeric_text(std::string_view text);

/// Candidate cells with s_t and s_v filled in and s_h left at 0. The TF-IDF
/// model is fitted on every non-empty cell text of the table plus the
/// question. Throws NoCandidates.
std::vector<ScoredCell> score_candidates(std::string_view question, const LogicalTable& table,
                                         const RetrievalConfig& cfg, const Scorers& scorers);

/// Fills s_h for `alpha` and sorts by descending s_h, ties by anchor row then
/// anchor column.
std::vector<ScoredCell> rank_scored(std::vector<ScoredCell> candidates, double alpha);

std::vector<ScoredCell> rank_cells(std::string_view question, const LogicalTable& table,
                                   const RetrievalConfig& cfg, const Scorers& scorers);

/// c(1) is the top cell; c(2) the first later cell sharing no occupied row
/// and no occupied column with it. The one with the larger anchor row (then
/// larger anchor column) indicates the row. Throws NoValidPair.
IndicatorPair select_indicators(std::span<const ScoredCell> ranked, const LogicalTable& table);

/// Occupant of the first slot, row-major, inside (row-indicator rows) x
/// (column-indicator columns) that is not itself an indicator. Throws
/// IntersectionIsIndicator.
const Cell& answer_cell(const IndicatorPair& pair, const LogicalTable& table);

struct Extraction {
  std::string cell_id;
  std::string raw_text;
  IndicatorPair indicators;
  std::size_t table_index = 0;
};

Extraction extract_value(std::string_view question, const LogicalTable& table, const RetrievalConfig& cfg,
                         const Scorers& scorers);

/// Candidate scores of one table, or the error that prevented scoring it.
struct TableCandidates {
  std::vector<ScoredCell> cells;
  std::optional<Error> error;
};

/// score_candidates for every table. Per-table failures (NoCandidates) are
/// captured; provider and configuration errors propagate.
std::vector<TableCandidates> score_tables(std::string_view question, std::span<const LogicalTable> tables,
                                          const RetrievalConfig& cfg, const Scorers& scorers);

/// Ranks each table's candidates at `alpha`, extracts per table, and keeps
/// the table whose indicator pair has the highest summed s_h (earlier table
/// on ties). If every table fails, the first table's error is thrown.
Extraction extract_scored(std::span<const TableCandidates> scored, std::span<const LogicalTable> tables,
                          double alpha);

/// score_tables followed by extract_scored.
Extraction extract_value(std::string_view question, std::span<const LogicalTable> tables,
                         const RetrievalConfig& cfg, const Scorers& scorers);

struct PredictionRecord {
  std::string question_id;
  std::string cell_id;
  std::string raw_text;
  // Scores of the top-ranked indicator cell c(1).
  double s_t = 0.0;
  double s_v = 0.0;
  double s_h = 0.0;
  double alpha = kDefaultAlpha;
};

PredictionRecord make_prediction(std::string question_id, const Extraction& ex, double alpha);

// {question_id, cell_id, raw_text, s_t, s_v, s_h, alpha}
nlohmann::ordered_json to_json(const PredictionRecord& p);

}  // namespace tqa
