#include "tqa/retrieval.hpp"

#include <algorithm>
#include <tuple>

#include "tqa/error.hpp"
#include "tqa/utf8.hpp"

namespace tqa {

namespace {

bool ranges_overlap(std::size_t a0, std::size_t a_len, std::size_t b0, std::size_t b_len) {
  return a0 < b0 + b_len && b0 < a0 + a_len;
}

ScoredCell scored_from(const Cell& c) {
  ScoredCell s;
  s.cell_id = c.cell_id;
  s.row = c.row;
  s.col = c.col;
  s.row_span = c.row_span;
  s.col_span = c.col_span;
  return s;
}

bool ranks_before(const ScoredCell& a, const ScoredCell& b) {
  if (a.s_h != b.s_h) return a.s_h > b.s_h;
  return std::tie(a.row, a.col) < std::tie(b.row, b.col);
}

}  // namespace

bool ScoredCell::shares_row_or_col(const ScoredCell& other) const {
  return ranges_overlap(row, row_span, other.row, other.row_span) ||
         ranges_overlap(col, col_span, other.col, other.col_span);
}

double hybrid_score(double s_v, double s_t, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kAlphaOutOfRange, "alpha " + std::to_string(alpha) + " outside [0, 1]");
  }
  // Rounding can push the blend one ulp outside its endpoints.
  return std::clamp((1.0 - alpha) * s_v + alpha * s_t, std::min(s_v, s_t), std::max(s_v, s_t));
}

bool is_numeric_text(std::string_view text) {
  bool any = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::fold_width(utf8::next(text, pos));
    if (utf8::is_space(cp)) continue;
    any = true;
    const bool allowed = (cp >= U'0' && cp <= U'9') || cp == U',' || cp == U'.' || cp == U'-' || cp == U'$' ||
                         cp == U'%' || cp == U'(' || cp == U')' || cp == U'+' ||
                         cp == 0x00A5 || cp == 0xFFE5 || cp == 0x00A3 || cp == 0x20AC || cp == 0x2212 ||
                         (cp >= 0x2012 && cp <= 0x2015) || cp == 0x25B3 || cp == 0x25B2;
    if (!allowed) return false;
  }
  return any;
}

std::vector<ScoredCell> score_candidates(std::string_view question, const LogicalTable& table,
                                         const RetrievalConfig& cfg, const Scorers& scorers) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    throw Error(ErrorCode::kAlphaOutOfRange, "alpha " + std::to_string(cfg.alpha) + " outside [0, 1]");
  }
  static const ScriptSegmenter kDefaultTokenizer;
  const Tokenizer& tokenizer = scorers.tokenizer != nullptr ? *scorers.tokenizer : kDefaultTokenizer;

  std::vector<const Cell*> candidates;
  std::vector<TokenSequence> corpus;
  std::vector<TokenSequence> candidate_tokens;
  for (const Cell& c : table.cells()) {
    if (c.text.empty()) continue;
    TokenSequence tokens = tokenizer.tokenize(c.text);
    const bool is_candidate = !(cfg.exclude_numeric_candidates && is_numeric_text(c.text)) &&
                              utf8::length(c.text) >= cfg.min_candidate_len;
    if (is_candidate) {
      candidates.push_back(&c);
      candidate_tokens.push_back(tokens);
    }
    corpus.push_back(std::move(tokens));
  }
  if (candidates.empty()) {
    throw Error(ErrorCode::kNoCandidates, "table '" + table.table_id() + "' has no candidate cells");
  }
  const TokenSequence q_tokens = tokenizer.tokenize(question);
  corpus.push_back(q_tokens);
  const TfidfModel model = fit_tfidf(corpus);
  const auto q_vec = model.vectorize(q_tokens);

  std::vector<Embedding> embeddings;
  if (scorers.provider != nullptr) {
    std::vector<std::string> texts;
    texts.reserve(candidates.size() + 1);
    texts.emplace_back(question);
    for (const Cell* c : candidates) texts.push_back(c->text);
    embeddings = scorers.provider->embed_batch(texts);
    if (embeddings.size() != texts.size()) {
      throw Error(ErrorCode::kProviderUnavailable, "provider returned the wrong number of vectors");
    }
  }

  std::vector<ScoredCell> scored;
  scored.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    ScoredCell s = scored_from(*candidates[i]);
    s.s_t = std::clamp(sparse_cosine(q_vec, model.vectorize(candidate_tokens[i])), 0.0, 1.0);
    if (!embeddings.empty()) s.s_v = vector_score(embeddings.front(), embeddings[i + 1]);
    scored.push_back(std::move(s));
  }
  return scored;
}

std::vector<ScoredCell> rank_scored(std::vector<ScoredCell> candidates, double alpha) {
  for (auto& c : candidates) c.s_h = hybrid_score(c.s_v, c.s_t, alpha);
  std::sort(candidates.begin(), candidates.end(), ranks_before);
  return candidates;
}

std::vector<ScoredCell> rank_cells(std::string_view question, const LogicalTable& table,
                                   const RetrievalConfig& cfg, const Scorers& scorers) {
  return rank_scored(score_candidates(question, table, cfg, scorers), cfg.alpha);
}

IndicatorPair select_indicators(std::span<const ScoredCell> ranked, const LogicalTable& table) {
  if (ranked.empty()) throw Error(ErrorCode::kNoValidPair, "no ranked cells");
  const ScoredCell& first = ranked.front();
  const auto second = std::find_if(ranked.begin() + 1, ranked.end(),
                                   [&](const ScoredCell& c) { return !first.shares_row_or_col(c); });
  if (second == ranked.end()) {
    throw Error(ErrorCode::kNoValidPair, "no cell in table '" + table.table_id() + "' is row- and column-disjoint from " +
                                             first.cell_id);
  }
  const bool first_is_row = std::tie(first.row, first.col) > std::tie(second->row, second->col);
  return first_is_row ? IndicatorPair{first, *second} : IndicatorPair{*second, first};
}

const Cell& answer_cell(const IndicatorPair& pair, const LogicalTable& table) {
  const ScoredCell& ri = pair.row_indicator;
  const ScoredCell& ci = pair.col_indicator;
  const std::size_t row_end = std::min(ri.row + ri.row_span, table.n_rows());
  const std::size_t col_end = std::min(ci.col + ci.col_span, table.n_cols());
  for (std::size_t r = ri.row; r < row_end; ++r) {
    for (std::size_t c = ci.col; c < col_end; ++c) {
      const Cell& occupant = table.at(r, c);
      if (occupant.cell_id != ri.cell_id && occupant.cell_id != ci.cell_id) return occupant;
    }
  }
  throw Error(ErrorCode::kIntersectionIsIndicator,
              "intersection of " + ri.cell_id + " and " + ci.cell_id + " holds only indicator cells");
}

Extraction extract_value(std::string_view question, const LogicalTable& table, const RetrievalConfig& cfg,
                         const Scorers& scorers) {
  const auto ranked = rank_cells(question, table, cfg, scorers);
  Extraction ex;
  ex.indicators = select_indicators(ranked, table);
  const Cell& cell = answer_cell(ex.indicators, table);
  ex.cell_id = cell.cell_id;
  ex.raw_text = cell.text;
  return ex;
}

std::vector<TableCandidates> score_tables(std::string_view question, std::span<const LogicalTable> tables,
                                          const RetrievalConfig& cfg, const Scorers& scorers) {
  std::vector<TableCandidates> out(tables.size());
  for (std::size_t k = 0; k < tables.size(); ++k) {
    try {
      out[k].cells = score_candidates(question, tables[k], cfg, scorers);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoCandidates) throw;
      out[k].error = e;
    }
  }
  return out;
}

Extraction extract_scored(std::span<const TableCandidates> scored, std::span<const LogicalTable> tables,
                          double alpha) {
  if (tables.empty()) throw Error(ErrorCode::kNoTableFound, "no tables to search");
  std::optional<Extraction> best;
  double best_score = 0.0;
  std::optional<Error> first_error;
  for (std::size_t k = 0; k < tables.size(); ++k) {
    if (scored[k].error) {
      if (!first_error) first_error = scored[k].error;
      continue;
    }
    try {
      const auto ranked = rank_scored(scored[k].cells, alpha);
      Extraction ex;
      ex.indicators = select_indicators(ranked, tables[k]);
      const Cell& cell = answer_cell(ex.indicators, tables[k]);
      ex.cell_id = cell.cell_id;
      ex.raw_text = cell.text;
      ex.table_index = k;
      const double score = ex.indicators.row_indicator.s_h + ex.indicators.col_indicator.s_h;
      if (!best || score > best_score) {
        best_score = score;
        best = std::move(ex);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kAlphaOutOfRange) throw;
      if (!first_error) first_error = e;
    }
  }
  if (!best) throw *first_error;
  return *best;
}

Extraction extract_value(std::string_view question, std::span<const LogicalTable> tables,
                         const RetrievalConfig& cfg, const Scorers& scorers) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    throw Error(ErrorCode::kAlphaOutOfRange, "alpha " + std::to_string(cfg.alpha) + " outside [0, 1]");
  }
  const auto scored = score_tables(question, tables, cfg, scorers);
  return extract_scored(scored, tables, cfg.alpha);
}

PredictionRecord make_prediction(std::string question_id, const Extraction& ex, double alpha) {
  // c(1) is whichever indicator has the higher rank.
  const ScoredCell& a = ex.indicators.row_indicator;
  const ScoredCell& b = ex.indicators.col_indicator;
  const ScoredCell& top = ranks_before(a, b) ? a : b;
  PredictionRecord p;
  p.question_id = std::move(question_id);
  p.cell_id = ex.cell_id;
  p.raw_text = ex.raw_text;
  p.s_t = top.s_t;
  p.s_v = top.s_v;
  p.s_h = top.s_h;
  p.alpha = alpha;
  return p;
}

nlohmann::ordered_json to_json(const PredictionRecord& p) {
  nlohmann::ordered_json j;
  j["question_id"] = p.question_id;
  j["cell_id"] = p.cell_id;
  j["raw_text"] = p.raw_text;
  j["s_t"] = p.s_t;
  j["s_v"] = p.s_v;
  j["s_h"] = p.s_h;
  j["alpha"] = p.alpha;
  return j;
}

}  // namespace tqa
