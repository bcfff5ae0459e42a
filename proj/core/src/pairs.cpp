#include "tqa/pairs.hpp"

#include <cmath>
#include <random>
#include <unordered_map>

#include "tqa/error.hpp"
#include "tqa/utf8.hpp"

namespace tqa {

namespace {

bool is_symbol_only_char(char32_t cp) {
  cp = utf8::fold_width(cp);
  if (cp >= U'0' && cp <= U'9') return true;
  switch (cp) {
    case U',': case U'.': case U'-': case U'+': case U'%': case U'(': case U')':
    case 0x2212:  // minus sign
    case 0x25B3:  // △
    case 0x25B2:  // ▲
    case 0x3001:  // 、
    case 0x3002:  // 。
    case 0x30FC:  // ー used as a dash in tables
    case 0xFF64:  // halfwidth ideographic comma
      return true;
    default:
      return cp >= 0x2010 && cp <= 0x2015;  // hyphens and dashes
  }
}

std::string join_line(const LogicalTable& table, Axis axis, std::size_t index) {
  const std::size_t length = axis == Axis::kRow ? table.n_cols() : table.n_rows();
  std::string out;
  std::size_t last = static_cast<std::size_t>(-1);
  for (std::size_t k = 0; k < length; ++k) {
    const std::size_t cell_index = axis == Axis::kRow ? table.index_at(index, k) : table.index_at(k, index);
    if (cell_index == last) continue;
    last = cell_index;
    const Cell& c = table.cells()[cell_index];
    if (c.text.empty() || !filter_cell(c.text)) continue;
    if (!out.empty()) out.push_back(' ');
    out += c.text;
  }
  return out;
}

}  // namespace

std::string_view to_string(Axis axis) { return axis == Axis::kRow ? "row" : "column"; }
std::string_view to_string(PairLabel label) { return label == PairLabel::kPositive ? "positive" : "negative"; }

bool filter_cell(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    const char32_t cp = utf8::next(text, pos);
    if (utf8::is_space(cp)) continue;
    if (!is_symbol_only_char(cp)) return true;
  }
  return false;
}

std::vector<GridLine> line_texts(const LogicalTable& table) {
  std::vector<GridLine> lines;
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    std::string text = join_line(table, Axis::kRow, r);
    if (!text.empty()) lines.push_back({Axis::kRow, r, std::move(text)});
  }
  for (std::size_t c = 0; c < table.n_cols(); ++c) {
    std::string text = join_line(table, Axis::kColumn, c);
    if (!text.empty()) lines.push_back({Axis::kColumn, c, std::move(text)});
  }
  return lines;
}

std::vector<TrainingPair> label_pairs(std::string_view question, const Cell& gold, const LogicalTable& table,
                                      std::span<const GridLine> lines) {
  const Cell* found = table.find(gold.cell_id);
  if (found == nullptr || !(*found == gold)) {
    throw Error(ErrorCode::kGoldCellNotInTable,
                "cell '" + gold.cell_id + "' does not belong to table '" + table.table_id() + "'");
  }
  std::vector<TrainingPair> pairs;
  pairs.reserve(lines.size());
  for (const GridLine& line : lines) {
    const bool covered = line.axis == Axis::kRow ? (line.index >= gold.row && line.index <= gold.last_row())
                                                 : (line.index >= gold.col && line.index <= gold.last_col());
    TrainingPair p;
    p.question = std::string(question);
    p.line_text = line.text;
    p.label = covered ? PairLabel::kPositive : PairLabel::kNegative;
    p.table_id = table.table_id();
    p.axis = line.axis;
    p.index = line.index;
    pairs.push_back(std::move(p));
  }
  return pairs;
}

PairSplit split_dataset(std::span<const TrainingPair> pairs, std::uint64_t seed) {
  // Groups in first-appearance order.
  std::vector<std::string> questions;
  std::unordered_map<std::string, std::size_t> group_of;
  for (const auto& p : pairs) {
    if (group_of.emplace(p.question, questions.size()).second) questions.push_back(p.question);
  }
  std::vector<std::size_t> order(questions.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  // Fisher-Yates over mt19937_64, whose output sequence is fixed by the
  // standard (unlike the distributions).
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  const std::size_t n = questions.size();
  std::size_t n_valid = static_cast<std::size_t>(std::llround(static_cast<double>(n) * 0.1));
  if (n >= 2 && n_valid == 0) n_valid = 1;

  std::vector<int> side(n, 0);  // 0 train, 1 valid
  for (std::size_t k = n - n_valid; k < n; ++k) side[order[k]] = 1;

  // Emit groups in shuffled order, keeping each group's pair order.
  std::vector<std::vector<const TrainingPair*>> grouped(n);
  for (const auto& p : pairs) grouped[group_of.at(p.question)].push_back(&p);
  PairSplit split;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t g = order[k];
    auto& dest = side[g] == 0 ? split.train : split.valid;
    for (const TrainingPair* p : grouped[g]) dest.push_back(*p);
  }
  return split;
}

nlohmann::ordered_json to_json(const TrainingPair& pair) {
  nlohmann::ordered_json j;
  j["question"] = pair.question;
  j["line_text"] = pair.line_text;
  j["label"] = to_string(pair.label);
  j["table_id"] = pair.table_id;
  j["axis"] = to_string(pair.axis);
  j["index"] = pair.index;
  return j;
}

std::string to_jsonl(std::span<const TrainingPair> pairs) {
  std::string out;
  for (const auto& p : pairs) {
    out += to_json(p).dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace tqa
