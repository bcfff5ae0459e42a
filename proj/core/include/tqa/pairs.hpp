#pragma once

// Pseudo training pairs for the sentence encoder: a question against the
// concatenated text of one table row or column.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "tqa/table_grid.hpp"

namespace tqa {

enum class Axis { kRow, kColumn };
enum class PairLabel { kPositive, kNegative };

std::string_view to_string(Axis axis);
std::string_view to_string(PairLabel label);

struct GridLine {
  Axis axis = Axis::kRow;
  std::size_t index = 0;
  std::string text;
};

struct TrainingPair {
  std::string question;
  std::string line_text;
  PairLabel label = PairLabel::kNegative;
  std::string table_id;
  Axis axis = Axis::kRow;
  std::size_t index = 0;
};

/// False for cells made only of digits, separators, signs, parentheses and
/// dashes (whitespace ignored); those carry no header words.
bool filter_cell(std::string_view text);

/// One entry per row then per column. Kept cell texts along the line are
/// joined with single spaces; a merged cell contributes once per line it
/// occupies. Lines left empty by filtering are dropped.
std::vector<GridLine> line_texts(const LogicalTable& table);

/// Positive iff the gold cell's span covers the line. Throws
/// GoldCellNotInTable.
std::vector<TrainingPair> label_pairs(std::string_view question, const Cell& gold, const LogicalTable& table,
                                      std::span<const GridLine> lines);

struct PairSplit {
  std::vector<TrainingPair> train;
  std::vector<TrainingPair> valid;
};

/// Seeded 90/10 split by question: all pairs of one question land on the
/// same side. With two or more questions at least one goes to valid.
PairSplit split_dataset(std::span<const TrainingPair> pairs, std::uint64_t seed);

// {question, line_text, label, table_id, axis, index}
nlohmann::ordered_json to_json(const TrainingPair& pair);
std::string to_jsonl(std::span<const TrainingPair> pairs);

}  // namespace tqa
