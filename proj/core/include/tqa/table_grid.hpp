#pragma once

// Table cleaning and logical-grid resolution for HTML tables.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace tqa {

struct RawDocument {
  std::string doc_id;
  std::string html;
};

struct Cell {
  std::string cell_id;
  std::string text;
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t row_span = 1;
  std::size_t col_span = 1;

  std::size_t last_row() const { return row + row_span - 1; }
  std::size_t last_col() const { return col + col_span - 1; }
  bool covers(std::size_t r, std::size_t c) const {
    return r >= row && r <= last_row() && c >= col && c <= last_col();
  }

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Grid anchor (row, col) of a cell.
using GridPos = std::pair<std::size_t, std::size_t>;

/// A resolved table: every (row, col) slot belongs to exactly one cell.
/// Immutable once constructed; cells are ordered by anchor, row-major.
class LogicalTable {
 public:
  LogicalTable() = default;

  /// Validates that the cells partition an n_rows x n_cols grid and that ids
  /// are unique. Throws MalformedTable or DuplicateCellId.
  LogicalTable(std::string table_id, std::size_t n_rows, std::size_t n_cols, std::vector<Cell> cells);

  const std::string& table_id() const { return table_id_; }
  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  const std::vector<Cell>& cells() const { return cells_; }

  const Cell& at(std::size_t row, std::size_t col) const;
  std::size_t index_at(std::size_t row, std::size_t col) const { return occupancy_[row * n_cols_ + col]; }
  const std::string& occupant_id(std::size_t row, std::size_t col) const { return at(row, col).cell_id; }

  const Cell* find(std::string_view cell_id) const;

  friend bool operator==(const LogicalTable& a, const LogicalTable& b) {
    return a.table_id_ == b.table_id_ && a.n_rows_ == b.n_rows_ && a.n_cols_ == b.n_cols_ &&
           a.cells_ == b.cells_;
  }

 private:
  std::string table_id_;
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  std::vector<Cell> cells_;
  std::vector<std::size_t> occupancy_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

/// Returns each top-level <table> element, serialized, in document order.
/// Prose, comments, scripts and styles outside the tables are dropped.
/// Throws NoTableFound.
std::vector<std::string> strip_non_table(const RawDocument& doc);

/// Removes every attribute except colspan/rowspan on td/th. When
/// `preserve_attr` is non-empty that attribute is kept on cells too (used to
/// carry dataset cell identifiers through to grid construction).
std::string strip_attributes(std::string_view table_html, std::string_view preserve_attr = {});

/// Plain text of a cell's inner HTML. Nested-table cells are joined with a
/// single space.
std::string flatten_cell(std::string_view td_html);

struct GridOptions {
  std::string table_id = "t0";
  // Cell attribute that carries a dataset-supplied identifier, if any.
  std::string cell_id_attr;
};

/// Resolves a cleaned table fragment into a logical grid using first-free-slot
/// placement. Spans that collide with earlier cells are clipped; ragged rows
/// are padded with empty 1x1 cells. Cell ids are synthesized as r{row}c{col}
/// unless `opts.cell_id_attr` names an attribute present on the cells.
LogicalTable build_grid(std::string_view table_html, const GridOptions& opts = {});

/// Source ids keyed by anchor; cells without an entry get r{row}c{col}.
LogicalTable assign_cell_ids(const LogicalTable& table, const std::map<GridPos, std::string>& source_ids);

std::string synthetic_cell_id(std::size_t row, std::size_t col);

/// Full pipeline for one document: strip_non_table, strip_attributes,
/// build_grid per fragment. Table ids are "{doc_id}/t{k}". Synthetic cell ids
/// of the k-th table (k >= 1) are prefixed with "t{k}." so ids stay unique
/// across a document.
std::vector<LogicalTable> clean_document(const RawDocument& doc, std::string_view cell_id_attr = {});

// Canonical JSON: {table_id, n_rows, n_cols, cells:[{cell_id,text,row,col,row_span,col_span}]}.
nlohmann::ordered_json to_json(const LogicalTable& table);
LogicalTable table_from_json(const nlohmann::json& j);

/// Minimal HTML for a grid: one <tr> per grid row, each cell emitted at its
/// anchor with colspan/rowspan when > 1. With `with_ids` each cell carries an
/// id="..." attribute.
std::string to_html(const LogicalTable& table, bool with_ids = false);

}  // namespace tqa
