#include "tqa/table_grid.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "html_dom.hpp"
#include "tqa/error.hpp"

namespace tqa {

namespace {

// HTML's own limits for spans.
constexpr std::size_t kMaxColSpan = 1000;
constexpr std::size_t kMaxRowSpan = 65534;

bool is_cell(const html::Node& n) { return n.is("td") || n.is("th"); }

void collect_tables(const html::Node& node, std::vector<const html::Node*>& out) {
  for (const auto& child : node.children) {
    if (child->is("table")) {
      out.push_back(child.get());
    } else if (child->kind == html::Node::Kind::kElement) {
      collect_tables(*child, out);
    }
  }
}

const html::Node* first_table(const html::Node& root) {
  std::vector<const html::Node*> tables;
  collect_tables(root, tables);
  return tables.empty() ? nullptr : tables.front();
}

std::vector<const html::Node*> table_rows(const html::Node& table) {
  std::vector<const html::Node*> rows;
  for (const auto& child : table.children) {
    if (child->is("tr")) {
      rows.push_back(child.get());
    } else if (child->is("thead") || child->is("tbody") || child->is("tfoot")) {
      for (const auto& grand : child->children) {
        if (grand->is("tr")) rows.push_back(grand.get());
      }
    }
  }
  return rows;
}

std::size_t parse_span(const html::Node& cell, std::string_view name, std::size_t limit) {
  const html::Attribute* a = cell.attr(name);
  if (a == nullptr) return 1;
  std::string_view v = a->value;
  while (!v.empty() && (v.front() == ' ' || v.front() == '\t')) v.remove_prefix(1);
  while (!v.empty() && (v.back() == ' ' || v.back() == '\t')) v.remove_suffix(1);
  std::size_t value = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), value);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size() || value < 1) return 1;
  return std::min(value, limit);
}

void strip_node(html::Node& node, std::string_view preserve_attr) {
  if (node.kind != html::Node::Kind::kElement) return;
  const bool cell = is_cell(node);
  std::erase_if(node.attrs, [&](const html::Attribute& a) {
    if (!cell) return true;
    if (a.name == "colspan" || a.name == "rowspan") return false;
    return preserve_attr.empty() || a.name != preserve_attr;
  });
  for (auto& child : node.children) strip_node(*child, preserve_attr);
}

struct PlacedCell {
  Cell cell;
  std::optional<std::string> source_id;
};

}  // namespace

std::string synthetic_cell_id(std::size_t row, std::size_t col) {
  return "r" + std::to_string(row) + "c" + std::to_string(col);
}

LogicalTable::LogicalTable(std::string table_id, std::size_t n_rows, std::size_t n_cols, std::vector<Cell> cells)
    : table_id_(std::move(table_id)), n_rows_(n_rows), n_cols_(n_cols), cells_(std::move(cells)) {
  if (n_rows_ == 0 || n_cols_ == 0) throw Error(ErrorCode::kMalformedTable, "table has no rows or columns");
  std::sort(cells_.begin(), cells_.end(),
            [](const Cell& a, const Cell& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });
  constexpr std::size_t kFree = static_cast<std::size_t>(-1);
  occupancy_.assign(n_rows_ * n_cols_, kFree);
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const Cell& c = cells_[i];
    if (c.row_span < 1 || c.col_span < 1 || c.last_row() >= n_rows_ || c.last_col() >= n_cols_) {
      throw Error(ErrorCode::kMalformedTable, "cell " + c.cell_id + " lies outside the grid");
    }
    for (std::size_t r = c.row; r <= c.last_row(); ++r) {
      for (std::size_t k = c.col; k <= c.last_col(); ++k) {
        auto& slot = occupancy_[r * n_cols_ + k];
        if (slot != kFree) {
          throw Error(ErrorCode::kMalformedTable, "cells " + cells_[slot].cell_id + " and " + c.cell_id + " overlap");
        }
        slot = i;
      }
    }
    if (!by_id_.emplace(c.cell_id, i).second) {
      throw Error(ErrorCode::kDuplicateCellId, "cell id '" + c.cell_id + "' appears more than once");
    }
  }
  for (std::size_t slot = 0; slot < occupancy_.size(); ++slot) {
    if (occupancy_[slot] == kFree) {
      throw Error(ErrorCode::kMalformedTable, "slot (" + std::to_string(slot / n_cols_) + "," +
                                                  std::to_string(slot % n_cols_) + ") is not covered");
    }
  }
}

const Cell& LogicalTable::at(std::size_t row, std::size_t col) const {
  return cells_[occupancy_[row * n_cols_ + col]];
}

const Cell* LogicalTable::find(std::string_view cell_id) const {
  const auto it = by_id_.find(std::string(cell_id));
  return it == by_id_.end() ? nullptr : &cells_[it->second];
}

std::vector<std::string> strip_non_table(const RawDocument& doc) {
  const auto root = html::parse(doc.html);
  std::vector<const html::Node*> tables;
  collect_tables(*root, tables);
  if (tables.empty()) {
    throw Error(ErrorCode::kNoTableFound, "document '" + doc.doc_id + "' contains no <table> element");
  }
  std::vector<std::string> fragments;
  fragments.reserve(tables.size());
  for (const auto* t : tables) fragments.push_back(html::serialize(*t));
  return fragments;
}

std::string strip_attributes(std::string_view table_html, std::string_view preserve_attr) {
  auto root = html::parse(table_html);
  strip_node(*root, preserve_attr);
  return html::serialize(*root);
}

std::string flatten_cell(std::string_view td_html) { return html::flat_text(*html::parse(td_html)); }

LogicalTable build_grid(std::string_view table_html, const GridOptions& opts) {
  const auto root = html::parse(table_html);
  const html::Node* table = first_table(*root);
  if (table == nullptr) throw Error(ErrorCode::kMalformedTable, "fragment has no <table> element");
  const auto rows = table_rows(*table);
  if (rows.empty()) throw Error(ErrorCode::kMalformedTable, "table '" + opts.table_id + "' has zero rows");

  const std::size_t n_rows = rows.size();
  // occupied[r] grows as columns are claimed.
  std::vector<std::vector<bool>> occupied(n_rows);
  auto is_free = [&](std::size_t r, std::size_t c) { return c >= occupied[r].size() || !occupied[r][c]; };
  auto claim = [&](std::size_t r, std::size_t c) {
    if (occupied[r].size() <= c) occupied[r].resize(c + 1, false);
    occupied[r][c] = true;
  };

  std::vector<PlacedCell> placed;
  std::size_t n_cols = 0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    std::size_t col = 0;
    for (const auto& child : rows[r]->children) {
      if (!is_cell(*child)) continue;
      while (!is_free(r, col)) ++col;
      std::size_t col_span = parse_span(*child, "colspan", kMaxColSpan);
      std::size_t row_span = std::min(parse_span(*child, "rowspan", kMaxRowSpan), n_rows - r);
      // Clip against slots claimed by earlier rowspans: first along the
      // anchor row, then downwards for the clipped width.
      std::size_t width = 1;
      while (width < col_span && is_free(r, col + width)) ++width;
      col_span = width;
      std::size_t height = 1;
      while (height < row_span) {
        bool row_free = true;
        for (std::size_t k = col; k < col + col_span; ++k) row_free = row_free && is_free(r + height, k);
        if (!row_free) break;
        ++height;
      }
      row_span = height;
      for (std::size_t rr = r; rr < r + row_span; ++rr) {
        for (std::size_t k = col; k < col + col_span; ++k) claim(rr, k);
      }
      n_cols = std::max(n_cols, col + col_span);

      PlacedCell pc;
      pc.cell.text = html::flat_text(*child);
      pc.cell.row = r;
      pc.cell.col = col;
      pc.cell.row_span = row_span;
      pc.cell.col_span = col_span;
      if (!opts.cell_id_attr.empty()) {
        if (const auto* a = child->attr(opts.cell_id_attr); a != nullptr && !a->value.empty()) {
          pc.source_id = a->value;
        }
      }
      placed.push_back(std::move(pc));
      col += col_span;
    }
  }
  if (n_cols == 0) n_cols = 1;

  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (!is_free(r, c)) continue;
      PlacedCell pad;
      pad.cell.row = r;
      pad.cell.col = c;
      placed.push_back(std::move(pad));
    }
  }

  std::vector<Cell> cells;
  std::map<GridPos, std::string> source_ids;
  cells.reserve(placed.size());
  for (auto& pc : placed) {
    pc.cell.cell_id = synthetic_cell_id(pc.cell.row, pc.cell.col);
    if (pc.source_id) source_ids.emplace(GridPos{pc.cell.row, pc.cell.col}, *pc.source_id);
    cells.push_back(std::move(pc.cell));
  }
  LogicalTable grid(opts.table_id, n_rows, n_cols, std::move(cells));
  if (source_ids.empty()) return grid;
  return assign_cell_ids(grid, source_ids);
}

LogicalTable assign_cell_ids(const LogicalTable& table, const std::map<GridPos, std::string>& source_ids) {
  std::vector<Cell> cells = table.cells();
  std::set<std::string> seen;
  for (Cell& c : cells) {
    const auto it = source_ids.find({c.row, c.col});
    c.cell_id = it != source_ids.end() ? it->second : synthetic_cell_id(c.row, c.col);
    if (!seen.insert(c.cell_id).second) {
      throw Error(ErrorCode::kDuplicateCellId, "cell id '" + c.cell_id + "' assigned to more than one cell");
    }
  }
  return LogicalTable(table.table_id(), table.n_rows(), table.n_cols(), std::move(cells));
}

std::vector<LogicalTable> clean_document(const RawDocument& doc, std::string_view cell_id_attr) {
  const auto fragments = strip_non_table(doc);
  std::vector<LogicalTable> tables;
  tables.reserve(fragments.size());
  for (std::size_t k = 0; k < fragments.size(); ++k) {
    GridOptions opts;
    opts.table_id = doc.doc_id + "/t" + std::to_string(k);
    opts.cell_id_attr = std::string(cell_id_attr);
    LogicalTable grid = build_grid(strip_attributes(fragments[k], cell_id_attr), opts);
    if (k > 0) {
      const std::string prefix = "t" + std::to_string(k) + ".";
      std::vector<Cell> cells = grid.cells();
      for (Cell& c : cells) {
        if (c.cell_id == synthetic_cell_id(c.row, c.col)) c.cell_id = prefix + c.cell_id;
      }
      grid = LogicalTable(grid.table_id(), grid.n_rows(), grid.n_cols(), std::move(cells));
    }
    tables.push_back(std::move(grid));
  }
  return tables;
}

nlohmann::ordered_json to_json(const LogicalTable& table) {
  nlohmann::ordered_json j;
  j["table_id"] = table.table_id();
  j["n_rows"] = table.n_rows();
  j["n_cols"] = table.n_cols();
  auto cells = nlohmann::ordered_json::array();
  for (const Cell& c : table.cells()) {
    nlohmann::ordered_json cj;
    cj["cell_id"] = c.cell_id;
    cj["text"] = c.text;
    cj["row"] = c.row;
    cj["col"] = c.col;
    cj["row_span"] = c.row_span;
    cj["col_span"] = c.col_span;
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);
  return j;
}

LogicalTable table_from_json(const nlohmann::json& j) {
  try {
    std::vector<Cell> cells;
    for (const auto& cj : j.at("cells")) {
      Cell c;
      c.cell_id = cj.at("cell_id").get<std::string>();
      c.text = cj.at("text").get<std::string>();
      c.row = cj.at("row").get<std::size_t>();
      c.col = cj.at("col").get<std::size_t>();
      c.row_span = cj.at("row_span").get<std::size_t>();
      c.col_span = cj.at("col_span").get<std::size_t>();
      cells.push_back(std::move(c));
    }
    return LogicalTable(j.at("table_id").get<std::string>(), j.at("n_rows").get<std::size_t>(),
                        j.at("n_cols").get<std::size_t>(), std::move(cells));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParseError, std::string("table JSON: ") + e.what());
  }
}

std::string to_html(const LogicalTable& table, bool with_ids) {
  std::string out = "<table>";
  auto it = table.cells().begin();
  for (std::size_t r = 0; r < table.n_rows(); ++r) {
    out += "<tr>";
    for (; it != table.cells().end() && it->row == r; ++it) {
      out += "<td";
      if (with_ids) out += " id=\"" + html::escape_attr(it->cell_id) + "\"";
      if (it->col_span > 1) out += " colspan=\"" + std::to_string(it->col_span) + "\"";
      if (it->row_span > 1) out += " rowspan=\"" + std::to_string(it->row_span) + "\"";
      out += ">";
      out += html::escape_text(it->text);
      out += "</td>";
    }
    out += "</tr>";
  }
  out += "</table>";
  return out;
}

}  // namespace tqa
