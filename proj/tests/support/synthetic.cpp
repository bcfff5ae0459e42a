#include "synthetic.hpp"

#include <algorithm>
#include <cctype>
#include <random>

namespace tqa::testing {

namespace {

// Row and column labels share no characters, so the only lexical or bigram
// overlap between a question and the table is the intended pair.
const std::vector<std::string> kRowLabels = {
    "売上高",     "営業利益",   "経常利益", "資本金",   "総資産",   "純資産",   "有形固定資産", "棚卸資産",
    "借入金",     "研究開発費", "減価償却費", "広告宣伝費", "支払利息", "法人税等", "買掛金",       "売掛金"};
const std::vector<std::string> kColLabels = {"前期", "当期", "翌期", "前年度", "計画", "実績", "予算", "見込"};

struct UnitKind {
  std::string corner;  // text of the corner cell
  std::size_t zeros;   // power of ten the unit implies
  bool percent_suffix;
};

const std::vector<UnitKind> kUnits = {
    {"（単位：千円）", 3, false},
    {"（単位：百万円）", 6, false},
    {"（単位：円）", 0, false},
    {"", 0, true},  // values carry a trailing %
};

std::size_t pick(std::mt19937_64& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }

template <typename T>
std::vector<T> choose(std::mt19937_64& rng, const std::vector<T>& pool, std::size_t k) {
  std::vector<T> copy = pool;
  for (std::size_t i = copy.size(); i > 1; --i) std::swap(copy[i - 1], copy[pick(rng, i)]);
  copy.resize(k);
  return copy;
}

std::string with_commas(const std::string& digits) {
  std::string out;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out.push_back(',');
    out.push_back(digits[i]);
  }
  return out;
}

struct CellValue {
  std::string text;
  std::string int_digits;
  std::string frac_digits;
  bool negative = false;
};

CellValue random_value(std::mt19937_64& rng, bool percent) {
  CellValue v;
  if (percent) {
    v.int_digits = std::to_string(pick(rng, 100));
    v.frac_digits = std::to_string(pick(rng, 10));
    v.negative = pick(rng, 5) == 0;
    v.text = (v.negative ? "△" : "") + v.int_digits + "." + v.frac_digits + "%";
    return v;
  }
  v.int_digits = std::to_string(1 + pick(rng, 9'999'999));
  if (pick(rng, 6) == 0) v.frac_digits = std::to_string(1 + pick(rng, 9));
  v.negative = pick(rng, 5) == 0;
  std::string body = with_commas(v.int_digits) + (v.frac_digits.empty() ? "" : "." + v.frac_digits);
  v.text = v.negative ? (pick(rng, 2) == 0 ? "△" : "-") + body : body;
  return v;
}

std::string question_text(std::mt19937_64& rng, const std::string& row, const std::string& col) {
  switch (pick(rng, 3)) {
    case 0: return row + "の" + col + "はいくらですか？";
    case 1: return col + "における" + row + "の数値を教えてください。";
    default: return row + "（" + col + "）は？";
  }
}

}  // namespace

std::string shifted_decimal(const std::string& int_digits, const std::string& frac_digits, std::size_t zeros,
                            bool negative) {
  std::string digits = int_digits + frac_digits;
  std::size_t point = int_digits.size() + zeros;
  if (digits.size() < point) digits.append(point - digits.size(), '0');
  std::string whole = digits.substr(0, point);
  std::string frac = digits.substr(point);
  whole.erase(0, std::min(whole.find_first_not_of('0'), whole.size()));
  if (whole.empty()) whole = "0";
  while (!frac.empty() && frac.back() == '0') frac.pop_back();
  std::string out = frac.empty() ? whole : whole + "." + frac;
  if (negative && out != "0") out = "-" + out;
  return out;
}

std::vector<QARecord> synthetic_suite(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<QARecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const UnitKind& unit = kUnits[pick(rng, kUnits.size())];
    const std::size_t n_rows = 2 + pick(rng, 5);
    const std::size_t n_cols = 2 + pick(rng, 3);
    const auto rows = choose(rng, kRowLabels, n_rows);
    const auto cols = choose(rng, kColLabels, n_cols);
    // Some tables group their rows under a rowspan label in an extra column.
    const bool grouped = pick(rng, 3) == 0;
    const std::size_t label_cols = grouped ? 2 : 1;

    std::string html = "<html><body><h1>有価証券報告書</h1><p>当社の財務情報は以下のとおりです。</p>";
    html += "<table border=\"1\" class=\"fin\">";
    html += "<tr><th colspan=\"" + std::to_string(label_cols) + "\">" + unit.corner + "</th>";
    for (const auto& c : cols) html += "<th style=\"text-align:center\">" + c + "</th>";
    html += "</tr>";

    std::vector<std::vector<CellValue>> values(n_rows);
    for (std::size_t r = 0; r < n_rows; ++r) {
      html += "<tr>";
      if (grouped && r == 0) html += "<td rowspan=\"" + std::to_string(n_rows) + "\">区分</td>";
      html += "<td>" + rows[r] + "</td>";
      for (std::size_t c = 0; c < n_cols; ++c) {
        values[r].push_back(random_value(rng, unit.percent_suffix));
        html += "<td align=\"right\">" + values[r][c].text + "</td>";
      }
      html += "</tr>";
    }
    html += "</table><p>注記事項</p></body></html>";

    const std::size_t qr = pick(rng, n_rows);
    const std::size_t qc = pick(rng, n_cols);
    const CellValue& v = values[qr][qc];
    QARecord rec;
    char id[32];
    std::snprintf(id, sizeof id, "syn%03zu", i);
    rec.question_id = id;
    rec.question = question_text(rng, rows[qr], cols[qc]);
    rec.document_html = html;
    rec.gold_cell_id = "r" + std::to_string(qr + 1) + "c" + std::to_string(qc + label_cols);
    rec.gold_value = shifted_decimal(v.int_digits, v.frac_digits, unit.zeros, v.negative);
    rec.split = i % 5 == 0 ? Split::kValidation : Split::kTrain;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<QARecord> decoy_suite(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::string> kLabels = {"revenue", "profit", "assets", "equity", "debt", "capex"};
  static const std::vector<std::string> kPeriods = {"fy2021", "fy2022", "fy2023"};
  std::mt19937_64 rng(seed);
  std::vector<QARecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto labels = choose(rng, kLabels, 3);
    const std::string& target = labels[0];
    std::string decoy = target;
    std::transform(decoy.begin(), decoy.end(), decoy.begin(), [](unsigned char c) { return std::toupper(c); });
    // Target first so it has the smaller anchor; the decoy comes later.
    const std::vector<std::string> row_labels = {target, labels[1], decoy, labels[2]};
    std::string html = "<table><tr><th>(yen)</th>";
    for (const auto& p : kPeriods) html += "<th>" + p + "</th>";
    html += "</tr>";
    std::vector<std::vector<std::string>> values;
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
      html += "<tr><td>" + row_labels[r] + "</td>";
      values.emplace_back();
      for (std::size_t c = 0; c < kPeriods.size(); ++c) {
        values.back().push_back(std::to_string(1000 * (i + 1) + 10 * r + c));
        html += "<td>" + values.back().back() + "</td>";
      }
      html += "</tr>";
    }
    html += "</table>";
    const std::size_t qc = pick(rng, kPeriods.size());
    QARecord rec;
    rec.question_id = "decoy" + std::to_string(100 + i);
    rec.question = "what was " + target + " in " + kPeriods[qc] + "?";
    rec.document_html = html;
    rec.gold_cell_id = "r1c" + std::to_string(qc + 1);
    rec.gold_value = values[0][qc];
    rec.split = Split::kValidation;
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<Embedding> DecoyEmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  for (const auto& t : texts) {
    const bool upper = !t.empty() && std::all_of(t.begin(), t.end(), [](unsigned char c) { return std::isupper(c); });
    const bool question = !t.empty() && t.back() == '?';
    out.push_back(upper || question ? Embedding{{1.0, 0.0}} : Embedding{{0.0, 1.0}});
  }
  return out;
}

std::string to_jsonl(const std::vector<QARecord>& records) {
  std::string out;
  for (const auto& r : records) out += to_json(r).dump() + "\n";
  return out;
}

}  // namespace tqa::testing
