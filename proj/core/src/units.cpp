#include "tqa/units.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "tqa/error.hpp"
#include "tqa/utf8.hpp"

namespace tqa {

namespace {

struct UnitMarker {
  std::string_view label;
  std::int64_t scale;
};

// Rule scan order; first match wins.
constexpr std::array<UnitMarker, 8> kRuleMarkers = {{
    {"百万円", 1'000'000},
    {"千円", 1'000},
    {"億円", 100'000'000},
    {"千株", 1'000},
    {"百株", 100},
    {"円", 1},
    {"株", 1},
    {"%", 1},
}};

// Labels the LLM may answer with beyond the rule markers.
constexpr std::array<UnitMarker, 22> kLabelAliases = {{
    {"万円", 10'000},
    {"十億円", 1'000'000'000},
    {"万株", 10'000},
    {"百万株", 1'000'000},
    {"％", 1},
    {"yen", 1},
    {"jpy", 1},
    {"thousand yen", 1'000},
    {"thousands of yen", 1'000},
    {"thousand jpy", 1'000},
    {"million yen", 1'000'000},
    {"millions of yen", 1'000'000},
    {"million jpy", 1'000'000},
    {"hundred million yen", 100'000'000},
    {"hundreds of millions of yen", 100'000'000},
    {"shares", 1},
    {"hundred shares", 100},
    {"hundreds of shares", 100},
    {"thousand shares", 1'000},
    {"thousands of shares", 1'000},
    {"percent", 1},
    {"人", 1},
}};

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Text after "単位" (optionally followed by a colon) up to a closing bracket.
std::optional<std::string> unit_declaration(std::string_view text) {
  static constexpr std::string_view kKey = "単位";
  const auto at = text.find(kKey);
  if (at == std::string_view::npos) return std::nullopt;
  std::string_view rest = text.substr(at + kKey.size());
  const auto cps = utf8::decode(rest);
  std::size_t i = 0;
  while (i < cps.size() && (utf8::is_space(cps[i]) || cps[i] == U':' || cps[i] == 0xFF1A)) ++i;
  std::string out;
  for (; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (cp == U')' || cp == 0xFF09 || cp == U']' || cp == 0x3011 || cp == 0x300D) break;
    utf8::append(out, cp);
  }
  out = utf8::trim(out);
  if (out.empty()) return std::nullopt;
  return out;
}

}  // namespace

std::string_view to_string(UnitSource source) {
  switch (source) {
    case UnitSource::kLlm: return "llm";
    case UnitSource::kRule: return "rule";
    case UnitSource::kNone: return "none";
  }
  return "none";
}

std::optional<Decimal> unit_scale(std::string_view label) {
  std::string compact;
  for (char32_t cp : utf8::decode(utf8::collapse_whitespace(label))) utf8::append(compact, cp);
  for (const auto& m : kRuleMarkers) {
    if (compact == m.label) return Decimal(m.scale);
  }
  const std::string lowered = ascii_lower(compact);
  for (const auto& m : kLabelAliases) {
    if (lowered == m.label) return Decimal(m.scale);
  }
  return std::nullopt;
}

UnitInfo extract_unit_llm(std::string_view question, const LogicalTable& table, const LlmClient& client) {
  const LlmValueAnswer answer = ask_value(question, to_html(table), client);
  const std::string label = utf8::trim(answer.unit);
  if (label.empty()) return UnitInfo::none();
  UnitInfo info;
  info.unit_label = label;
  info.scale = unit_scale(label).value_or(Decimal(1));
  info.source = UnitSource::kLlm;
  return info;
}

UnitInfo extract_unit_rules(const LogicalTable& table) {
  for (const Cell& c : table.cells()) {
    const auto declared = unit_declaration(c.text);
    if (!declared) continue;
    for (const auto& m : kRuleMarkers) {
      if (declared->find(m.label) != std::string::npos) {
        return UnitInfo{std::string(m.label), Decimal(m.scale), UnitSource::kRule};
      }
    }
    return UnitInfo{*declared, unit_scale(*declared).value_or(Decimal(1)), UnitSource::kRule};
  }
  for (const auto& m : kRuleMarkers) {
    for (const Cell& c : table.cells()) {
      if (c.text.find(m.label) != std::string::npos) {
        return UnitInfo{std::string(m.label), Decimal(m.scale), UnitSource::kRule};
      }
    }
  }
  return UnitInfo::none();
}

UnitInfo extract_unit(std::string_view question, const LogicalTable& table, UnitStrategy strategy,
                      const LlmClient* client) {
  switch (strategy) {
    case UnitStrategy::kRule:
      return extract_unit_rules(table);
    case UnitStrategy::kLlm:
      if (client == nullptr) throw Error(ErrorCode::kLlmUnavailable, "unit extraction needs an LLM client");
      return extract_unit_llm(question, table, *client);
    case UnitStrategy::kAuto:
      if (client != nullptr) {
        try {
          return extract_unit_llm(question, table, *client);
        } catch (const Error&) {
        }
      }
      return extract_unit_rules(table);
  }
  return extract_unit_rules(table);
}

Decimal parse_numeric(std::string_view raw) {
  std::vector<char32_t> cps;
  for (char32_t cp : utf8::decode(raw)) {
    cp = utf8::fold_width(cp);
    if (utf8::is_space(cp) || cp == U',') continue;
    cps.push_back(cp);
  }
  const auto fail = [&] { return Error(ErrorCode::kNotNumeric, "'" + std::string(raw) + "' is not a number"); };
  if (cps.empty()) throw fail();

  bool negative = false;
  std::size_t begin = 0;
  std::size_t end = cps.size();
  if (cps[end - 1] == U'%') --end;
  if (end > begin && (cps[begin] == 0x25B3 || cps[begin] == 0x25B2 || cps[begin] == U'-' || cps[begin] == 0x2212)) {
    negative = true;
    ++begin;
  } else if (end > begin && cps[begin] == U'+') {
    ++begin;
  } else if (end - begin >= 2 && cps[begin] == U'(' && cps[end - 1] == U')') {
    negative = true;
    ++begin;
    --end;
  }
  std::string ascii;
  for (std::size_t i = begin; i < end; ++i) {
    const char32_t cp = cps[i];
    if (!((cp >= U'0' && cp <= U'9') || cp == U'.')) throw fail();
    ascii.push_back(static_cast<char>(cp));
  }
  if (ascii.find_first_of("0123456789") == std::string::npos) throw fail();
  const Decimal value = Decimal::parse(ascii);
  return negative ? -value : value;
}

NormalizedValue normalize_value(std::string_view raw, const UnitInfo& unit) {
  const Decimal numeric = parse_numeric(raw) * unit.scale;
  return NormalizedValue{numeric.to_string(), numeric};
}

}  // namespace tqa
