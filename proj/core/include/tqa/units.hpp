#pragma once

// Unit extraction for answer cells and normalization of raw cell text into
// the final numeric answer string.

#include <optional>
#include <string>
#include <string_view>

#include "tqa/decimal.hpp"
#include "tqa/llm.hpp"
#include "tqa/table_grid.hpp"

namespace tqa {

enum class UnitSource { kLlm, kRule, kNone };

std::string_view to_string(UnitSource source);

struct UnitInfo {
  std::string unit_label;
  Decimal scale = 1;
  UnitSource source = UnitSource::kNone;

  static UnitInfo none() { return {}; }
};

/// Scale implied by a unit label, e.g. "千円" -> 1000, "百万円" -> 1000000,
/// "%" -> 1. Also accepts a few English spellings. nullopt if unknown.
std::optional<Decimal> unit_scale(std::string_view label);

/// Asks the LLM for value and unit using the fixed value prompt with the
/// table rendered as minimal cleaned HTML. An unknown unit keeps its label
/// with scale 1. Throws LlmUnavailable or MalformedLlmResponse.
UnitInfo extract_unit_llm(std::string_view question, const LogicalTable& table, const LlmClient& client);

/// Offline fallback. "(単位：X)" markers win; otherwise the first of
/// 百万円, 千円, 億円, 千株, 百株, 円, 株, % found in any cell text.
UnitInfo extract_unit_rules(const LogicalTable& table);

enum class UnitStrategy { kLlm, kRule, kAuto };

/// kAuto: LLM when a client is given, falling back to rules on any LLM error.
UnitInfo extract_unit(std::string_view question, const LogicalTable& table, UnitStrategy strategy,
                      const LlmClient* client);

/// Parses financial cell notation: thousands separators, full-width digits,
/// leading △/▲/minus or (...) wrapping for negatives, one trailing %.
/// Throws NotNumeric.
Decimal parse_numeric(std::string_view raw);

struct NormalizedValue {
  std::string canonical;
  Decimal numeric;
};

NormalizedValue normalize_value(std::string_view raw, const UnitInfo& unit);

}  // namespace tqa
