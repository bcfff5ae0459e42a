#pragma once

// Generated question/table suites with independently computed gold answers.

#include <cstdint>
#include <string>
#include <vector>

#include "tqa/eval.hpp"
#include "tqa/semantic.hpp"

namespace tqa::testing {

/// Unambiguous items: every question names exactly one row label and one
/// column label, each occurring once in its table. Units vary between
/// 円, 千円, 百万円 and %, declared in the corner cell or implied by a
/// trailing % on the values. Deterministic for a given seed.
std::vector<QARecord> synthetic_suite(std::size_t n = 50, std::uint64_t seed = 7);

/// Canonical answer computed by string shifting: `int_digits`.`frac_digits`
/// times 10^zeros, optionally negated.
std::string shifted_decimal(const std::string& int_digits, const std::string& frac_digits, std::size_t zeros,
                            bool negative);

/// English items where a decoy row label differs from the true label only
/// in ASCII case, so both get identical TF-IDF scores and the true label
/// wins the tie on anchor order. Pair with DecoyEmbeddingProvider: every
/// alpha below 1 then prefers the decoy.
std::vector<QARecord> decoy_suite(std::size_t n, std::uint64_t seed);

/// Puts upper-case ASCII texts (the decoys) and questions (texts ending in
/// '?') on one axis and everything else on an orthogonal one.
class DecoyEmbeddingProvider final : public EmbeddingProvider {
 public:
  std::string name() const override { return "decoy"; }
  std::size_t dim() const override { return 2; }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;
};

std::string to_jsonl(const std::vector<QARecord>& records);

}  // namespace tqa::testing
