#pragma once

// Tokenization and TF-IDF cosine scoring.

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tqa {

using TokenSequence = std::vector<std::string>;

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual TokenSequence tokenize(std::string_view text) const = 0;
};

/// Deterministic segmenter that splits at Unicode script boundaries.
///
/// Han, Hiragana and Katakana runs each become one token; runs of Latin
/// letters and digits are split on whitespace and punctuation. Full-width
/// ASCII is folded to half-width and ASCII letters are lowercased. Symbols
/// and punctuation never appear in the output.
class ScriptSegmenter final : public Tokenizer {
 public:
  TokenSequence tokenize(std::string_view text) const override;
};

/// Runs an external morphological analyzer as a long-lived child process.
/// One line of text is written per call; the analyzer must answer with one
/// line of whitespace-separated tokens (e.g. `mecab -Owakati`). Calls are
/// serialized internally.
class ExternalTokenizer final : public Tokenizer {
 public:
  explicit ExternalTokenizer(std::vector<std::string> argv);
  ~ExternalTokenizer() override;

  ExternalTokenizer(const ExternalTokenizer&) = delete;
  ExternalTokenizer& operator=(const ExternalTokenizer&) = delete;

  TokenSequence tokenize(std::string_view text) const override;

 private:
  struct Process;
  std::unique_ptr<Process> proc_;
  mutable std::mutex mu_;
};

/// Convenience: the default segmenter.
TokenSequence tokenize(std::string_view text);

/// Smoothed TF-IDF weights fitted on a small corpus.
class TfidfModel {
 public:
  const std::unordered_map<std::string, std::size_t>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& idf() const { return idf_; }
  std::size_t n_docs() const { return n_docs_; }

  /// Idf of `token`, or 0 when out of vocabulary.
  double idf_of(std::string_view token) const;

  /// Sparse L2-normalized TF-IDF vector as (vocabulary index, weight) pairs
  /// sorted by index. Out-of-vocabulary tokens are ignored.
  std::vector<std::pair<std::size_t, double>> vectorize(const TokenSequence& tokens) const;

 private:
  friend TfidfModel fit_tfidf(std::span<const TokenSequence> corpus);

  std::unordered_map<std::string, std::size_t> vocabulary_;
  std::vector<double> idf_;
  std::size_t n_docs_ = 0;
};

/// idf(t) = ln((1 + n) / (1 + df(t))) + 1. Throws EmptyCorpus.
TfidfModel fit_tfidf(std::span<const TokenSequence> corpus);

/// Cosine of the two TF-IDF vectors, in [0, 1]; 0 when either is all-zero.
double tfidf_score(const TokenSequence& q, const TokenSequence& d, const TfidfModel& model);

double sparse_cosine(const std::vector<std::pair<std::size_t, double>>& a,
                     const std::vector<std::pair<std::size_t, double>>& b);

}  // namespace tqa
