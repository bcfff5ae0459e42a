#pragma once

// Sentence embeddings behind a pluggable provider, and cosine scoring.

#include <cstddef>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tqa {

struct Embedding {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  friend bool operator==(const Embedding&, const Embedding&) = default;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dim() const = 0;

  /// Must be deterministic for a fixed provider and safe to call
  /// concurrently. Returns one embedding per input text.
  virtual std::vector<Embedding> embed_batch(std::span<const std::string> texts) const = 0;
};

/// Signed-hash character-bigram embedding. Needs no model; used as the
/// default provider and in tests.
Embedding hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultDim = 4096;
  static constexpr std::uint64_t kDefaultSeed = 0x5eed;

  explicit HashEmbeddingProvider(std::size_t dim = kDefaultDim, std::uint64_t seed = kDefaultSeed);

  std::string name() const override;
  std::size_t dim() const override { return dim_; }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;

 private:
  std::size_t dim_;
  std::uint64_t seed_;
};

/// Client for a remote embedding server.
///
/// POST {endpoint}/embed with {"texts":[...]} and expects
/// {"dim":N,"vectors":[[...],...]}. Requests are split into batches of at
/// most kMaxBatch texts. Connection failures and non-200 answers raise
/// ProviderUnavailable; vectors of the wrong length raise DimensionMismatch.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kMaxBatch = 64;

  /// `endpoint` is a base URL such as "http://127.0.0.1:8080". The
  /// dimension is discovered lazily from the first response unless given.
  explicit HttpEmbeddingProvider(std::string endpoint, std::size_t expected_dim = 0);

  std::string name() const override;
  std::size_t dim() const override;
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;

 private:
  std::string endpoint_;
  mutable std::mutex mu_;
  mutable std::size_t dim_;
};

/// Thread-safe LRU cache in front of another provider, keyed by
/// (provider name, exact text).
class CachingEmbeddingProvider final : public EmbeddingProvider {
 public:
  static constexpr std::size_t kDefaultCapacity = 100'000;

  CachingEmbeddingProvider(std::shared_ptr<const EmbeddingProvider> inner, std::size_t capacity = kDefaultCapacity);

  std::string name() const override { return inner_->name(); }
  std::size_t dim() const override { return inner_->dim(); }
  std::vector<Embedding> embed_batch(std::span<const std::string> texts) const override;

  std::size_t size() const;
  std::size_t hits() const;
  std::size_t misses() const;

 private:
  using Key = std::string;
  struct Entry {
    Key key;
    Embedding value;
  };

  std::shared_ptr<const EmbeddingProvider> inner_;
  std::size_t capacity_;
  mutable std::mutex mu_;
  mutable std::list<Entry> lru_;
  mutable std::unordered_map<Key, std::list<Entry>::iterator> index_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

/// Embeds one text, checking the vector length against the provider's
/// declared dimension. Throws DimensionMismatch.
Embedding embed(std::string_view text, const EmbeddingProvider& provider);

/// Cosine similarity in [-1, 1]; 0 when either side is the zero vector.
/// Throws DimensionMismatch.
double vector_score(const Embedding& q, const Embedding& d);

/// Provider chosen from the environment: EMBED_ENDPOINT set selects the HTTP
/// provider, otherwise the hash provider. Wrapped in the LRU cache.
std::shared_ptr<const EmbeddingProvider> make_embedding_provider(const std::string& endpoint,
                                                                 std::size_t cache_size);
std::shared_ptr<const EmbeddingProvider> provider_from_env(std::size_t cache_size);

}  // namespace tqa
