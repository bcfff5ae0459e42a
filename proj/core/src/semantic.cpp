#include "tqa/semantic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "tqa/error.hpp"
#include "tqa/utf8.hpp"
#include "url.hpp"

namespace tqa {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

Embedding hash_embed(std::string_view text, std::size_t dim, std::uint64_t seed) {
  Embedding e;
  e.values.assign(dim, 0.0);
  const auto cps = utf8::decode(text);
  for (std::size_t i = 0; i + 1 < cps.size(); ++i) {
    std::string bigram;
    utf8::append(bigram, cps[i]);
    utf8::append(bigram, cps[i + 1]);
    const std::uint64_t h = splitmix64(fnv1a(bigram) ^ splitmix64(seed));
    const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
    e.values[(h & 0x7fffffffffffffffULL) % dim] += sign;
  }
  double norm_sq = 0.0;
  for (double v : e.values) norm_sq += v * v;
  if (norm_sq > 0.0) {
    const double norm = std::sqrt(norm_sq);
    for (double& v : e.values) v /= norm;
  }
  return e;
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {
  if (dim_ < 8) throw Error(ErrorCode::kConfigError, "hash embedding dimension must be at least 8");
}

std::string HashEmbeddingProvider::name() const {
  return "hash-bigram-" + std::to_string(dim_) + "-" + std::to_string(seed_);
}

std::vector<Embedding> HashEmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(hash_embed(t, dim_, seed_));
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string endpoint, std::size_t expected_dim)
    : endpoint_(std::move(endpoint)), dim_(expected_dim) {}

std::string HttpEmbeddingProvider::name() const { return "http:" + endpoint_; }

std::size_t HttpEmbeddingProvider::dim() const {
  std::lock_guard lock(mu_);
  return dim_;
}

std::vector<Embedding> HttpEmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  const Url url = parse_url(endpoint_);
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t start = 0; start < texts.size(); start += kMaxBatch) {
    const std::size_t count = std::min(kMaxBatch, texts.size() - start);
    nlohmann::json body;
    body["texts"] = std::vector<std::string>(texts.begin() + start, texts.begin() + start + count);

    httplib::Client client(url.scheme_host_port);
    client.set_connection_timeout(5);
    client.set_read_timeout(60);
    const auto res = client.Post(url.path + "/embed", body.dump(), "application/json");
    if (!res) {
      throw Error(ErrorCode::kProviderUnavailable,
                  endpoint_ + " unreachable (" + httplib::to_string(res.error()) + ")");
    }
    if (res->status != 200) {
      throw Error(ErrorCode::kProviderUnavailable, endpoint_ + " answered HTTP " + std::to_string(res->status));
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kProviderUnavailable, std::string("unparseable /embed reply: ") + e.what());
    }
    if (!reply.contains("vectors") || !reply["vectors"].is_array() || reply["vectors"].size() != count) {
      throw Error(ErrorCode::kProviderUnavailable, "/embed reply lacks one vector per text");
    }
    std::size_t reply_dim = reply.value("dim", std::size_t{0});
    {
      std::lock_guard lock(mu_);
      if (dim_ == 0) dim_ = reply_dim;
      if (reply_dim != 0 && reply_dim != dim_) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "server reports dim " + std::to_string(reply_dim) + ", expected " + std::to_string(dim_));
      }
      reply_dim = dim_;
    }
    for (const auto& v : reply["vectors"]) {
      Embedding e;
      try {
        e.values = v.get<std::vector<double>>();
      } catch (const nlohmann::json::exception& ex) {
        throw Error(ErrorCode::kProviderUnavailable, std::string("bad vector in /embed reply: ") + ex.what());
      }
      if (reply_dim != 0 && e.dim() != reply_dim) {
        throw Error(ErrorCode::kDimensionMismatch,
                    "vector of length " + std::to_string(e.dim()) + ", expected " + std::to_string(reply_dim));
      }
      for (double x : e.values) {
        if (!std::isfinite(x)) throw Error(ErrorCode::kProviderUnavailable, "non-finite value in /embed reply");
      }
      out.push_back(std::move(e));
    }
  }
  return out;
}

CachingEmbeddingProvider::CachingEmbeddingProvider(std::shared_ptr<const EmbeddingProvider> inner,
                                                   std::size_t capacity)
    : inner_(std::move(inner)), capacity_(capacity) {}

std::vector<Embedding> CachingEmbeddingProvider::embed_batch(std::span<const std::string> texts) const {
  const std::string prefix = inner_->name() + '\x1f';
  std::vector<Embedding> out(texts.size());
  std::vector<std::size_t> missing;
  {
    std::lock_guard lock(mu_);
    for (std::size_t i = 0; i < texts.size(); ++i) {
      const auto it = index_.find(prefix + texts[i]);
      if (it == index_.end()) {
        missing.push_back(i);
        ++misses_;
        continue;
      }
      lru_.splice(lru_.begin(), lru_, it->second);
      out[i] = it->second->value;
      ++hits_;
    }
  }
  if (missing.empty()) return out;

  std::vector<std::string> batch;
  batch.reserve(missing.size());
  for (std::size_t i : missing) batch.push_back(texts[i]);
  auto fresh = inner_->embed_batch(batch);

  std::lock_guard lock(mu_);
  for (std::size_t k = 0; k < missing.size(); ++k) {
    out[missing[k]] = fresh[k];
    if (capacity_ == 0) continue;
    Key key = prefix + batch[k];
    if (const auto it = index_.find(key); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      continue;
    }
    lru_.push_front(Entry{key, std::move(fresh[k])});
    index_.emplace(std::move(key), lru_.begin());
    if (lru_.size() > capacity_) {
      index_.erase(lru_.back().key);
      lru_.pop_back();
    }
  }
  return out;
}

std::size_t CachingEmbeddingProvider::size() const {
  std::lock_guard lock(mu_);
  return lru_.size();
}

std::size_t CachingEmbeddingProvider::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t CachingEmbeddingProvider::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

Embedding embed(std::string_view text, const EmbeddingProvider& provider) {
  const std::string owned(text);
  auto result = provider.embed_batch(std::span<const std::string>(&owned, 1));
  if (result.size() != 1) throw Error(ErrorCode::kProviderUnavailable, "provider returned no vector");
  const std::size_t expected = provider.dim();
  if (expected != 0 && result.front().dim() != expected) {
    throw Error(ErrorCode::kDimensionMismatch, "provider " + provider.name() + " returned length " +
                                                   std::to_string(result.front().dim()) + ", declared " +
                                                   std::to_string(expected));
  }
  return std::move(result.front());
}

double vector_score(const Embedding& q, const Embedding& d) {
  if (q.dim() != d.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "cannot compare vectors of length " + std::to_string(q.dim()) + " and " + std::to_string(d.dim()));
  }
  double dot = 0.0;
  double nq = 0.0;
  double nd = 0.0;
  for (std::size_t i = 0; i < q.dim(); ++i) {
    dot += q.values[i] * d.values[i];
    nq += q.values[i] * q.values[i];
    nd += d.values[i] * d.values[i];
  }
  if (nq == 0.0 || nd == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(nq) * std::sqrt(nd)), -1.0, 1.0);
}

std::shared_ptr<const EmbeddingProvider> make_embedding_provider(const std::string& endpoint,
                                                                 std::size_t cache_size) {
  std::shared_ptr<const EmbeddingProvider> inner;
  if (endpoint.empty()) {
    inner = std::make_shared<HashEmbeddingProvider>();
  } else {
    inner = std::make_shared<HttpEmbeddingProvider>(endpoint);
  }
  return std::make_shared<CachingEmbeddingProvider>(std::move(inner), cache_size);
}

std::shared_ptr<const EmbeddingProvider> provider_from_env(std::size_t cache_size) {
  const char* endpoint = std::getenv("EMBED_ENDPOINT");
  return make_embedding_provider(endpoint != nullptr ? endpoint : "", cache_size);
}

}  // namespace tqa
