#pragma once

#include <cmath>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <semaphore>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ilcite/text.hpp"

namespace ilcite {

inline constexpr Eigen::Index kEmbeddingDim = 768;

template <typename Scalar>
using EmbeddingT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Embedding = EmbeddingT<float>;

// Cosine of the angle between two vectors; 0 when either has zero norm.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar denom = a.norm() * b.norm();
  if (denom == Scalar(0)) return Scalar(0);
  return a.dot(b) / denom;
}

// Cosine of every row of `rows` against `query`. Zero-norm rows score 0.
template <typename DerivedM, typename DerivedQ>
EmbeddingT<typename DerivedM::Scalar> cosine_similarities(const Eigen::MatrixBase<DerivedM>& rows,
                                                          const Eigen::MatrixBase<DerivedQ>& query) {
  using Scalar = typename DerivedM::Scalar;
  const Scalar query_norm = query.norm();
  EmbeddingT<Scalar> dots = rows * query;
  const EmbeddingT<Scalar> norms = rows.rowwise().norm() * query_norm;
  for (Eigen::Index i = 0; i < dots.size(); ++i) {
    dots[i] = norms[i] == Scalar(0) ? Scalar(0) : dots[i] / norms[i];
  }
  return dots;
}

class EmbeddingUnavailable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Source of sentence embeddings. Implementations are safe to call from
// several threads at once.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // One vector per input text, in input order. Throws EmbeddingUnavailable.
  virtual std::vector<Embedding> embed(std::span<const std::string> texts) = 0;
  virtual std::string describe() const = 0;
};

// Cosine similarity of two texts under `provider`.
double semantic_score(EmbeddingProvider& provider, const std::string& query, const std::string& span);

// Cache key: SHA-256 of the normalized text.
Sha256Digest embedding_key(std::string_view text);

// In-memory embedding cache with the line-delimited and binary file forms.
//   JSONL:  {"key": "<64 hex>", "vector": [...]}  (or {"text": ..., "vector": ...})
//   binary: u64 LE count, then per entry 32-byte key + dim f32 LE values
class EmbeddingCache {
 public:
  explicit EmbeddingCache(Eigen::Index dim = kEmbeddingDim) : dim_(dim) {}

  static EmbeddingCache load(const std::filesystem::path& path, Eigen::Index dim = kEmbeddingDim);

  // Returns false when the key already holds a vector.
  bool insert(const Sha256Digest& key, Embedding vector);
  bool insert_text(std::string_view text, Embedding vector) { return insert(embedding_key(text), std::move(vector)); }
  const Embedding* find(std::string_view text) const;
  std::size_t size() const { return entries_.size(); }
  Eigen::Index dim() const { return dim_; }

  void save_jsonl(const std::filesystem::path& path) const;
  void save_binary(const std::filesystem::path& path) const;

 private:
  void check(const Embedding& v) const;

  Eigen::Index dim_;
  std::map<Sha256Digest, Embedding> entries_;
};

class CachedEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit CachedEmbeddingProvider(EmbeddingCache cache) : cache_(std::move(cache)) {}
  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  std::string describe() const override { return "cache"; }

 private:
  EmbeddingCache cache_;
};

// Client for POST /embed {"texts": [...]} -> {"vectors": [[...], ...]}.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string base_url, std::ptrdiff_t max_in_flight = 4,
                        Eigen::Index dim = kEmbeddingDim, int timeout_seconds = 30);
  std::vector<Embedding> embed(std::span<const std::string> texts) override;
  std::string describe() const override { return "http:" + base_url_; }

 private:
  std::string base_url_;
  Eigen::Index dim_;
  int timeout_seconds_;
  std::counting_semaphore<1024> in_flight_;
};

}  // namespace ilcite
