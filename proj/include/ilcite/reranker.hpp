#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ilcite/embedding.hpp"
#include "ilcite/evidence_db.hpp"
#include "ilcite/prefetcher.hpp"

namespace ilcite {

enum class Route { Lexical, Semantic, LexicalFallback };

// Candidate-ranking strategies. `Conditional` is the production default; the
// rest exist for ablations.
enum class RankingStrategy {
  Okapi,            // Okapi rank alone
  Plus,             // BM25Plus rank alone
  Semantic,         // embedding cosine rank alone
  LexicalEnsemble,  // Okapi + BM25Plus for every query
  OkapiSemantic,    // Okapi + semantic for every query
  PlusSemantic,     // BM25Plus + semantic for every query
  NaiveEnsemble,    // Okapi + BM25Plus + semantic for every query
  Conditional,      // LexicalEnsemble up to the length threshold, PlusSemantic above it
};

enum class FusionMethod { RankSum, ReciprocalRank };

const char* to_string(Route route);
const char* to_string(RankingStrategy strategy);
const char* to_string(FusionMethod method);
RankingStrategy strategy_from_string(const std::string& name);
FusionMethod fusion_from_string(const std::string& name);

struct RouterConfig {
  std::size_t length_threshold_tokens = 50;
  RankingStrategy strategy = RankingStrategy::Conditional;
  FusionMethod fusion = FusionMethod::RankSum;
  double rrf_k = 60.0;
  // On embedding failure, rank lexically instead of failing the query.
  bool lexical_fallback = true;

  void validate() const;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

using RankMap = std::map<SpanId, std::size_t>;
using ScoreMap = std::map<SpanId, double>;

// 1-based ranks by descending score, ties to the lower span id.
RankMap rank_by_score(const ScoreMap& scores);

// Orders spans by the fused key (ascending rank sum, or descending reciprocal
// rank sum), then descending tiebreak score, then ascending span id. Every
// rank map must cover exactly the same spans.
std::vector<SpanId> fuse_ranks(std::span<const RankMap> ranks, const ScoreMap& tiebreak,
                               FusionMethod method = FusionMethod::RankSum, double rrf_k = 60.0);
std::vector<SpanId> fuse_ranks(const RankMap& rank_a, const RankMap& rank_b, const ScoreMap& tiebreak,
                               FusionMethod method = FusionMethod::RankSum, double rrf_k = 60.0);

struct RankedEntry {
  SpanId span = 0;
  std::size_t rank = 0;
  std::map<std::string, std::size_t> component_ranks;
  std::map<std::string, double> component_scores;
};

struct RankedEvidence {
  Route route = Route::Lexical;
  std::vector<RankedEntry> entries;  // ordered by rank
};

// Re-ranks the pre-fetched candidates. The provider is only consulted when
// the strategy needs semantic scores; it may be null otherwise. With
// lexical_fallback disabled an embedding failure propagates as
// EmbeddingUnavailable.
RankedEvidence rerank(const EvidenceDatabase& db, const CandidateSet& candidates, const RouterConfig& router,
                      EmbeddingProvider* provider);

}  // namespace ilcite
