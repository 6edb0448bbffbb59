#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ilcite/evidence_db.hpp"
#include "ilcite/prefetcher.hpp"
#include "ilcite/reranker.hpp"

namespace ilcite {

struct PaperAggregate {
  std::string paper_id;
  std::size_t best_rank = 0;       // p_r: lowest evidence rank citing the paper
  std::uint64_t total_support = 0;  // p_s: summed support over candidate evidence
  int recency = kUnknownYear;      // rec_p: publication year, 0 when unknown
  SpanId best_evidence = 0;        // span achieving best_rank
  std::vector<SpanId> evidence;    // every candidate span citing the paper, by rank

  bool operator==(const PaperAggregate&) const = default;
};

std::vector<PaperAggregate> aggregate(const RankedEvidence& ranked, const EvidenceDatabase& db);

// Precedence: best_rank ascending, total_support descending, recency
// descending (unknown years last), paper_id ascending.
bool ranks_before(const PaperAggregate& a, const PaperAggregate& b);
std::vector<PaperAggregate> rank_papers(std::vector<PaperAggregate> aggregates);

struct Recommendation {
  std::size_t rank = 0;
  PaperMetadata paper;
  SpanId evidence_span = 0;
  std::string evidence;
  std::size_t best_rank = 0;
  std::uint64_t total_support = 0;
  std::map<std::string, double> scores;
  std::map<std::string, std::size_t> component_ranks;
  std::vector<SpanId> supporting_spans;
};

struct RecommendationResult {
  std::string query;
  Route route = Route::Lexical;
  std::size_t candidates = 0;
  std::vector<Recommendation> results;
};

struct RecommenderConfig {
  PrefetchConfig prefetch;
  RouterConfig router;
};

inline constexpr std::size_t kAllResults = std::numeric_limits<std::size_t>::max();

// prefetch -> rerank -> aggregate -> rank_papers, truncated to k.
RecommendationResult recommend(const EvidenceDatabase& db, const RecommenderConfig& config,
                               std::string_view query, std::size_t k, EmbeddingProvider* provider);

// {query, route, results:[{rank, paper:{id,title,year,venue,authors}, evidence,
//   span_id, p_r, p_s, scores, ranks, supporting_spans}]}
nlohmann::json to_json(const RecommendationResult& result);

}  // namespace ilcite
