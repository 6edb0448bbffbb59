#include "ilcite/recommender.hpp"

#include <algorithm>
#include <unordered_map>

namespace ilcite {

std::vector<PaperAggregate> aggregate(const RankedEvidence& ranked, const EvidenceDatabase& db) {
  std::unordered_map<std::string, std::size_t> slot;
  std::vector<PaperAggregate> out;
  for (const auto& entry : ranked.entries) {
    for (const auto& c : db.record(entry.span).citations) {
      auto [it, inserted] = slot.try_emplace(c.paper_id, out.size());
      if (inserted) {
        PaperAggregate agg;
        agg.paper_id = c.paper_id;
        agg.best_rank = entry.rank;
        agg.best_evidence = entry.span;
        const auto* meta = db.paper(c.paper_id);
        agg.recency = meta ? meta->year : kUnknownYear;
        out.push_back(std::move(agg));
      }
      auto& agg = out[it->second];
      if (entry.rank < agg.best_rank) {
        agg.best_rank = entry.rank;
        agg.best_evidence = entry.span;
      }
      agg.total_support += c.support;
      agg.evidence.push_back(entry.span);
    }
  }
  // Entries normally arrive in rank order; keep the evidence lists sorted anyway.
  std::unordered_map<SpanId, std::size_t> rank_of;
  for (const auto& e : ranked.entries) rank_of[e.span] = e.rank;
  for (auto& agg : out) {
    std::sort(agg.evidence.begin(), agg.evidence.end(),
              [&](SpanId a, SpanId b) { return rank_of[a] < rank_of[b]; });
  }
  return out;
}

bool ranks_before(const PaperAggregate& a, const PaperAggregate& b) {
  if (a.best_rank != b.best_rank) return a.best_rank < b.best_rank;
  if (a.total_support != b.total_support) return a.total_support > b.total_support;
  if (a.recency != b.recency) return a.recency > b.recency;
  return a.paper_id < b.paper_id;
}

std::vector<PaperAggregate> rank_papers(std::vector<PaperAggregate> aggregates) {
  std::sort(aggregates.begin(), aggregates.end(), ranks_before);
  return aggregates;
}

RecommendationResult recommend(const EvidenceDatabase& db, const RecommenderConfig& config,
                               std::string_view query, std::size_t k, EmbeddingProvider* provider) {
  RecommendationResult result;
  result.query = std::string(query);
  const auto candidates = prefetch(db, config.prefetch, query);
  const auto ranked = rerank(db, candidates, config.router, provider);
  result.route = ranked.route;
  result.candidates = candidates.size();
  if (k == 0) return result;

  std::unordered_map<SpanId, const RankedEntry*> by_span;
  for (const auto& e : ranked.entries) by_span[e.span] = &e;

  auto papers = rank_papers(aggregate(ranked, db));
  const auto n = std::min(k, papers.size());
  result.results.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& agg = papers[i];
    Recommendation rec;
    rec.rank = i + 1;
    if (const auto* meta = db.paper(agg.paper_id)) {
      rec.paper = *meta;
    } else {
      rec.paper.paper_id = agg.paper_id;
    }
    rec.evidence_span = agg.best_evidence;
    rec.evidence = db.record(agg.best_evidence).surface_text;
    rec.best_rank = agg.best_rank;
    rec.total_support = agg.total_support;
    const auto* entry = by_span.at(agg.best_evidence);
    rec.scores = entry->component_scores;
    rec.component_ranks = entry->component_ranks;
    rec.supporting_spans = std::move(agg.evidence);
    result.results.push_back(std::move(rec));
  }
  return result;
}

nlohmann::json to_json(const RecommendationResult& result) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& r : result.results) {
    results.push_back({
        {"rank", r.rank},
        {"paper",
         {{"id", r.paper.paper_id},
          {"title", r.paper.title},
          {"year", r.paper.year},
          {"venue", r.paper.venue},
          {"authors", r.paper.authors}}},
        {"evidence", r.evidence},
        {"span_id", r.evidence_span},
        {"p_r", r.best_rank},
        {"p_s", r.total_support},
        {"scores", r.scores},
        {"ranks", r.component_ranks},
        {"supporting_spans", r.supporting_spans},
    });
  }
  return {{"query", result.query},
          {"route", to_string(result.route)},
          {"candidates", result.candidates},
          {"results", std::move(results)}};
}

}  // namespace ilcite
