#include "ilcite/prefetcher.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ilcite/text.hpp"

namespace ilcite {

void Bm25Params::validate() const {
  if (!(k1 > 0.0)) throw std::invalid_argument("bm25 k1 must be positive");
  if (!(b >= 0.0 && b <= 1.0)) throw std::invalid_argument("bm25 b must lie in [0, 1]");
  if (!(delta >= 0.0)) throw std::invalid_argument("bm25 delta must be non-negative");
}

double idf(std::size_t doc_count, std::size_t doc_freq) {
  const auto n = static_cast<double>(doc_freq);
  const auto total = static_cast<double>(doc_count);
  return std::log((total - n + 0.5) / (n + 0.5) + 1.0);
}

double idf(const IndexStats& stats, const std::string& token) {
  const auto it = stats.doc_freq.find(token);
  return idf(stats.doc_count, it == stats.doc_freq.end() ? 0 : it->second);
}

double term_saturation(double tf, double span_length, double avg_span_length, const Bm25Params& params) {
  if (tf <= 0.0) return 0.0;
  const double length_ratio = avg_span_length > 0.0 ? span_length / avg_span_length : 1.0;
  return tf * (params.k1 + 1.0) / (tf + params.k1 * (1.0 - params.b + params.b * length_ratio));
}

namespace {

enum class Scorer { Okapi, Plus };

double score_span(const EvidenceDatabase& db, const Bm25Params& params,
                  std::span<const std::string> query_tokens, std::span<const double> idfs, SpanId span,
                  Scorer scorer) {
  const auto& stats = db.stats();
  const auto length = static_cast<double>(stats.span_lengths[span]);
  double score = 0.0;
  for (std::size_t i = 0; i < query_tokens.size(); ++i) {
    const auto tf = static_cast<double>(db.term_frequency(span, query_tokens[i]));
    const double sat = term_saturation(tf, length, stats.avg_span_tokens, params);
    score += scorer == Scorer::Okapi ? idfs[i] * sat : idfs[i] * (sat + params.delta);
  }
  return score;
}

std::vector<double> query_idfs(const IndexStats& stats, std::span<const std::string> tokens) {
  std::vector<double> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(idf(stats, t));
  return out;
}

struct Scored {
  SpanId span;
  double score;
};

bool better(const Scored& a, const Scored& b) {
  return a.score != b.score ? a.score > b.score : a.span < b.span;
}

std::vector<SpanId> top_ids(std::vector<Scored> scored, std::size_t k) {
  const auto take = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), better);
  std::vector<SpanId> ids;
  for (std::size_t i = 0; i < take; ++i) ids.push_back(scored[i].span);
  return ids;
}

CandidateSet assemble(const EvidenceDatabase& db, const PrefetchConfig& config, std::string_view query,
                      std::vector<std::string> tokens, std::span<const SpanId> okapi_top,
                      std::span<const SpanId> plus_top, std::span<const double> idfs) {
  std::vector<SpanId> ids(okapi_top.begin(), okapi_top.end());
  ids.insert(ids.end(), plus_top.begin(), plus_top.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  CandidateSet set;
  set.query = std::string(query);
  set.per_scorer_cutoff = config.per_scorer_cutoff;
  for (auto id : ids) {
    set.entries.push_back({id, score_span(db, config.bm25, tokens, idfs, id, Scorer::Okapi),
                           score_span(db, config.bm25, tokens, idfs, id, Scorer::Plus)});
  }
  set.query_tokens = std::move(tokens);
  return set;
}

}  // namespace

double okapi_score(const EvidenceDatabase& db, const Bm25Params& params,
                   std::span<const std::string> query_tokens, SpanId span) {
  const auto idfs = query_idfs(db.stats(), query_tokens);
  return score_span(db, params, query_tokens, idfs, span, Scorer::Okapi);
}

double plus_score(const EvidenceDatabase& db, const Bm25Params& params,
                  std::span<const std::string> query_tokens, SpanId span) {
  const auto idfs = query_idfs(db.stats(), query_tokens);
  return score_span(db, params, query_tokens, idfs, span, Scorer::Plus);
}

CandidateSet prefetch_full_scan(const EvidenceDatabase& db, const PrefetchConfig& config,
                                std::string_view query) {
  config.bm25.validate();
  auto tokens = tokenize(query);
  if (db.empty() || tokens.empty()) {
    CandidateSet empty;
    empty.query = std::string(query);
    empty.query_tokens = std::move(tokens);
    empty.per_scorer_cutoff = config.per_scorer_cutoff;
    return empty;
  }
  const auto idfs = query_idfs(db.stats(), tokens);
  std::vector<Scored> okapi;
  std::vector<Scored> plus;
  for (SpanId id = 0; id < db.size(); ++id) {
    okapi.push_back({id, score_span(db, config.bm25, tokens, idfs, id, Scorer::Okapi)});
    plus.push_back({id, score_span(db, config.bm25, tokens, idfs, id, Scorer::Plus)});
  }
  const auto okapi_top = top_ids(std::move(okapi), config.per_scorer_cutoff);
  const auto plus_top = top_ids(std::move(plus), config.per_scorer_cutoff);
  return assemble(db, config, query, std::move(tokens), okapi_top, plus_top, idfs);
}

CandidateSet prefetch(const EvidenceDatabase& db, const PrefetchConfig& config, std::string_view query) {
  config.bm25.validate();
  auto tokens = tokenize(query);
  if (db.empty() || tokens.empty()) return prefetch_full_scan(db, config, query);

  const auto idfs = query_idfs(db.stats(), tokens);
  std::vector<SpanId> matched;
  for (const auto& t : tokens) {
    for (const auto& p : db.postings(t)) matched.push_back(p.span);
  }
  std::sort(matched.begin(), matched.end());
  matched.erase(std::unique(matched.begin(), matched.end()), matched.end());

  // Spans sharing no token with the query all score the same; only the
  // lowest ids among them can reach a top list.
  const std::size_t k = config.per_scorer_cutoff;
  std::vector<SpanId> unmatched;
  for (SpanId id = 0, m = 0; id < db.size() && unmatched.size() < k; ++id) {
    while (m < matched.size() && matched[m] < id) ++m;
    if (m < matched.size() && matched[m] == id) continue;
    unmatched.push_back(id);
  }

  auto top_for = [&](Scorer scorer) {
    std::vector<Scored> scored;
    scored.reserve(matched.size() + unmatched.size());
    for (auto id : matched) scored.push_back({id, score_span(db, config.bm25, tokens, idfs, id, scorer)});
    if (!unmatched.empty()) {
      const double baseline = score_span(db, config.bm25, tokens, idfs, unmatched.front(), scorer);
      for (auto id : unmatched) scored.push_back({id, baseline});
    }
    return top_ids(std::move(scored), k);
  };
  const auto okapi_top = top_for(Scorer::Okapi);
  const auto plus_top = top_for(Scorer::Plus);
  return assemble(db, config, query, std::move(tokens), okapi_top, plus_top, idfs);
}

}  // namespace ilcite
