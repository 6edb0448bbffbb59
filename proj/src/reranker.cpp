#include "ilcite/reranker.hpp"

#include <algorithm>
#include <tuple>

#include <spdlog/spdlog.h>

namespace ilcite {

const char* to_string(Route route) {
  switch (route) {
    case Route::Lexical: return "lexical";
    case Route::Semantic: return "semantic";
    case Route::LexicalFallback: return "lexical_fallback";
  }
  return "unknown";
}

namespace {

constexpr std::pair<RankingStrategy, const char*> kStrategyNames[] = {
    {RankingStrategy::Okapi, "okapi"},
    {RankingStrategy::Plus, "plus"},
    {RankingStrategy::Semantic, "semantic"},
    {RankingStrategy::LexicalEnsemble, "lexical-ensemble"},
    {RankingStrategy::OkapiSemantic, "okapi-semantic"},
    {RankingStrategy::PlusSemantic, "plus-semantic"},
    {RankingStrategy::NaiveEnsemble, "naive-ensemble"},
    {RankingStrategy::Conditional, "conditional"},
};

struct Components {
  bool okapi = false;
  bool plus = false;
  bool semantic = false;
};

Components components_for(RankingStrategy s) {
  switch (s) {
    case RankingStrategy::Okapi: return {true, false, false};
    case RankingStrategy::Plus: return {false, true, false};
    case RankingStrategy::Semantic: return {false, false, true};
    case RankingStrategy::LexicalEnsemble: return {true, true, false};
    case RankingStrategy::OkapiSemantic: return {true, false, true};
    case RankingStrategy::PlusSemantic: return {false, true, true};
    case RankingStrategy::NaiveEnsemble: return {true, true, true};
    case RankingStrategy::Conditional: break;
  }
  return {true, true, false};
}

}  // namespace

const char* to_string(RankingStrategy strategy) {
  for (const auto& [s, name] : kStrategyNames) {
    if (s == strategy) return name;
  }
  return "unknown";
}

RankingStrategy strategy_from_string(const std::string& name) {
  for (const auto& [s, n] : kStrategyNames) {
    if (name == n) return s;
  }
  throw std::invalid_argument("unknown ranking strategy: " + name);
}

const char* to_string(FusionMethod method) {
  return method == FusionMethod::RankSum ? "rank-sum" : "rrf";
}

FusionMethod fusion_from_string(const std::string& name) {
  if (name == "rank-sum") return FusionMethod::RankSum;
  if (name == "rrf") return FusionMethod::ReciprocalRank;
  throw std::invalid_argument("unknown fusion method: " + name);
}

void RouterConfig::validate() const {
  if (length_threshold_tokens == 0) throw std::invalid_argument("router length threshold must be positive");
  if (!(rrf_k > 0.0)) throw std::invalid_argument("rrf k must be positive");
}

RankMap rank_by_score(const ScoreMap& scores) {
  std::vector<std::pair<SpanId, double>> order(scores.begin(), scores.end());
  std::stable_sort(order.begin(), order.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  RankMap ranks;
  for (std::size_t i = 0; i < order.size(); ++i) ranks[order[i].first] = i + 1;
  return ranks;
}

std::vector<SpanId> fuse_ranks(std::span<const RankMap> ranks, const ScoreMap& tiebreak, FusionMethod method,
                               double rrf_k) {
  if (ranks.empty()) throw ContractViolation("fuse_ranks needs at least one rank map");
  const auto& first = ranks.front();
  for (const auto& r : ranks) {
    if (r.size() != first.size() ||
        !std::equal(r.begin(), r.end(), first.begin(),
                    [](const auto& a, const auto& b) { return a.first == b.first; })) {
      throw ContractViolation("fuse_ranks: rank maps cover different spans");
    }
  }

  struct Keyed {
    SpanId span;
    double key;  // smaller is better
    double tiebreak;
  };
  std::vector<Keyed> keyed;
  keyed.reserve(first.size());
  for (const auto& [span, _] : first) {
    double key = 0.0;
    for (const auto& r : ranks) {
      const auto rank = static_cast<double>(r.at(span));
      key += method == FusionMethod::RankSum ? rank : -1.0 / (rrf_k + rank);
    }
    const auto tb = tiebreak.find(span);
    keyed.push_back({span, key, tb == tiebreak.end() ? 0.0 : tb->second});
  }
  std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
    return std::tie(a.key, b.tiebreak, a.span) < std::tie(b.key, a.tiebreak, b.span);
  });
  std::vector<SpanId> order;
  order.reserve(keyed.size());
  for (const auto& k : keyed) order.push_back(k.span);
  return order;
}

std::vector<SpanId> fuse_ranks(const RankMap& rank_a, const RankMap& rank_b, const ScoreMap& tiebreak,
                               FusionMethod method, double rrf_k) {
  const RankMap both[] = {rank_a, rank_b};
  return fuse_ranks(both, tiebreak, method, rrf_k);
}

RankedEvidence rerank(const EvidenceDatabase& db, const CandidateSet& candidates, const RouterConfig& router,
                      EmbeddingProvider* provider) {
  router.validate();
  RankedEvidence out;

  Components use = components_for(router.strategy);
  if (router.strategy == RankingStrategy::Conditional &&
      candidates.query_tokens.size() > router.length_threshold_tokens) {
    use = components_for(RankingStrategy::PlusSemantic);
  }
  out.route = use.semantic ? Route::Semantic : Route::Lexical;
  if (candidates.empty()) return out;

  ScoreMap okapi;
  ScoreMap plus;
  for (const auto& e : candidates.entries) {
    okapi[e.span] = e.okapi;
    plus[e.span] = e.plus;
  }

  ScoreMap semantic;
  if (use.semantic) {
    try {
      if (!provider) throw EmbeddingUnavailable("no embedding provider configured");
      std::vector<std::string> texts;
      texts.reserve(candidates.size() + 1);
      texts.push_back(candidates.query);
      for (const auto& e : candidates.entries) texts.push_back(db.record(e.span).surface_text);
      const auto vectors = provider->embed(texts);
      if (vectors.size() != texts.size()) throw EmbeddingUnavailable("provider returned wrong vector count");

      Eigen::MatrixXd rows(static_cast<Eigen::Index>(candidates.size()), vectors.front().size());
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (vectors[i + 1].size() != rows.cols()) throw EmbeddingUnavailable("embedding dimensions disagree");
        rows.row(static_cast<Eigen::Index>(i)) = vectors[i + 1].cast<double>().transpose();
      }
      const Eigen::VectorXd sims = cosine_similarities(rows, vectors.front().cast<double>());
      for (std::size_t i = 0; i < candidates.size(); ++i) {
        semantic[candidates.entries[i].span] = sims[static_cast<Eigen::Index>(i)];
      }
    } catch (const EmbeddingUnavailable& e) {
      if (!router.lexical_fallback) throw;
      spdlog::warn("semantic ranking unavailable, falling back to lexical: {}", e.what());
      use = components_for(RankingStrategy::LexicalEnsemble);
      out.route = Route::LexicalFallback;
      semantic.clear();
    }
  }

  std::vector<RankMap> ranks;
  std::map<std::string, RankMap> named;
  if (use.okapi) ranks.push_back(named["okapi"] = rank_by_score(okapi));
  if (use.plus) ranks.push_back(named["plus"] = rank_by_score(plus));
  if (use.semantic) ranks.push_back(named["semantic"] = rank_by_score(semantic));

  const auto order = fuse_ranks(ranks, plus, router.fusion, router.rrf_k);
  out.entries.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    RankedEntry entry;
    entry.span = order[i];
    entry.rank = i + 1;
    for (const auto& [name, r] : named) entry.component_ranks[name] = r.at(entry.span);
    entry.component_scores["okapi"] = okapi.at(entry.span);
    entry.component_scores["plus"] = plus.at(entry.span);
    if (!semantic.empty()) entry.component_scores["semantic"] = semantic.at(entry.span);
    out.entries.push_back(std::move(entry));
  }
  return out;
}

}  // namespace ilcite
