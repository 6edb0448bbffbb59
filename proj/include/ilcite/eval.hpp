#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ilcite/recommender.hpp"

namespace ilcite {

struct EvalDatapoint {
  std::string query;
  std::vector<std::string> ground_truth_paper_ids;
};

// Line-delimited {query, ground_truth_paper_ids:[...]}. Records with an empty
// query or ground truth are skipped with a warning.
std::vector<EvalDatapoint> read_eval_set(std::istream& in);

// Keeps datapoints with at least one ground-truth paper cited somewhere in db.
std::vector<EvalDatapoint> filter_eval_candidates(std::span<const EvalDatapoint> candidates,
                                                  const EvidenceDatabase& db);

// 1 / rank of the first ground-truth hit, 0 without a hit.
double reciprocal_rank(std::span<const std::string> ranked_paper_ids,
                       std::span<const std::string> ground_truth);

struct QueryOutcome {
  std::string query;
  std::string route;
  std::size_t first_hit_rank = 0;  // 0 = no hit
  double reciprocal_rank = 0.0;
  std::vector<std::string> top_papers;
};

struct MetricsReport {
  double mrr = 0.0;
  std::map<std::size_t, double> recall_at;
  std::size_t n_queries = 0;
  std::vector<QueryOutcome> per_query;
};

inline const std::vector<std::size_t> kDefaultCutoffs{1, 3, 5, 10};

// Metrics over already-ranked paper lists, one per datapoint.
MetricsReport compute_metrics(std::span<const std::vector<std::string>> ranked_lists,
                              std::span<const EvalDatapoint> eval_set,
                              std::span<const std::size_t> cutoffs = kDefaultCutoffs);

// Runs the recommender on every datapoint over the full ranked paper list.
// Throws std::invalid_argument on an empty evaluation set.
MetricsReport evaluate(const EvidenceDatabase& db, const RecommenderConfig& config,
                       std::span<const EvalDatapoint> eval_set, EmbeddingProvider* provider,
                       std::span<const std::size_t> cutoffs = kDefaultCutoffs);

std::string format_report(const MetricsReport& report);
nlohmann::json to_json(const MetricsReport& report);

}  // namespace ilcite
