#include "ilcite/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <spdlog/spdlog.h>

namespace ilcite {

std::vector<EvalDatapoint> read_eval_set(std::istream& in) {
  std::vector<EvalDatapoint> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      EvalDatapoint d{j.at("query").get<std::string>(),
                      j.at("ground_truth_paper_ids").get<std::vector<std::string>>()};
      if (d.query.empty() || d.ground_truth_paper_ids.empty()) {
        throw std::invalid_argument("empty query or ground truth");
      }
      out.push_back(std::move(d));
    } catch (const std::exception& e) {
      spdlog::warn("skipping eval record on line {}: {}", line_no, e.what());
    }
  }
  return out;
}

std::vector<EvalDatapoint> filter_eval_candidates(std::span<const EvalDatapoint> candidates,
                                                  const EvidenceDatabase& db) {
  std::set<std::string_view> cited;
  for (const auto& r : db.records()) {
    for (const auto& c : r.citations) cited.insert(c.paper_id);
  }
  std::vector<EvalDatapoint> out;
  for (const auto& d : candidates) {
    if (std::any_of(d.ground_truth_paper_ids.begin(), d.ground_truth_paper_ids.end(),
                    [&](const std::string& id) { return cited.contains(id); })) {
      out.push_back(d);
    }
  }
  return out;
}

double reciprocal_rank(std::span<const std::string> ranked_paper_ids, std::span<const std::string> ground_truth) {
  for (std::size_t i = 0; i < ranked_paper_ids.size(); ++i) {
    if (std::find(ground_truth.begin(), ground_truth.end(), ranked_paper_ids[i]) != ground_truth.end()) {
      return 1.0 / static_cast<double>(i + 1);
    }
  }
  return 0.0;
}

MetricsReport compute_metrics(std::span<const std::vector<std::string>> ranked_lists,
                              std::span<const EvalDatapoint> eval_set, std::span<const std::size_t> cutoffs) {
  if (eval_set.empty()) throw std::invalid_argument("evaluation set is empty");
  if (ranked_lists.size() != eval_set.size()) {
    throw std::invalid_argument("one ranked list per evaluation datapoint is required");
  }
  MetricsReport report;
  report.n_queries = eval_set.size();
  std::map<std::size_t, std::size_t> hits;
  for (auto n : cutoffs) hits[n] = 0;
  double rr_sum = 0.0;

  for (std::size_t q = 0; q < eval_set.size(); ++q) {
    const auto& ranked = ranked_lists[q];
    const auto& truth = eval_set[q].ground_truth_paper_ids;
    QueryOutcome outcome;
    outcome.query = eval_set[q].query;
    outcome.reciprocal_rank = reciprocal_rank(ranked, truth);
    if (outcome.reciprocal_rank > 0.0) {
      const auto it = std::find_if(ranked.begin(), ranked.end(), [&](const std::string& id) {
        return std::find(truth.begin(), truth.end(), id) != truth.end();
      });
      outcome.first_hit_rank = static_cast<std::size_t>(it - ranked.begin()) + 1;
    }
    for (auto& [n, count] : hits) {
      if (outcome.first_hit_rank != 0 && outcome.first_hit_rank <= n) ++count;
    }
    outcome.top_papers.assign(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(10, ranked.size())));
    rr_sum += outcome.reciprocal_rank;
    report.per_query.push_back(std::move(outcome));
  }
  const auto total = static_cast<double>(report.n_queries);
  report.mrr = rr_sum / total;
  for (const auto& [n, count] : hits) report.recall_at[n] = static_cast<double>(count) / total;
  return report;
}

MetricsReport evaluate(const EvidenceDatabase& db, const RecommenderConfig& config,
                       std::span<const EvalDatapoint> eval_set, EmbeddingProvider* provider,
                       std::span<const std::size_t> cutoffs) {
  if (eval_set.empty()) throw std::invalid_argument("evaluation set is empty");
  std::vector<std::vector<std::string>> ranked_lists;
  std::vector<std::string> routes;
  ranked_lists.reserve(eval_set.size());
  for (const auto& d : eval_set) {
    const auto result = recommend(db, config, d.query, kAllResults, provider);
    std::vector<std::string> ids;
    ids.reserve(result.results.size());
    for (const auto& r : result.results) ids.push_back(r.paper.paper_id);
    ranked_lists.push_back(std::move(ids));
    routes.emplace_back(to_string(result.route));
  }
  auto report = compute_metrics(ranked_lists, eval_set, cutoffs);
  for (std::size_t i = 0; i < routes.size(); ++i) report.per_query[i].route = routes[i];
  return report;
}

std::string format_report(const MetricsReport& report) {
  std::ostringstream out;
  char buf[64];
  out << "queries  " << report.n_queries << '\n';
  std::snprintf(buf, sizeof buf, "%.5f", report.mrr);
  out << "MRR      " << buf << '\n';
  for (const auto& [n, value] : report.recall_at) {
    std::snprintf(buf, sizeof buf, "%.3f", value);
    out << "R@" << n << (n < 10 ? "      " : "     ") << buf << '\n';
  }
  return out.str();
}

nlohmann::json to_json(const MetricsReport& report) {
  nlohmann::json recall = nlohmann::json::object();
  for (const auto& [n, value] : report.recall_at) recall[std::to_string(n)] = value;
  nlohmann::json per_query = nlohmann::json::array();
  for (const auto& q : report.per_query) {
    per_query.push_back({{"query", q.query},
                         {"route", q.route},
                         {"first_hit_rank", q.first_hit_rank},
                         {"reciprocal_rank", q.reciprocal_rank},
                         {"top_papers", q.top_papers}});
  }
  return {{"mrr", report.mrr}, {"recall_at", recall}, {"n_queries", report.n_queries}, {"per_query", per_query}};
}

}  // namespace ilcite
