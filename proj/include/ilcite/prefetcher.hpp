#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ilcite/evidence_db.hpp"

namespace ilcite {

struct Bm25Params {
  double k1 = 1.5;
  double b = 0.75;
  double delta = 1.0;  // BM25Plus lower bound; 0 reduces it to Okapi

  void validate() const;
};

// ln((N - n + 0.5) / (n + 0.5) + 1)
double idf(std::size_t doc_count, std::size_t doc_freq);
double idf(const IndexStats& stats, const std::string& token);

// Saturated term-frequency factor shared by both scorers:
//   f (k1 + 1) / (f + k1 (1 - b + b |e| / a)), exactly 0 when f == 0.
double term_saturation(double tf, double span_length, double avg_span_length, const Bm25Params& params);

double okapi_score(const EvidenceDatabase& db, const Bm25Params& params,
                   std::span<const std::string> query_tokens, SpanId span);
double plus_score(const EvidenceDatabase& db, const Bm25Params& params,
                  std::span<const std::string> query_tokens, SpanId span);

struct CandidateEntry {
  SpanId span = 0;
  double okapi = 0.0;
  double plus = 0.0;

  bool operator==(const CandidateEntry&) const = default;
};

struct CandidateSet {
  std::string query;
  std::vector<std::string> query_tokens;
  std::vector<CandidateEntry> entries;  // sorted by span id
  std::size_t per_scorer_cutoff = 50;

  bool empty() const { return entries.empty(); }
  std::size_t size() const { return entries.size(); }
};

struct PrefetchConfig {
  Bm25Params bm25;
  std::size_t per_scorer_cutoff = 50;
};

// Union of the Okapi and BM25Plus top-`per_scorer_cutoff` lists. Ties at the
// cutoff go to the lower span id. Uses the inverted index; the result is
// identical to prefetch_full_scan.
CandidateSet prefetch(const EvidenceDatabase& db, const PrefetchConfig& config, std::string_view query);

// Scores every span in the database. Reference path for tests and audits.
CandidateSet prefetch_full_scan(const EvidenceDatabase& db, const PrefetchConfig& config,
                                std::string_view query);

}  // namespace ilcite
