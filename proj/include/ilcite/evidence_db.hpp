#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ilcite/span_extractor.hpp"

namespace ilcite {

inline constexpr int kUnknownYear = 0;

struct PaperMetadata {
  std::string paper_id;
  std::string title;
  int year = kUnknownYear;
  std::string venue;
  std::vector<std::string> authors;

  bool operator==(const PaperMetadata&) const = default;
};

nlohmann::json to_json(const PaperMetadata& paper);
PaperMetadata paper_from_json(const nlohmann::json& record);

using SpanId = std::uint32_t;

struct Citation {
  std::string paper_id;
  std::uint64_t support = 0;

  bool operator==(const Citation&) const = default;
};

struct EvidenceRecord {
  SpanId id = 0;
  std::string span_text;     // normalized key
  std::string surface_text;  // for display
  std::vector<Citation> citations;  // sorted by paper_id
  std::vector<Provenance> provenance;

  bool cites(std::string_view paper_id) const;
  bool operator==(const EvidenceRecord&) const = default;
};

struct IndexStats {
  std::size_t doc_count = 0;
  double avg_span_tokens = 0.0;
  std::map<std::string, std::size_t> doc_freq;
  std::vector<std::size_t> span_lengths;  // indexed by SpanId

  bool operator==(const IndexStats&) const = default;
};

struct BuildReport {
  std::size_t occurrences = 0;
  std::size_t citations_kept = 0;
  std::size_t citations_dropped = 0;
  std::size_t empty_spans = 0;
  std::size_t spans_without_citations = 0;
  std::vector<std::string> unresolved_paper_ids;  // sorted, unique
};

struct Posting {
  SpanId span = 0;
  std::uint32_t term_frequency = 0;
};

// Immutable once built or loaded; safe for concurrent readers.
class EvidenceDatabase {
 public:
  EvidenceDatabase() = default;

  static EvidenceDatabase build(std::span<const SpanOccurrence> occurrences,
                                std::span<const PaperMetadata> papers, BuildReport* report = nullptr);

  const std::vector<EvidenceRecord>& records() const { return records_; }
  const EvidenceRecord& record(SpanId id) const { return records_.at(id); }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }

  // Exact match after normalization; nullptr when absent.
  const EvidenceRecord* lookup(std::string_view span_text) const;

  const std::map<std::string, PaperMetadata>& papers() const { return papers_; }
  const PaperMetadata* paper(std::string_view paper_id) const;
  std::size_t cited_paper_count() const;

  const IndexStats& stats() const { return stats_; }

  // Postings for a token, sorted by span id. Empty for out-of-vocabulary tokens.
  std::span<const Posting> postings(const std::string& token) const;
  // Term frequency of `token` in span `id`.
  std::uint32_t term_frequency(SpanId id, const std::string& token) const;

  bool operator==(const EvidenceDatabase& other) const {
    return records_ == other.records_ && papers_ == other.papers_ && stats_ == other.stats_;
  }

 private:
  friend EvidenceDatabase load_database(std::istream& in);

  void index();

  std::vector<EvidenceRecord> records_;
  std::map<std::string, PaperMetadata> papers_;
  IndexStats stats_;
  std::unordered_map<std::string, SpanId> by_text_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
};

IndexStats compute_stats(std::span<const EvidenceRecord> records);

class DatabaseLoadError : public std::runtime_error {
 public:
  enum class Kind { Io, BadMagic, UnsupportedVersion, ChecksumMismatch, Malformed };

  DatabaseLoadError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr std::string_view kDatabaseMagic = "ILCDB1";
inline constexpr int kDatabaseVersion = 1;

void save_database(const EvidenceDatabase& db, std::ostream& out);
void save_database(const EvidenceDatabase& db, const std::filesystem::path& path);
EvidenceDatabase load_database(std::istream& in);
EvidenceDatabase load_database(const std::filesystem::path& path);

std::vector<PaperMetadata> read_papers(std::istream& in);
std::vector<SpanOccurrence> read_span_occurrences(std::istream& in);

}  // namespace ilcite
