#include "ilcite/evidence_db.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ilcite/text.hpp"

namespace ilcite {

nlohmann::json to_json(const PaperMetadata& paper) {
  return {{"paper_id", paper.paper_id},
          {"title", paper.title},
          {"year", paper.year},
          {"venue", paper.venue},
          {"authors", paper.authors}};
}

PaperMetadata paper_from_json(const nlohmann::json& record) {
  PaperMetadata p;
  p.paper_id = record.at("paper_id").get<std::string>();
  if (p.paper_id.empty()) throw std::invalid_argument("paper record with empty paper_id");
  p.title = record.value("title", std::string{});
  const auto year = record.find("year");
  if (year != record.end() && year->is_number_integer()) p.year = std::max(year->get<int>(), kUnknownYear);
  if (record.contains("venue") && record.at("venue").is_string()) p.venue = record.at("venue").get<std::string>();
  p.authors = record.value("authors", std::vector<std::string>{});
  return p;
}

bool EvidenceRecord::cites(std::string_view paper_id) const {
  return std::any_of(citations.begin(), citations.end(),
                     [&](const Citation& c) { return c.paper_id == paper_id; });
}

IndexStats compute_stats(std::span<const EvidenceRecord> records) {
  IndexStats stats;
  stats.doc_count = records.size();
  stats.span_lengths.reserve(records.size());
  std::size_t total = 0;
  for (const auto& r : records) {
    auto tokens = tokenize(r.span_text);
    stats.span_lengths.push_back(tokens.size());
    total += tokens.size();
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    for (auto& t : tokens) ++stats.doc_freq[std::move(t)];
  }
  stats.avg_span_tokens = records.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(records.size());
  return stats;
}

EvidenceDatabase EvidenceDatabase::build(std::span<const SpanOccurrence> occurrences,
                                         std::span<const PaperMetadata> papers, BuildReport* report) {
  BuildReport local;
  BuildReport& rep = report ? *report : local;
  rep = BuildReport{};

  EvidenceDatabase db;
  for (const auto& p : papers) db.papers_.insert_or_assign(p.paper_id, p);

  struct Accumulator {
    std::string surface;
    std::map<std::string, std::uint64_t> support;
    std::set<Provenance> provenance;
  };
  std::map<std::string, Accumulator> acc;
  std::set<std::string> unresolved;

  for (const auto& occ : occurrences) {
    ++rep.occurrences;
    auto key = normalize_span(occ.span_text);
    if (key.empty()) {
      ++rep.empty_spans;
      continue;
    }
    std::vector<const std::string*> resolved;
    for (const auto& id : occ.cited_paper_ids) {
      if (db.papers_.contains(id)) {
        resolved.push_back(&id);
      } else {
        ++rep.citations_dropped;
        unresolved.insert(id);
      }
    }
    if (resolved.empty()) {
      ++rep.spans_without_citations;
      continue;
    }
    auto surface = trim_span(occ.span_text);
    auto [it, inserted] = acc.try_emplace(std::move(key));
    auto& entry = it->second;
    if (inserted || surface < entry.surface) entry.surface = std::move(surface);
    for (const auto* id : resolved) {
      ++entry.support[*id];
      ++rep.citations_kept;
    }
    entry.provenance.insert(occ.provenance);
  }
  rep.unresolved_paper_ids.assign(unresolved.begin(), unresolved.end());

  db.records_.reserve(acc.size());
  for (auto& [key, entry] : acc) {
    EvidenceRecord r;
    r.id = static_cast<SpanId>(db.records_.size());
    r.span_text = key;
    r.surface_text = std::move(entry.surface);
    for (const auto& [paper_id, support] : entry.support) r.citations.push_back({paper_id, support});
    r.provenance.assign(entry.provenance.begin(), entry.provenance.end());
    db.records_.push_back(std::move(r));
  }
  db.stats_ = compute_stats(db.records_);
  db.index();
  if (rep.citations_dropped > 0) {
    spdlog::warn("dropped {} citations to {} unresolved papers", rep.citations_dropped,
                 rep.unresolved_paper_ids.size());
  }
  return db;
}

void EvidenceDatabase::index() {
  by_text_.clear();
  postings_.clear();
  for (const auto& r : records_) {
    by_text_.emplace(r.span_text, r.id);
    std::map<std::string, std::uint32_t> tf;
    for (auto& t : tokenize(r.span_text)) ++tf[std::move(t)];
    for (const auto& [token, count] : tf) postings_[token].push_back({r.id, count});
  }
}

const EvidenceRecord* EvidenceDatabase::lookup(std::string_view span_text) const {
  const auto it = by_text_.find(normalize_span(span_text));
  return it == by_text_.end() ? nullptr : &records_[it->second];
}

const PaperMetadata* EvidenceDatabase::paper(std::string_view paper_id) const {
  const auto it = papers_.find(std::string(paper_id));
  return it == papers_.end() ? nullptr : &it->second;
}

std::size_t EvidenceDatabase::cited_paper_count() const {
  std::set<std::string_view> ids;
  for (const auto& r : records_) {
    for (const auto& c : r.citations) ids.insert(c.paper_id);
  }
  return ids.size();
}

std::span<const Posting> EvidenceDatabase::postings(const std::string& token) const {
  const auto it = postings_.find(token);
  if (it == postings_.end()) return {};
  return it->second;
}

std::uint32_t EvidenceDatabase::term_frequency(SpanId id, const std::string& token) const {
  const auto list = postings(token);
  const auto it = std::lower_bound(list.begin(), list.end(), id,
                                   [](const Posting& p, SpanId s) { return p.span < s; });
  return it != list.end() && it->span == id ? it->term_frequency : 0;
}

// ---------------------------------------------------------------------------
// Persistence. Line-delimited JSON after a magic line; the final line holds a
// SHA-256 over every preceding byte.

namespace {

nlohmann::json record_to_json(const EvidenceRecord& r) {
  nlohmann::json citations = nlohmann::json::array();
  for (const auto& c : r.citations) citations.push_back({{"paper_id", c.paper_id}, {"support", c.support}});
  nlohmann::json provenance = nlohmann::json::array();
  for (const auto& p : r.provenance) {
    provenance.push_back({{"paper_id", p.paper_id}, {"sentence_index", p.sentence_index}});
  }
  return {{"kind", "evidence"}, {"id", r.id}, {"span", r.span_text}, {"surface", r.surface_text},
          {"citations", citations}, {"provenance", provenance}};
}

EvidenceRecord record_from_json(const nlohmann::json& j) {
  EvidenceRecord r;
  r.id = j.at("id").get<SpanId>();
  r.span_text = j.at("span").get<std::string>();
  r.surface_text = j.at("surface").get<std::string>();
  for (const auto& c : j.at("citations")) {
    r.citations.push_back({c.at("paper_id").get<std::string>(), c.at("support").get<std::uint64_t>()});
  }
  for (const auto& p : j.at("provenance")) {
    r.provenance.push_back({p.at("paper_id").get<std::string>(), p.at("sentence_index").get<std::size_t>()});
  }
  if (r.citations.empty()) throw std::invalid_argument("evidence record without citations");
  return r;
}

}  // namespace

void save_database(const EvidenceDatabase& db, std::ostream& out) {
  std::string body;
  auto emit = [&body](const nlohmann::json& j) {
    body += j.dump();
    body.push_back('\n');
  };
  body += kDatabaseMagic;
  body.push_back('\n');
  emit({{"kind", "header"}, {"version", kDatabaseVersion},
        {"papers", db.papers().size()}, {"records", db.size()}});
  for (const auto& [id, paper] : db.papers()) {
    auto j = to_json(paper);
    j["kind"] = "paper";
    emit(j);
  }
  for (const auto& r : db.records()) emit(record_to_json(r));
  const auto& stats = db.stats();
  emit({{"kind", "stats"}, {"doc_count", stats.doc_count}, {"avg_span_tokens", stats.avg_span_tokens},
        {"doc_freq", stats.doc_freq}, {"span_lengths", stats.span_lengths}});
  const auto checksum = sha256_hex(body);
  out << body << nlohmann::json{{"kind", "checksum"}, {"sha256", checksum}}.dump() << '\n';
  if (!out) throw std::runtime_error("failed writing evidence database");
}

void save_database(const EvidenceDatabase& db, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  save_database(db, out);
}

EvidenceDatabase load_database(std::istream& in) {
  using Kind = DatabaseLoadError::Kind;
  const std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (in.bad()) throw DatabaseLoadError(Kind::Io, "read error");

  const auto magic_end = content.find('\n');
  if (magic_end == std::string::npos || std::string_view(content).substr(0, magic_end) != kDatabaseMagic) {
    throw DatabaseLoadError(Kind::BadMagic, "missing ILCDB1 header");
  }
  if (content.empty() || content.back() != '\n') {
    throw DatabaseLoadError(Kind::ChecksumMismatch, "truncated database: no trailing newline");
  }
  const auto last_start = content.rfind('\n', content.size() - 2);
  if (last_start == std::string::npos || last_start < magic_end) {
    throw DatabaseLoadError(Kind::Malformed, "database has no body");
  }
  const std::string_view body(content.data(), last_start + 1);
  const std::string_view trailer(content.data() + last_start + 1, content.size() - last_start - 2);

  nlohmann::json checksum_line;
  try {
    checksum_line = nlohmann::json::parse(trailer);
  } catch (const nlohmann::json::exception&) {
    throw DatabaseLoadError(Kind::ChecksumMismatch, "checksum trailer missing or corrupted");
  }
  if (!checksum_line.is_object() || checksum_line.value("kind", "") != "checksum" ||
      checksum_line.value("sha256", "") != sha256_hex(body)) {
    throw DatabaseLoadError(Kind::ChecksumMismatch, "checksum mismatch");
  }

  EvidenceDatabase db;
  try {
    std::istringstream lines{std::string(body.substr(magic_end + 1))};
    std::string line;
    std::getline(lines, line);
    const auto header = nlohmann::json::parse(line);
    if (header.value("kind", "") != "header") throw std::invalid_argument("expected header record");
    if (header.at("version").get<int>() != kDatabaseVersion) {
      throw DatabaseLoadError(Kind::UnsupportedVersion,
                              "unsupported database version " + header.at("version").dump());
    }
    bool have_stats = false;
    while (std::getline(lines, line)) {
      const auto j = nlohmann::json::parse(line);
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "paper") {
        auto p = paper_from_json(j);
        db.papers_.insert_or_assign(p.paper_id, std::move(p));
      } else if (kind == "evidence") {
        auto r = record_from_json(j);
        if (r.id != db.records_.size()) throw std::invalid_argument("evidence ids out of order");
        db.records_.push_back(std::move(r));
      } else if (kind == "stats") {
        db.stats_.doc_count = j.at("doc_count").get<std::size_t>();
        db.stats_.avg_span_tokens = j.at("avg_span_tokens").get<double>();
        db.stats_.doc_freq = j.at("doc_freq").get<std::map<std::string, std::size_t>>();
        db.stats_.span_lengths = j.at("span_lengths").get<std::vector<std::size_t>>();
        have_stats = true;
      } else {
        throw std::invalid_argument("unknown record kind " + kind);
      }
    }
    if (!have_stats) throw std::invalid_argument("missing stats record");
    if (db.papers_.size() != header.at("papers").get<std::size_t>() ||
        db.records_.size() != header.at("records").get<std::size_t>() ||
        db.stats_.doc_count != db.records_.size() || db.stats_.span_lengths.size() != db.records_.size()) {
      throw std::invalid_argument("record counts disagree with header");
    }
  } catch (const DatabaseLoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw DatabaseLoadError(Kind::Malformed, e.what());
  }
  db.index();
  return db;
}

EvidenceDatabase load_database(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatabaseLoadError(DatabaseLoadError::Kind::Io, "cannot open " + path.string());
  return load_database(in);
}

namespace {

template <typename T, typename Parse>
std::vector<T> read_lines(std::istream& in, Parse parse, const char* what) {
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      spdlog::warn("skipping malformed {} on line {}: {}", what, line_no, e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<PaperMetadata> read_papers(std::istream& in) {
  return read_lines<PaperMetadata>(in, paper_from_json, "paper record");
}

std::vector<SpanOccurrence> read_span_occurrences(std::istream& in) {
  return read_lines<SpanOccurrence>(in, span_occurrence_from_json, "span record");
}

}  // namespace ilcite
