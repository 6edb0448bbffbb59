#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <random>

#include "demo.hpp"
#include "ilcite/prefetcher.hpp"
#include "ilcite/text.hpp"
#include "oracles.hpp"

using namespace ilcite;

namespace {

EvidenceDatabase db_from_texts(const std::vector<std::string>& texts) {
  std::vector<SpanOccurrence> occs;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    occs.push_back({texts[i], {"P" + std::to_string(i % 7)}, ExtractionRule::FullSentence, {"c", i}});
  }
  std::vector<PaperMetadata> papers;
  for (int i = 0; i < 7; ++i) papers.push_back({"P" + std::to_string(i), "", 2000 + i, "", {}});
  return EvidenceDatabase::build(occs, papers);
}

oracle::Corpus corpus_of(const EvidenceDatabase& db) {
  oracle::Corpus c;
  for (const auto& r : db.records()) c.spans.push_back(oracle::tokens(r.span_text));
  return c;
}

std::vector<std::string> random_texts(std::mt19937_64& rng, std::size_t n, std::size_t vocab_size) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string t = "u" + std::to_string(i);
    const auto len = 1 + rng() % 12;
    for (std::size_t j = 0; j < len; ++j) t += " w" + std::to_string(rng() % vocab_size);
    out.push_back(t);
  }
  return out;
}

std::string random_query(std::mt19937_64& rng, std::size_t vocab_size) {
  std::string q;
  const auto len = 1 + rng() % 5;
  for (std::size_t j = 0; j < len; ++j) q += " W" + std::to_string(rng() % (vocab_size + 3));
  return q;
}

}  // namespace

TEST_CASE("idf values") {
  CHECK(idf(3, 1) == doctest::Approx(std::log(8.0 / 3.0)).epsilon(1e-12));
  CHECK(idf(3, 1) == doctest::Approx(0.98083).epsilon(1e-5));
  CHECK(idf(3, 3) == doctest::Approx(std::log(0.5 / 3.5 + 1.0)).epsilon(1e-12));
  CHECK(idf(3, 3) == doctest::Approx(0.13353).epsilon(1e-4));
  CHECK(idf(3, 3) > 0.0);
  CHECK(idf(10, 3) == doctest::Approx(std::log(7.5 / 3.5 + 1.0)).epsilon(1e-12));
  CHECK(idf(100, 0) > idf(100, 1));
}

TEST_CASE("a single matching term scores idf times saturation") {
  const auto db = db_from_texts({"fast align", "neural parser", "word alignment model", "fast text"});
  const Bm25Params p;
  const std::vector<std::string> q{"fast"};
  const auto id = db.lookup("fast align")->id;
  const double avg = db.stats().avg_span_tokens;
  const double expected = idf(4, 2) * (1.0 * 2.5) / (1.0 + 1.5 * (0.25 + 0.75 * 2.0 / avg));
  CHECK(okapi_score(db, p, q, id) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(plus_score(db, p, q, id) == doctest::Approx(idf(4, 2) * (expected / idf(4, 2) + 1.0)).epsilon(1e-12));
  CHECK(okapi_score(db, p, q, db.lookup("neural parser")->id) == 0.0);
  CHECK(plus_score(db, p, q, db.lookup("neural parser")->id) == doctest::Approx(idf(4, 2)).epsilon(1e-12));
}

TEST_CASE("scores match the reference formulas on random corpora") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto db = db_from_texts(random_texts(rng, 20 + rng() % 30, 15));
    const auto corpus = corpus_of(db);
    Bm25Params p;
    p.k1 = 0.5 + static_cast<double>(rng() % 200) / 100.0;
    p.b = static_cast<double>(rng() % 101) / 100.0;
    p.delta = static_cast<double>(rng() % 3);
    for (int qi = 0; qi < 10; ++qi) {
      const auto q = tokenize(random_query(rng, 15));
      for (SpanId id = 0; id < db.size(); ++id) {
        CHECK(std::abs(okapi_score(db, p, q, id) - oracle::okapi(corpus, q, id, p.k1, p.b)) <= 1e-9);
        CHECK(std::abs(plus_score(db, p, q, id) - oracle::plus(corpus, q, id, p.k1, p.b, p.delta)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("delta zero reduces BM25Plus to Okapi") {
  std::mt19937_64 rng(8);
  const auto db = db_from_texts(random_texts(rng, 40, 10));
  Bm25Params p;
  p.delta = 0.0;
  for (int qi = 0; qi < 20; ++qi) {
    const auto q = tokenize(random_query(rng, 10));
    for (SpanId id = 0; id < db.size(); ++id) CHECK(plus_score(db, p, q, id) == okapi_score(db, p, q, id));
  }
}

TEST_CASE("scores are non-negative and monotone in term frequency") {
  std::mt19937_64 rng(9);
  const auto db = db_from_texts(random_texts(rng, 60, 8));
  const Bm25Params p;
  for (int qi = 0; qi < 30; ++qi) {
    const auto q = tokenize(random_query(rng, 8));
    for (SpanId id = 0; id < db.size(); ++id) {
      CHECK(okapi_score(db, p, q, id) >= 0.0);
      CHECK(plus_score(db, p, q, id) >= okapi_score(db, p, q, id));
    }
  }
  for (double len : {1.0, 5.0, 20.0}) {
    double prev = 0.0;
    for (double tf = 0; tf <= 10; ++tf) {
      const double s = term_saturation(tf, len, 6.0, p);
      CHECK(s >= prev);
      CHECK(s < p.k1 + 1.0);
      prev = s;
    }
  }
  CHECK(term_saturation(0, 3, 0, p) == 0.0);
}

TEST_CASE("invalid BM25 parameters are rejected") {
  Bm25Params p;
  p.b = 1.5;
  CHECK_THROWS(p.validate());
  p = {};
  p.k1 = -1;
  CHECK_THROWS(p.validate());
  p = {};
  p.delta = -0.5;
  CHECK_THROWS(p.validate());
}

TEST_CASE("a small database yields every span as a candidate") {
  std::vector<std::string> texts;
  for (int i = 0; i < 10; ++i) texts.push_back("span number " + std::to_string(i) + (i == 3 ? " fast" : ""));
  const auto db = db_from_texts(texts);
  const auto c = prefetch(db, {}, "fast");
  CHECK(c.size() == 10);
  CHECK(std::is_sorted(c.entries.begin(), c.entries.end(),
                       [](const CandidateEntry& a, const CandidateEntry& b) { return a.span < b.span; }));
  const auto none = prefetch(db, {}, "zzz");
  CHECK(none.size() == 10);
  CHECK(prefetch(db, {}, " ,. ").empty());
  CHECK(prefetch(EvidenceDatabase{}, {}, "fast").empty());
}

TEST_CASE("candidate count is between the cutoff and twice the cutoff") {
  // Identical top lists: every span has tf 0 or 1 and equal length, so both
  // scorers order the spans identically.
  std::vector<std::string> same;
  for (int i = 0; i < 120; ++i) same.push_back("x" + std::to_string(i) + (i % 2 ? " hit" : " miss"));
  const auto db = db_from_texts(same);
  CHECK(prefetch(db, {}, "hit").size() == 50);

  // The literal BM25Plus score is Okapi plus a per-query constant, so the two
  // top lists can only part ways where rounding of that shift merges or swaps
  // neighbouring scores at the cutoff. This corpus and query hit such a spot.
  std::mt19937_64 rng(11);
  std::vector<std::string> texts;
  for (std::size_t i = 0; i < 120; ++i) {
    std::string t = "u" + std::to_string(i);
    const auto len = 1 + rng() % 12;
    for (std::size_t j = 0; j < len; ++j) t += " w" + std::to_string(rng() % 6);
    texts.push_back(t);
  }
  const auto db2 = db_from_texts(texts);
  const std::string query = "w2 w5 w5 w0";
  const auto c = prefetch(db2, {}, query);
  CHECK(c.size() == 51);

  // Brute force: score every span, sort each list, take the union.
  const auto q = tokenize(query);
  const Bm25Params p;
  auto top = [&](auto score) {
    std::vector<SpanId> ids(db2.size());
    std::iota(ids.begin(), ids.end(), SpanId{0});
    std::stable_sort(ids.begin(), ids.end(), [&](SpanId a, SpanId b) { return score(a) > score(b); });
    ids.resize(50);
    return std::set<SpanId>(ids.begin(), ids.end());
  };
  auto expected = top([&](SpanId id) { return okapi_score(db2, p, q, id); });
  const auto plus_top = top([&](SpanId id) { return plus_score(db2, p, q, id); });
  expected.insert(plus_top.begin(), plus_top.end());
  std::set<SpanId> got;
  for (const auto& e : c.entries) got.insert(e.span);
  CHECK(got == expected);
}

TEST_CASE("indexed prefetch is bit-identical to a full scan") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 15; ++trial) {
    const auto db = db_from_texts(random_texts(rng, 10 + rng() % 200, 25));
    PrefetchConfig cfg;
    cfg.per_scorer_cutoff = 1 + rng() % 60;
    cfg.bm25.delta = static_cast<double>(rng() % 3);
    for (int qi = 0; qi < 10; ++qi) {
      const auto q = random_query(rng, 25);
      const auto a = prefetch(db, cfg, q);
      const auto b = prefetch_full_scan(db, cfg, q);
      CHECK(a.entries == b.entries);
      CHECK(a.query_tokens == b.query_tokens);
    }
  }
}

TEST_CASE("candidate set does not depend on insertion order") {
  std::mt19937_64 rng(4);
  auto texts = random_texts(rng, 150, 12);
  const auto db = db_from_texts(texts);
  auto shuffled = texts;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto db2 = db_from_texts(shuffled);
  for (int qi = 0; qi < 20; ++qi) {
    const auto q = random_query(rng, 12);
    auto texts_of = [](const EvidenceDatabase& d, const CandidateSet& c) {
      std::set<std::string> s;
      for (const auto& e : c.entries) s.insert(d.record(e.span).span_text);
      return s;
    };
    CHECK(texts_of(db, prefetch(db, {}, q)) == texts_of(db2, prefetch(db2, {}, q)));
  }
}

TEST_CASE("candidate entries carry both lexical scores") {
  const auto db = demo::database();
  const auto c = prefetch(db, {}, "FastAlign");
  const auto q = tokenize("FastAlign");
  for (const auto& e : c.entries) {
    CHECK(e.okapi == okapi_score(db, PrefetchConfig{}.bm25, q, e.span));
    CHECK(e.plus == plus_score(db, PrefetchConfig{}.bm25, q, e.span));
  }
}
