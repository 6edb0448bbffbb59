#include <doctest.h>

#include <random>

#include "demo.hpp"
#include "ilcite/recommender.hpp"
#include "ilcite/text.hpp"
#include "oracles.hpp"

using namespace ilcite;

namespace {

std::vector<oracle::ToySpan> demo_toy_spans() {
  return {{"FastAlign", {{"dyer2013", 3}}},
          {"The alignment is induced with FastAlign", {{"dyer2013", 1}}},
          {"One such method is the FastAlign word-alignment model", {{"dyer2013", 1}, {"och2003", 1}}},
          {"fasttext", {{"bojanowski2017", 2}}},
          {"Sinusoidal position encodings are added to the input embeddings", {{"vaswani2017", 1}}}};
}

const std::map<std::string, int> kDemoYears{
    {"dyer2013", 2013}, {"och2003", 2003}, {"bojanowski2017", 2017}, {"vaswani2017", 2017}};

std::vector<oracle::ToyResult> as_toy(const RecommendationResult& r) {
  std::vector<oracle::ToyResult> out;
  for (const auto& rec : r.results) {
    out.push_back({rec.paper.paper_id, normalize_span(rec.evidence), rec.best_rank, rec.total_support});
  }
  return out;
}

PaperAggregate agg(std::string id, std::size_t p_r, std::uint64_t p_s, int year) {
  PaperAggregate a;
  a.paper_id = std::move(id);
  a.best_rank = p_r;
  a.total_support = p_s;
  a.recency = year;
  return a;
}

std::vector<std::string> ids(const std::vector<PaperAggregate>& v) {
  std::vector<std::string> out;
  for (const auto& a : v) out.push_back(a.paper_id);
  return out;
}

}  // namespace

TEST_CASE("aggregate takes the best rank and sums support") {
  std::vector<SpanOccurrence> occs;
  for (int i = 0; i < 3; ++i) occs.push_back({"alpha", {"P"}, ExtractionRule::DepTraversal, {"c", 0}});
  occs.push_back({"beta", {"P"}, ExtractionRule::DepTraversal, {"c", 1}});
  occs.push_back({"beta", {"P"}, ExtractionRule::DepTraversal, {"c", 2}});
  occs.push_back({"gamma", {"Q"}, ExtractionRule::DepTraversal, {"c", 3}});
  const std::vector<PaperMetadata> papers{{"P", "", 2019, "", {}}, {"Q", "", kUnknownYear, "", {}}};
  const auto db = EvidenceDatabase::build(occs, papers);
  // ranks: gamma 1, alpha 2, beta 3
  RankedEvidence ranked;
  ranked.entries = {{db.lookup("gamma")->id, 1, {}, {}},
                    {db.lookup("alpha")->id, 2, {}, {}},
                    {db.lookup("beta")->id, 3, {}, {}}};
  const auto out = aggregate(ranked, db);
  REQUIRE(out.size() == 2);
  const auto& p = out[0].paper_id == "P" ? out[0] : out[1];
  CHECK(p.best_rank == 2);
  CHECK(p.total_support == 5);
  CHECK(p.recency == 2019);
  CHECK(p.best_evidence == db.lookup("alpha")->id);
  CHECK(p.evidence == std::vector<SpanId>{db.lookup("alpha")->id, db.lookup("beta")->id});
  const auto& q = out[0].paper_id == "Q" ? out[0] : out[1];
  CHECK(q.best_rank == 1);
  CHECK(q.recency == kUnknownYear);
}

TEST_CASE("paper ordering examples") {
  CHECK(ids(rank_papers({agg("B", 2, 9, 2020), agg("A", 1, 1, 2016)})) == std::vector<std::string>{"A", "B"});
  CHECK(ids(rank_papers({agg("A", 1, 2, 2010), agg("B", 1, 2, 2018)})) == std::vector<std::string>{"B", "A"});
  CHECK(ids(rank_papers({agg("A", 1, 2, 2010), agg("B", 1, 3, 2001)})) == std::vector<std::string>{"B", "A"});
  CHECK(ids(rank_papers({agg("A", 1, 2, kUnknownYear), agg("B", 1, 2, 1990)})) == std::vector<std::string>{"B", "A"});
  CHECK(ids(rank_papers({agg("B", 1, 2, 2000), agg("A", 1, 2, 2000)})) == std::vector<std::string>{"A", "B"});
}

TEST_CASE("the ordering is a strict total order") {
  std::mt19937_64 rng(5);
  std::vector<PaperAggregate> v;
  for (int i = 0; i < 300; ++i) {
    v.push_back(agg("P" + std::to_string(i), 1 + rng() % 4, 1 + rng() % 4, rng() % 3 ? 2000 + static_cast<int>(rng() % 4) : 0));
  }
  for (const auto& a : v) {
    CHECK_FALSE(ranks_before(a, a));
    for (const auto& b : v) {
      if (&a != &b) CHECK(ranks_before(a, b) != ranks_before(b, a));
    }
  }
  auto sorted = rank_papers(v);
  std::shuffle(v.begin(), v.end(), rng);
  CHECK(ids(rank_papers(v)) == ids(sorted));
}

TEST_CASE("FastAlign finds its paper first with the exact span as evidence") {
  const auto db = demo::database();
  const auto r = recommend(db, {}, "FastAlign", 10, nullptr);
  CHECK(r.route == Route::Lexical);
  CHECK(r.candidates == 5);
  REQUIRE(r.results.size() == 4);
  CHECK(r.results[0].paper.paper_id == "dyer2013");
  CHECK(r.results[0].paper.title.find("IBM Model 2") != std::string::npos);
  CHECK(r.results[0].evidence == "FastAlign");
  CHECK(r.results[0].best_rank == 1);
  CHECK(r.results[0].total_support == 5);
  CHECK(r.results[1].paper.paper_id == "och2003");
  CHECK(r.results[0].scores.at("okapi") > 0.0);
  CHECK(r.results[0].component_ranks.at("plus") == 1);
}

TEST_CASE("k limits the result list") {
  const auto db = demo::database();
  CHECK(recommend(db, {}, "FastAlign", 0, nullptr).results.empty());
  CHECK(recommend(db, {}, "FastAlign", 2, nullptr).results.size() == 2);
  CHECK(recommend(db, {}, "FastAlign", kAllResults, nullptr).results.size() == 4);
  CHECK(recommend(db, {}, "  ", 5, nullptr).results.empty());
  CHECK(recommend(EvidenceDatabase{}, {}, "FastAlign", 5, nullptr).results.empty());
}

TEST_CASE("recommendations are grounded in the evidence that cites them") {
  const auto db = demo::database();
  for (const auto* q : {"FastAlign", "fasttext vectors", "alignment model", "position", "unrelated words"}) {
    const auto r = recommend(db, {}, q, kAllResults, nullptr);
    for (const auto& rec : r.results) {
      const auto& span = db.record(rec.evidence_span);
      CHECK(span.cites(rec.paper.paper_id));
      CHECK(span.surface_text == rec.evidence);
      for (auto s : rec.supporting_spans) CHECK(db.record(s).cites(rec.paper.paper_id));
    }
  }
}

TEST_CASE("the pipeline matches the reference implementation on random short queries") {
  const auto db = demo::database();
  const std::vector<std::string> vocab{"fastalign", "alignment", "the", "model", "fasttext", "position",
                                       "word", "input", "unknown", "induced", "Embeddings", "with"};
  std::mt19937_64 rng(123);
  for (int i = 0; i < 100; ++i) {
    std::string q;
    const auto n = 1 + rng() % 4;
    for (std::size_t j = 0; j < n; ++j) q += vocab[rng() % vocab.size()] + " ";
    CAPTURE(q);
    const auto expected = oracle::recommend(demo_toy_spans(), kDemoYears, q, 1.5, 0.75, 1.0, 50);
    CHECK(as_toy(recommend(db, {}, q, kAllResults, nullptr)) == expected);
  }
}

TEST_CASE("payload serialisation") {
  const auto db = demo::database();
  const auto j = to_json(recommend(db, {}, "FastAlign", 2, nullptr));
  CHECK(j.at("query") == "FastAlign");
  CHECK(j.at("route") == "lexical");
  CHECK(j.at("candidates") == 5);
  REQUIRE(j.at("results").size() == 2);
  const auto& top = j.at("results")[0];
  CHECK(top.at("rank") == 1);
  CHECK(top.at("paper").at("id") == "dyer2013");
  CHECK(top.at("paper").at("year") == 2013);
  CHECK(top.at("evidence") == "FastAlign");
  CHECK(top.at("p_r") == 1);
  CHECK(top.at("p_s") == 5);
  CHECK(top.at("scores").contains("plus"));
  CHECK(top.at("ranks").contains("okapi"));
}
