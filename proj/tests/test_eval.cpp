#include <doctest.h>

#include <sstream>

#include "demo.hpp"
#include "ilcite/eval.hpp"

using namespace ilcite;

using Ids = std::vector<std::string>;

TEST_CASE("reciprocal rank") {
  CHECK(reciprocal_rank(Ids{"A", "B"}, Ids{"A"}) == 1.0);
  CHECK(reciprocal_rank(Ids{"C", "B", "A"}, Ids{"A"}) == doctest::Approx(1.0 / 3.0));
  CHECK(reciprocal_rank(Ids{"C", "B"}, Ids{"A"}) == 0.0);
  CHECK(reciprocal_rank(Ids{}, Ids{"A"}) == 0.0);
  CHECK(reciprocal_rank(Ids{"C", "B", "A"}, Ids{"A", "B"}) == 0.5);
}

TEST_CASE("MRR and recall over two queries") {
  const std::vector<Ids> ranked{{"A", "X", "Y"}, {"X", "B", "Y"}};
  const std::vector<EvalDatapoint> gold{{"q1", {"A"}}, {"q2", {"B"}}};
  const auto m = compute_metrics(ranked, gold);
  CHECK(m.mrr == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(m.recall_at.at(1) == 0.5);
  CHECK(m.recall_at.at(3) == 1.0);
  CHECK(m.recall_at.at(5) == 1.0);
  CHECK(m.recall_at.at(10) == 1.0);
  CHECK(m.n_queries == 2);
  CHECK(m.per_query[1].first_hit_rank == 2);
}

TEST_CASE("recall is monotone in the cutoff and bounded by one") {
  const std::vector<Ids> ranked{{"a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "gold"}, {"gold"}, {"x"}};
  const std::vector<EvalDatapoint> gold{{"1", {"gold"}}, {"2", {"gold"}}, {"3", {"gold"}}};
  const std::vector<std::size_t> cutoffs{1, 3, 5, 10, 12};
  const auto m = compute_metrics(ranked, gold, cutoffs);
  double prev = 0.0;
  for (auto k : cutoffs) {
    CHECK(m.recall_at.at(k) >= prev);
    CHECK(m.recall_at.at(k) <= 1.0);
    prev = m.recall_at.at(k);
  }
  CHECK(m.recall_at.at(10) == doctest::Approx(1.0 / 3.0));
  CHECK(m.recall_at.at(12) == doctest::Approx(2.0 / 3.0));
  CHECK(m.mrr == doctest::Approx((1.0 / 12.0 + 1.0) / 3.0));
}

TEST_CASE("empty or mismatched evaluation sets are errors") {
  CHECK_THROWS(compute_metrics(std::vector<Ids>{}, std::vector<EvalDatapoint>{}));
  CHECK_THROWS(compute_metrics(std::vector<Ids>{{"A"}}, std::vector<EvalDatapoint>{{"q", {"A"}}, {"r", {"A"}}}));
  CHECK_THROWS(evaluate(demo::database(), {}, std::vector<EvalDatapoint>{}, nullptr));
}

TEST_CASE("eval records are read and filtered to cited papers") {
  auto in = demo::open_fixture("demo_eval.jsonl");
  const auto all = read_eval_set(in);
  REQUIRE(all.size() == 5);
  const auto db = demo::database();
  const auto kept = filter_eval_candidates(all, db);
  CHECK(kept.size() == 4);
  for (const auto& d : kept) CHECK(d.ground_truth_paper_ids.front() != "kipf2017");

  std::istringstream bad("{\"query\":\"\",\"ground_truth_paper_ids\":[\"x\"]}\nnot json\n{\"query\":\"q\",\"ground_truth_paper_ids\":[\"x\"]}\n");
  CHECK(read_eval_set(bad).size() == 1);
}

TEST_CASE("evaluation over the demo database") {
  auto in = demo::open_fixture("demo_eval.jsonl");
  const auto all = read_eval_set(in);
  const auto db = demo::database();
  const auto kept = filter_eval_candidates(all, db);
  const auto m = evaluate(db, {}, kept, nullptr);
  CHECK(m.n_queries == 4);
  CHECK(m.per_query[0].first_hit_rank == 1);
  CHECK(m.per_query[0].route == "lexical");
  CHECK(m.mrr > 0.5);
  CHECK(m.mrr <= 1.0);
  const auto j = to_json(m);
  CHECK(j.at("mrr") == m.mrr);
  CHECK(j.at("n_queries") == 4);
  const auto text = format_report(m);
  CHECK(text.find("MRR") != std::string::npos);
  CHECK(text.find("R@10") != std::string::npos);
}
