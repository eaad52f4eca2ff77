#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "doctest.h"
#include "dnnre/errors.h"
#include "dnnre/eval/evaluate.h"
#include "dnnre/eval/metrics.h"
#include "oracles.h"
#include "test_util.h"

using namespace dnnre;

namespace {

std::vector<std::vector<int>> rankings(const std::vector<std::vector<double>>& scores) {
  std::vector<std::vector<int>> out;
  for (const auto& s : scores) out.push_back(rank_classes(s));
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("pr curve of a perfect model has precision one") {
  const std::vector<int> gold{1, 2, 0, 1};
  const std::vector<Prediction> preds{{0, 1, 0.9}, {1, 2, 0.8}, {3, 1, 0.7}};
  for (const auto& pt : pr_curve(preds, gold)) CHECK(pt.precision == 1.0);
  CHECK(pr_curve(preds, gold).back().recall == 1.0);
}

TEST_CASE("pr curve hand enumeration: hit, miss, hit") {
  const std::vector<int> gold{1, 0, 2};
  const std::vector<Prediction> preds{{2, 2, 0.7}, {0, 1, 0.9}, {1, 1, 0.8}};
  auto c = pr_curve(preds, gold);
  REQUIRE(c.size() == 3);
  CHECK(c[0].precision == 1.0);
  CHECK(c[0].recall == 0.5);
  CHECK(c[1].precision == 0.5);
  CHECK(c[1].recall == 0.5);
  CHECK(c[2].precision == doctest::Approx(2.0 / 3.0));
  CHECK(c[2].recall == 1.0);
  CHECK(c[0].threshold == 0.9);
  CHECK(c[2].threshold == 0.7);
}

TEST_CASE("NA predictions are left out of the ranking") {
  const std::vector<int> gold{1, 0};
  const std::vector<Prediction> with{{0, 1, 0.5}, {1, 0, 0.99}, {0, 0, 0.9}};
  const std::vector<Prediction> without{{0, 1, 0.5}};
  CHECK(pr_curve(with, gold).size() == 1);
  CHECK(pr_curve(with, gold)[0].precision == pr_curve(without, gold)[0].precision);
  CHECK(p_at_n(with, gold, 1) == 1.0);
  CHECK_THROWS_AS(p_at_n(with, gold, 2), DomainError);
}

TEST_CASE("pr curve needs a positive fact and gold for every bag") {
  const std::vector<Prediction> preds{{0, 1, 0.5}};
  CHECK_THROWS_AS(pr_curve(preds, std::vector<int>{0}), DomainError);
  CHECK_THROWS_AS(pr_curve(std::vector<Prediction>{{3, 1, 0.5}}, std::vector<int>{1}), DomainError);
}

TEST_CASE("reversing equal predictions keeps the curve") {
  const std::vector<int> gold{1, 1, 2};
  std::vector<Prediction> a{{0, 2, 0.5}, {1, 2, 0.5}, {2, 2, 0.6}};
  std::vector<Prediction> b(a.rbegin(), a.rend());
  auto ca = pr_curve(a, gold), cb = pr_curve(b, gold);
  REQUIRE(ca.size() == cb.size());
  for (std::size_t i = 0; i < ca.size(); ++i) {
    CHECK(ca[i].precision == cb[i].precision);
    CHECK(ca[i].recall == cb[i].recall);
  }
}

TEST_CASE("auc examples") {
  std::vector<PRPoint> flat{{1, 0.2, 0}, {1, 0.5, 0}, {1, 0.9, 0}};
  CHECK(auc(flat, 0.4) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(auc(flat, 1.0) == doctest::Approx(0.9).epsilon(1e-15));
  // (0,1) (0.5,1) (0.5,0.5) (1,2/3): 0.5*1 + 0 + 0.5*(0.5+2/3)/2
  std::vector<PRPoint> hand{{1, 0.5, 0}, {0.5, 0.5, 0}, {2.0 / 3.0, 1, 0}};
  CHECK(auc(hand, 1.0) == doctest::Approx(0.5 + 0.25 * (0.5 + 2.0 / 3.0)).epsilon(1e-15));
  // Cut at 0.75 inside the last segment: precision there is 0.5 + 0.5*(1/6).
  CHECK(auc(hand, 0.75) == doctest::Approx(0.5 + 0.25 * (0.5 + 0.5 + 1.0 / 12.0) / 2).epsilon(1e-15));
  CHECK_THROWS_AS(auc(hand, 0.0), DomainError);
  CHECK_THROWS_AS(auc(std::vector<PRPoint>{}, 0.5), DomainError);
}

TEST_CASE("p@n examples") {
  const std::vector<int> gold{1, 0, 2};
  const std::vector<Prediction> preds{{0, 1, 0.9}, {1, 1, 0.8}, {2, 2, 0.7}};
  CHECK(p_at_n(preds, gold, 2) == 0.5);
  CHECK(p_at_n(preds, gold, 1) == 1.0);
  const std::vector<int> all{1, 1, 2};
  for (std::size_t n = 1; n <= 3; ++n) CHECK(p_at_n(preds, all, n) == 1.0);
  CHECK_THROWS_AS(p_at_n(preds, gold, 4), DomainError);
  CHECK_THROWS_AS(p_at_n(preds, gold, 0), DomainError);
}

TEST_CASE("hits@k boundaries and filter") {
  // gold 1 is ranked third
  const std::vector<std::vector<int>> r{{2, 3, 1, 0}};
  const std::vector<int> gold{1}, counts{500, 10, 10, 10};
  CHECK(hits_at_k(r, gold, counts, 100, 2) == 0.0);
  CHECK(hits_at_k(r, gold, counts, 100, 3) == 1.0);
  CHECK(hits_at_k(r, gold, counts, 100, 4) == 1.0);
  CHECK_THROWS_AS(hits_at_k(r, gold, counts, 100, 0), DomainError);
  try {
    hits_at_k(r, gold, counts, 5, 3);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("fewer than 5") != std::string::npos);
  }
  // NA-gold bags never count.
  CHECK_THROWS_AS(hits_at_k(r, std::vector<int>{0}, counts, 1000, 3), DomainError);
}

TEST_CASE("class ranking is by score with ties to the lower id") {
  const std::vector<double> s{0.2, 0.5, 0.2, 0.9, 0.5};
  CHECK(rank_classes(s) == std::vector<int>{3, 1, 4, 0, 2});
}

TEST_CASE("metrics equal brute-force oracles on random instances") {
  Rng rng(42);
  for (int trial = 0; trial < 400; ++trial) {
    auto m = oracle::random_instance(rng);
    std::vector<Prediction> sorted = m.preds;
    sort_predictions(sorted);
    CHECK(sorted == oracle::ranked(m.preds));

    auto curve = pr_curve(m.preds, m.gold);
    auto expect = oracle::pr_curve(m.preds, m.gold);
    REQUIRE(curve.size() == expect.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
      CHECK(std::abs(curve[i].precision - expect[i].precision) <= 1e-9);
      CHECK(std::abs(curve[i].recall - expect[i].recall) <= 1e-9);
      CHECK(curve[i].threshold == expect[i].threshold);
    }
    for (double cap : {0.1, 0.25, 0.4, 0.5, 0.75, 1.0}) {
      CHECK(std::abs(auc(curve, cap) - oracle::auc(expect, cap)) <= 1e-9);
    }
    for (std::size_t n = 1; n <= curve.size(); ++n) {
      CHECK(std::abs(p_at_n(m.preds, m.gold, n) - oracle::p_at_n(m.preds, m.gold, n)) <= 1e-9);
    }
    const auto ranks = rankings(m.scores);
    for (int max_train : {50, 150, 301}) {
      for (std::size_t k = 1; k <= m.scores[0].size(); ++k) {
        bool any = false;
        for (int g : m.gold) any = any || (g != 0 && m.train_counts[g] < max_train);
        if (!any) {
          CHECK_THROWS_AS(hits_at_k(ranks, m.gold, m.train_counts, max_train, k), DomainError);
          continue;
        }
        CHECK(std::abs(hits_at_k(ranks, m.gold, m.train_counts, max_train, k) -
                       oracle::hits_at_k(m.scores, m.gold, m.train_counts, max_train, k)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("metric properties on random instances") {
  Rng rng(43);
  for (int trial = 0; trial < 300; ++trial) {
    auto m = oracle::random_instance(rng);
    auto curve = pr_curve(m.preds, m.gold);
    // Permutation invariance.
    auto shuffled = m.preds;
    shuffle(shuffled, rng);
    auto again = pr_curve(shuffled, m.gold);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      CHECK(again[i].precision == curve[i].precision);
      CHECK(again[i].recall == curve[i].recall);
    }
    // Recall never decreases, precision stays in [0, 1].
    for (std::size_t i = 0; i < curve.size(); ++i) {
      CHECK(curve[i].precision >= 0.0);
      CHECK(curve[i].precision <= 1.0);
      if (i) CHECK(curve[i].recall >= curve[i - 1].recall);
    }
    // AUC grows with the cap, and a cap past the last recall changes nothing.
    double last = 0.0;
    for (double cap = 0.05; cap <= 1.0001; cap += 0.05) {
      const double a = auc(curve, cap);
      CHECK(a >= last - 1e-15);
      last = a;
    }
    CHECK(auc(curve, 1.0) == auc(curve, std::max(curve.back().recall, 1e-9)));
    // Hits@K never drops as K grows and reaches 1 at K = n.
    const auto ranks = rankings(m.scores);
    const std::vector<int> open(m.train_counts.size(), 0);
    bool any = std::any_of(m.gold.begin(), m.gold.end(), [](int g) { return g != 0; });
    if (!any) continue;
    double prev = 0.0;
    for (std::size_t k = 1; k <= m.scores[0].size(); ++k) {
      const double h = hits_at_k(ranks, m.gold, open, 1, k);
      CHECK(h >= prev);
      prev = h;
    }
    CHECK(prev == 1.0);
  }
}

// ---------------------------------------------------------------- reports

namespace {

struct Fixture {
  TypeCatalog cat = testing::tiny_catalog();
  ModelParams params;
  std::vector<Bag> bags;
  RelationTable relations{std::vector<std::string>{"NA", "/r/one", "/r/two"}};

  Fixture() {
    Rng rng(7);
    params = testing::random_model(rng, testing::tiny_config(), 8, cat.type_count(Granularity::kFine), 3, 1.0);
    for (int i = 0; i < 12; ++i) {
      Bag b = testing::tiny_bag(i % 3);
      b.sentences[0].tokens[0] = 2 + i % 5;
      b.sentences[0].raw_text = "sentence " + std::to_string(i);
      if (i % 2) std::swap(b.head, b.tail);
      bags.push_back(b);
    }
  }
};

}  // namespace

TEST_CASE("evaluate combines scoring and metrics consistently") {
  Fixture f;
  EvalOptions opts;
  opts.p_at = {1, 5, 100};
  opts.max_train = {3, 10};
  opts.hits_k = {1, 2};
  const std::vector<int> counts{2, 2, 20};
  auto rep = evaluate(f.bags, f.cat, f.params, VariantFlags{}, counts, opts);
  CHECK(rep.probs == score_bags(f.bags, f.cat, f.params, VariantFlags{}));
  CHECK(rep.predictions.size() == 24);
  CHECK(rep.auc_full == auc(rep.curve, 1.0));
  CHECK(rep.auc_capped == auc(rep.curve, 0.4));
  CHECK(rep.auc_full == heldout_auc(f.bags, f.cat, f.params, VariantFlags{}));
  REQUIRE(rep.p_at.size() == 3);
  CHECK(rep.p_at[0].second.has_value());
  CHECK_FALSE(rep.p_at[2].second.has_value());  // only 24 candidates
  REQUIRE(rep.hits.size() == 4);
  // Only class 1 has fewer than 3 training bags.
  std::vector<int> gold;
  for (const auto& b : f.bags) gold.push_back(b.label);
  CHECK(*rep.hits[0].value == hits_at_k(rankings(rep.probs), gold, counts, 3, 1));

  const std::string text = format_metrics(rep, opts);
  CHECK(text.find("auc: ") != std::string::npos);
  CHECK(text.find("p_at_100: n/a") != std::string::npos);
  CHECK(text.find("# hits@k over relations with fewer than 3 training bags") != std::string::npos);
  CHECK(text.find("# hits@k over relations with fewer than 10 training bags") != std::string::npos);
}

TEST_CASE("reports are written as csv and key: value text") {
  Fixture f;
  auto rep = evaluate(f.bags, f.cat, f.params, VariantFlags{}, {2, 2, 2}, EvalOptions{{0.4}, {1}, {5}, {1}});
  auto dir = std::filesystem::temp_directory_path() / ("dnnre_eval_" + std::to_string(getpid()));
  write_report(dir, rep, EvalOptions{{0.4}, {1}, {5}, {1}});
  const auto preds = slurp(dir / "predictions.csv");
  CHECK(preds.rfind("bag_id,class_id,confidence\n", 0) == 0);
  CHECK(std::count(preds.begin(), preds.end(), '\n') == 25);
  const auto curve = slurp(dir / "pr_curve.csv");
  CHECK(curve.rfind("threshold,precision,recall\n", 0) == 0);
  // Values printed with full precision round-trip.
  const auto first = curve.substr(curve.find('\n') + 1);
  CHECK(std::stod(first.substr(0, first.find(','))) == rep.curve[0].threshold);
  const auto metrics = slurp(dir / "metrics.txt");
  CHECK(metrics == format_metrics(rep, EvalOptions{{0.4}, {1}, {5}, {1}}));
  // A second write is byte-identical.
  write_report(dir / "again", rep, EvalOptions{{0.4}, {1}, {5}, {1}});
  CHECK(slurp(dir / "again" / "predictions.csv") == preds);
  std::filesystem::remove_all(dir);
}

TEST_CASE("case report with identical variants gives identical confidences") {
  Fixture f;
  CaseVariant a{&f.params, VariantFlags{}, "typed"};
  CaseVariant b{&f.params, VariantFlags{}, "again"};
  auto rep = case_report(f.bags[1], f.cat, f.relations, a, b);
  CHECK(rep.confidence_a == rep.confidence_b);
  CHECK(rep.gold == "/r/one");
  CHECK(rep.head_types.size() == 1);  // bag 1 is swapped: head "t"
  CHECK(rep.tail_types.size() == 2);

  VariantFlags untyped;
  untyped.use_types = false;
  auto mixed = case_report(f.bags[1], f.cat, f.relations, a, CaseVariant{&f.params, untyped, "untyped"});
  const auto text = format_case(mixed);
  CHECK(text.find("typed: ") != std::string::npos);
  CHECK(text.find("untyped: ") != std::string::npos);
  CHECK(text.find("/person/coach") != std::string::npos);
  CHECK(text.find("sentence 1") != std::string::npos);
  CHECK(mixed.confidence_a != mixed.confidence_b);
  CHECK_THROWS_AS(case_report(f.bags[0], f.cat, f.relations, CaseVariant{}, b), DomainError);
}
