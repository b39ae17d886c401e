#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "glassbox/fairness.hpp"
#include "oracles.hpp"

using namespace glassbox;

TEST_CASE("statistical disparity worked values") {
  SUBCASE("constant positive predictor has zero disparity") {
    CHECK(statistical_disparity({1, 1, 1, 1}, {1, 1, 0, 0}) == 0.0);
  }
  SUBCASE("counting example") {
    // s=1 group predicts 1/2 positive, s=0 group predicts 2/2
    CHECK(statistical_disparity({1, 0, 1, 1}, {1, 1, 0, 0}) == doctest::Approx(-0.5));
  }
  SUBCASE("an empty group is an undefined-metric error") {
    CHECK_THROWS_AS(statistical_disparity({1, 0}, {1, 1}), UndefinedMetricError);
  }
}

TEST_CASE("conditional statistical disparity") {
  SUBCASE("a single stratum reduces to plain disparity") {
    const std::vector<int> yhat = {1, 0, 1, 1};
    const std::vector<int> s = {1, 1, 0, 0};
    const CsdResult csd = conditional_statistical_disparity(yhat, s, {7, 7, 7, 7});
    REQUIRE(csd.strata.size() == 1);
    CHECK(csd.strata[0].disparity.value == doctest::Approx(statistical_disparity(yhat, s)));
  }
  SUBCASE("balanced strata cancel a marginal disparity (Simpson-style)") {
    std::vector<int> yhat, s;
    std::vector<double> r;
    auto add = [&](int count, int pos, int group, double stratum) {
      for (int i = 0; i < count; ++i) {
        yhat.push_back(i < pos ? 1 : 0);
        s.push_back(group);
        r.push_back(stratum);
      }
    };
    // stratum 0: both groups at rate 0.8; stratum 1: both at rate 0.2
    add(10, 8, 1, 0.0);
    add(40, 32, 0, 0.0);
    add(40, 8, 1, 1.0);
    add(10, 2, 0, 1.0);

    const double sd = statistical_disparity(yhat, s);
    CHECK(std::abs(sd) > 0.3);  // the unconditional view looks unfair
    const CsdResult csd = conditional_statistical_disparity(yhat, s, r);
    CHECK(csd.max_abs == doctest::Approx(0.0));
    CHECK(csd.weighted_mean == doctest::Approx(0.0));
    for (const auto& stratum : csd.strata) CHECK(stratum.disparity.value == doctest::Approx(0.0));
  }
  SUBCASE("strata missing a group are excluded and listed") {
    const std::vector<int> yhat = {1, 0, 1, 0};
    const std::vector<int> s = {1, 1, 1, 0};
    const CsdResult csd = conditional_statistical_disparity(yhat, s, {0, 0, 1, 1});
    REQUIRE(csd.strata.size() == 2);
    CHECK_FALSE(csd.strata[0].disparity.defined);  // r=0 has no s=0 members
    CHECK(csd.strata[1].disparity.defined);
  }
  SUBCASE("no usable stratum throws") {
    CHECK_THROWS_AS(conditional_statistical_disparity({1, 0}, {1, 0}, {0, 1}),
                    UndefinedMetricError);
  }
}

TEST_CASE("error rate gaps worked example") {
  const std::vector<int> y = {1, 1, 0, 0, 1, 1, 0, 0};
  const std::vector<int> s = {1, 1, 1, 1, 0, 0, 0, 0};
  const std::vector<int> yhat = {1, 0, 1, 0, 1, 1, 0, 0};
  const auto [tpr, fpr] = error_rate_gaps(y, yhat, s);
  CHECK(tpr.value == doctest::Approx(-0.5));
  CHECK(fpr.value == doctest::Approx(0.5));

  SUBCASE("a perfect predictor has zero gaps") {
    const auto [t0, f0] = error_rate_gaps(y, y, s);
    CHECK(t0.value == 0.0);
    CHECK(f0.value == 0.0);
  }
  SUBCASE("missing positives leave only the fpr defined") {
    const std::vector<int> y2 = {0, 0, 1, 0};
    const std::vector<int> s2 = {1, 1, 0, 0};
    const auto [t2, f2] = error_rate_gaps(y2, {0, 1, 1, 0}, s2);
    CHECK_FALSE(t2.defined);
    CHECK(t2.reason.find("S=1") != std::string::npos);
    CHECK(f2.defined);
  }
}

TEST_CASE("predictive value gaps worked example") {
  // group 1: TP=1 FP=1 (PPV 1/2); group 0: TP=2 FP=0 (PPV 1)
  const std::vector<int> y = {1, 0, 1, 1, 0, 0};
  const std::vector<int> yhat = {1, 1, 1, 1, 0, 0};
  const std::vector<int> s = {1, 1, 0, 0, 1, 0};
  const auto [ppv, npv] = predictive_value_gaps(y, yhat, s);
  CHECK(ppv.value == doctest::Approx(-0.5));
  CHECK(npv.defined);

  SUBCASE("no positive predictions in a group leaves ppv undefined") {
    const auto [p2, n2] = predictive_value_gaps({1, 0, 1, 0}, {0, 0, 1, 0}, {1, 1, 0, 0});
    CHECK_FALSE(p2.defined);
    CHECK(n2.defined);
  }
  SUBCASE("perfect predictor") {
    const auto [p3, n3] = predictive_value_gaps(y, y, s);
    CHECK(p3.value == 0.0);
    CHECK(n3.value == 0.0);
  }
}

TEST_CASE("audit_fairness fills the report and delta") {
  const std::vector<int> y = {1, 1, 0, 0, 1, 1, 0, 0};
  const std::vector<int> s = {1, 1, 1, 1, 0, 0, 0, 0};
  const std::vector<int> yhat = {1, 0, 1, 0, 1, 1, 0, 0};
  const FairnessReport report = audit_fairness(y, yhat, s);
  CHECK(report.delta == doctest::Approx(0.5));
  CHECK(report.sd.defined);

  SUBCASE("verification thresholds are closed bounds") {
    CHECK(verify_fairness(report, 0.5));
    CHECK_FALSE(verify_fairness(report, 0.4));
    CHECK_THROWS_AS(verify_fairness(report, -0.1), ArgumentError);
  }
  SUBCASE("perfect predictor verifies at any tau") {
    const FairnessReport perfect = audit_fairness(y, y, s);
    CHECK(perfect.delta == 0.0);
    CHECK(verify_fairness(perfect, 0.0));
  }
  SUBCASE("single-stratum csd equals sd") {
    const FairnessReport with_r = audit_fairness(y, yhat, s, std::vector<double>(8, 1.0));
    CHECK(with_r.csd_max_abs.value == doctest::Approx(std::abs(with_r.sd.value)));
  }
  SUBCASE("non-binary sensitive vector is an argument error") {
    CHECK_THROWS_AS(audit_fairness(y, yhat, {0, 1, 2, 0, 1, 0, 1, 0}), ArgumentError);
  }
}

TEST_CASE("group swap negates gaps and preserves delta") {
  std::mt19937_64 rng(23);
  std::bernoulli_distribution coin(0.5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> y(60), yhat(60), s(60);
    for (int i = 0; i < 60; ++i) {
      y[i] = coin(rng);
      yhat[i] = coin(rng);
      s[i] = coin(rng);
    }
    std::vector<int> flipped(60);
    for (int i = 0; i < 60; ++i) flipped[i] = 1 - s[i];
    const FairnessReport a = audit_fairness(y, yhat, s);
    const FairnessReport b = audit_fairness(y, yhat, flipped);
    if (a.sd.defined && b.sd.defined) CHECK(a.sd.value == doctest::Approx(-b.sd.value));
    if (a.tpr_gap.defined && b.tpr_gap.defined)
      CHECK(a.tpr_gap.value == doctest::Approx(-b.tpr_gap.value));
    CHECK(a.delta == doctest::Approx(b.delta));
  }
}

TEST_CASE("permutation null drives |SD| toward zero") {
  std::mt19937_64 rng(5);
  std::vector<int> s(120), yhat(120);
  for (int i = 0; i < 120; ++i) {
    s[i] = i < 60 ? 1 : 0;  // balanced groups of 60
    yhat[i] = (i % 3) == 0 ? 1 : 0;
  }
  double total = 0.0;
  for (int perm = 0; perm < 200; ++perm) {
    std::shuffle(yhat.begin(), yhat.end(), rng);
    total += std::abs(statistical_disparity(yhat, s));
  }
  CHECK(total / 200.0 < 0.15);
}

TEST_CASE("all metrics match the counting oracle on random tables") {
  std::mt19937_64 rng(77);
  for (int table = 0; table < 100; ++table) {
    std::uniform_int_distribution<int> size_dist(2, 400);
    const int n = size_dist(rng);
    std::bernoulli_distribution label(0.3 + 0.4 * std::uniform_real_distribution<>(0, 1)(rng));
    std::bernoulli_distribution pred(0.5);
    std::bernoulli_distribution group(0.5);
    std::vector<int> y(n), yhat(n), s(n);
    for (int i = 0; i < n; ++i) {
      y[i] = label(rng);
      yhat[i] = pred(rng);
      s[i] = group(rng);
    }

    const auto oracle_sd = oracles::sd_oracle(yhat, s);
    const auto counts = oracles::count_table(y, yhat, s);
    const FairnessReport report = audit_fairness(y, yhat, s);

    if (oracle_sd) {
      REQUIRE(report.sd.defined);
      CHECK(std::abs(report.sd.value - *oracle_sd) < 1e-12);
    } else {
      CHECK_FALSE(report.sd.defined);
    }
    const auto tpr = oracles::rate_gap(counts, 1);
    if (tpr) {
      REQUIRE(report.tpr_gap.defined);
      CHECK(std::abs(report.tpr_gap.value - *tpr) < 1e-12);
    } else {
      CHECK_FALSE(report.tpr_gap.defined);
    }
    const auto fpr = oracles::rate_gap(counts, 0);
    if (fpr) CHECK(std::abs(report.fpr_gap.value - *fpr) < 1e-12);
    const auto ppv = oracles::predictive_gap(counts, 1);
    if (ppv) CHECK(std::abs(report.ppv_gap.value - *ppv) < 1e-12);
    const auto npv = oracles::predictive_gap(counts, 0);
    if (npv) CHECK(std::abs(report.npv_gap.value - *npv) < 1e-12);
  }
}

TEST_CASE("constant predictor on balanced base rates has delta zero") {
  // equal base rates across groups, constant positive prediction
  const std::vector<int> y = {1, 0, 1, 0, 1, 0, 1, 0};
  const std::vector<int> s = {1, 1, 1, 1, 0, 0, 0, 0};
  const std::vector<int> yhat(8, 1);
  const FairnessReport report = audit_fairness(y, yhat, s);
  CHECK(report.delta == 0.0);
  CHECK_FALSE(report.npv_gap.defined);  // no negative predictions anywhere
}
