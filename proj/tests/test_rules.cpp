#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "glassbox/data.hpp"
#include "glassbox/models.hpp"

using namespace glassbox;

namespace {

Matrix column_matrix(const std::vector<double>& values) {
  Matrix x(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) x(i, 0) = values[i];
  return x;
}

}  // namespace

TEST_CASE("rule_covers on the worked rule") {
  // "LungCapacity > 1.37 -> Covid" with instances (lung, co)
  Rule rule;
  rule.premises = {{0, ConditionOp::greater, 1.37}};
  rule.label = 1;
  CHECK(rule_covers(rule, std::vector<double>{3.429, 2.332}));
  CHECK_FALSE(rule_covers(rule, std::vector<double>{0.097, 0.191}));
}

TEST_CASE("a perfectly separable feature yields one single-premise rule per class") {
  const std::vector<double> xs = {1, 2, 3, 4, 6, 7, 8, 9};
  const std::vector<int> y = {0, 0, 0, 0, 1, 1, 1, 1};
  const Matrix x = column_matrix(xs);
  const RuleSet rs = learn_rules(x, y, 2, RulesParams{3, 1});

  REQUIRE(rs.rules.size() == 2);
  CHECK(rs.rules[0].label == 0);
  CHECK(rs.rules[1].label == 1);
  for (const Rule& rule : rs.rules) {
    CHECK(rule.premises.size() == 1);
    CHECK(rule.premises[0].threshold > 4.0);
    CHECK(rule.premises[0].threshold < 6.0);
  }
  for (std::size_t i = 0; i < xs.size(); ++i)
    CHECK(predict_rules(rs, x.row(i)) == y[i]);
}

TEST_CASE("single-class training data produces only the default") {
  const Matrix x = column_matrix({1, 2, 3, 4, 5});
  const std::vector<int> y = {1, 1, 1, 1, 1};
  const RuleSet rs = learn_rules(x, y, 2, RulesParams{3, 1});
  CHECK(rs.rules.empty());
  CHECK(rs.default_label == 1);
  for (std::size_t i = 0; i < 5; ++i) CHECK(predict_rules(rs, x.row(i)) == 1);
}

TEST_CASE("voting schema") {
  RuleSet rs;
  rs.default_label = 0;
  Rule covid_a{{{0, ConditionOp::greater, 0.0}}, 1};
  Rule covid_b{{{1, ConditionOp::greater, 0.0}}, 1};
  Rule no_covid{{{0, ConditionOp::greater, -1.0}}, 0};
  SUBCASE("majority wins") {
    rs.rules = {covid_a, covid_b, no_covid};
    CHECK(predict_rules(rs, std::vector<double>{1.0, 1.0}) == 1);  // 2 vs 1
  }
  SUBCASE("tie goes to the lowest label id") {
    rs.rules = {covid_a, no_covid};
    CHECK(predict_rules(rs, std::vector<double>{1.0, -1.0}) == 0);  // 1 vs 1
  }
  SUBCASE("no covering rule falls back to the default") {
    rs.rules = {covid_a};
    CHECK(predict_rules(rs, std::vector<double>{-5.0, 0.0}) == 0);
  }
}

TEST_CASE("premise cap is honored") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Matrix x(120, 2);
  std::vector<int> y(120);
  for (std::size_t i = 0; i < 120; ++i) {
    x(i, 0) = unit(rng);
    x(i, 1) = unit(rng);
    // a diagonal-ish concept that needs several premises
    y[i] = (x(i, 0) + 0.6 * x(i, 1) > 0.1) ? 1 : 0;
  }
  for (int cap : {1, 2, 3}) {
    const RuleSet rs = learn_rules(x, y, 2, RulesParams{cap, 3});
    for (const Rule& rule : rs.rules) CHECK(rule.premises.size() <= static_cast<std::size_t>(cap));
  }
}

TEST_CASE("min_coverage filters tiny rules") {
  // one isolated positive point: a rule isolating it has coverage 1
  const std::vector<double> xs = {1, 2, 3, 4, 5, 6, 7, 100};
  const std::vector<int> y = {0, 0, 0, 0, 0, 0, 0, 1};
  const RuleSet rs = learn_rules(column_matrix(xs), y, 2, RulesParams{3, 2});
  for (const Rule& rule : rs.rules) CHECK(rule.label != 1);
}

TEST_CASE("rules reject regression tasks at the model level") {
  Schema schema;
  schema.task = {TaskType::regression, 2};
  schema.columns = {{"x", ColumnKind::numeric, {ColumnRole::feature}},
                    {"y", ColumnKind::numeric, {ColumnRole::label}}};
  Column x;
  x.numeric = {1, 2, 3};
  Column y;
  y.numeric = {0.5, 1.5, 2.5};
  const Dataset d(schema, {x, y});
  CHECK_THROWS_AS(fit(RulesParams{}, d), UnsupportedError);
}

TEST_CASE("training predictions are invariant under monotone feature transforms") {
  const Dataset toy = generate_covid_toy(120, 6);
  const Matrix x = toy.feature_matrix();
  const auto y = toy.label_codes();
  const RulesParams params{2, 3};
  const RuleSet plain = learn_rules(x, y, 2, params);

  Matrix warped = x;
  for (std::size_t r = 0; r < x.rows; ++r) {
    warped(r, 0) = std::exp(x(r, 0));             // strictly increasing
    warped(r, 1) = std::pow(x(r, 1), 3.0) * 2.0;  // strictly increasing
  }
  const RuleSet transformed = learn_rules(warped, y, 2, params);
  for (std::size_t r = 0; r < x.rows; ++r)
    CHECK(predict_rules(plain, x.row(r)) == predict_rules(transformed, warped.row(r)));
}

TEST_CASE("learned rules on the toy blobs look like the worked example") {
  const Dataset toy = generate_covid_toy(300, 7);
  const Model m = fit(RulesParams{2, 5}, toy);
  const auto& rs = std::get<RuleSet>(m.impl());
  CHECK_FALSE(rs.rules.empty());
  CHECK(zero_one_loss(m, toy) < 0.15);
  // determinism
  const Model again = fit(RulesParams{2, 5}, toy);
  CHECK(m.to_json().dump() == again.to_json().dump());
}

TEST_CASE("interval form: at most one bound per direction per feature") {
  const Dataset toy = generate_covid_toy(200, 13);
  const RuleSet rs = learn_rules(toy.feature_matrix(), toy.label_codes(), 2, RulesParams{4, 3});
  for (const Rule& rule : rs.rules) {
    std::map<std::pair<std::size_t, ConditionOp>, int> seen;
    for (const Condition& c : rule.premises) seen[{c.feature, c.op}]++;
    for (const auto& [key, count] : seen) CHECK(count == 1);
  }
}
