#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "glassbox/data.hpp"
#include "glassbox/explain.hpp"
#include "glassbox/models.hpp"

using namespace glassbox;

namespace {

Schema two_feature_schema() {
  Schema schema;
  schema.task = {TaskType::binary_classification, 2};
  schema.columns = {{"f1", ColumnKind::numeric, {ColumnRole::feature}},
                    {"f2", ColumnKind::numeric, {ColumnRole::feature}},
                    {"y", ColumnKind::categorical, {ColumnRole::label}}};
  return schema;
}

Model wrap(Model::Impl impl, FitSpec spec) {
  return Model(std::move(impl), two_feature_schema(), {"f1", "f2"}, {"neg", "pos"},
               std::move(spec));
}

}  // namespace

TEST_CASE("global importance of a linear model is its weight vector") {
  LinearModel linear;
  linear.intercept = 0.5;
  linear.weights = {2.0, -1.0};
  const Model m = wrap(linear, LogisticParams{});
  const FeatureAttribution fa = global_importance(m);
  REQUIRE(fa.contributions.size() == 2);
  CHECK(fa.contributions[0].feature == "f1");
  CHECK(fa.contributions[0].value == 2.0);
  CHECK(fa.contributions[1].feature == "f2");
  CHECK(fa.contributions[1].value == -1.0);
  CHECK(fa.intercept == 0.5);
}

TEST_CASE("local importance multiplies weight by value and sums to the score") {
  LinearModel linear;
  linear.intercept = 0.0;
  linear.weights = {2.0, -1.0};
  const Model m = wrap(linear, LogisticParams{});

  const FeatureAttribution fa = local_importance(m, std::vector<double>{3.0, 4.0});
  CHECK(fa.contributions[0].value == doctest::Approx(6.0));
  CHECK(fa.contributions[1].value == doctest::Approx(-4.0));
  CHECK(fa.score == doctest::Approx(2.0));

  SUBCASE("zero instance contributes nothing") {
    const FeatureAttribution zero = local_importance(m, std::vector<double>{0.0, 0.0});
    CHECK(zero.contributions[0].value == 0.0);
    CHECK(zero.contributions[1].value == 0.0);
    CHECK(zero.score == zero.intercept);
  }
}

TEST_CASE("linear attribution faithfulness on 1000 random instances") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss(0.0, 2.0);
  LinearModel linear;
  linear.link = Link::logistic;
  linear.intercept = gauss(rng);
  linear.weights = {gauss(rng), gauss(rng)};
  const Model m = wrap(linear, LogisticParams{});
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> x = {gauss(rng), gauss(rng)};
    const FeatureAttribution fa = local_importance(m, x);
    double sum = fa.intercept;
    for (const auto& entry : fa.contributions) sum += entry.value;
    const double score = linear.intercept + linear.weights[0] * x[0] + linear.weights[1] * x[1];
    CHECK(std::abs(sum - score) < 1e-9);
    CHECK(std::abs(fa.score - score) < 1e-9);
  }
}

TEST_CASE("gam attributions sum to the pre-link score") {
  const Dataset toy = generate_covid_toy(200, 3);
  const Model m = fit(GamParams{8, {{0, 1}}, 8}, toy);
  const auto& gam = std::get<GamModel>(m.impl());
  const Matrix x = toy.feature_matrix();
  for (std::size_t r = 0; r < 100; ++r) {
    const FeatureAttribution fa = local_importance(m, x.row(r));
    double sum = fa.intercept;
    for (const auto& entry : fa.contributions) sum += entry.value;
    double score = gam.intercept;
    for (const auto& s : gam.shapes) score += s.evaluate(x(r, s.feature));
    for (const auto& s : gam.interactions) score += s.evaluate(x(r, s.feature_a), x(r, s.feature_b));
    CHECK(std::abs(sum - score) < 1e-9);
  }
}

TEST_CASE("gam global importance is zero for an all-zero shape") {
  GamModel gam;
  gam.shapes.push_back({0, {0, 1, 2}, {1.0, -1.0}, {5, 5}});
  gam.shapes.push_back({1, {0, 1, 2}, {0.0, 0.0}, {5, 5}});
  const Model m = wrap(gam, GamParams{});
  const FeatureAttribution fa = global_importance(m);
  CHECK(fa.contributions[0].value == doctest::Approx(1.0));
  CHECK(fa.contributions[1].value == 0.0);
}

TEST_CASE("fitted toy logistic model weights lung capacity negatively") {
  const Dataset toy = generate_covid_toy(1000, 0);
  auto [scaled, params] = standardize(toy);
  const Model m = fit(LogisticParams{}, scaled);
  const FeatureAttribution fa = global_importance(m);
  REQUIRE(fa.contributions[0].feature == "LungCapacity");
  CHECK(std::abs(fa.contributions[0].value) > 0.0);
  CHECK(fa.contributions[0].value < 0.0);  // higher capacity means healthy
}

TEST_CASE("unsupported families route to rule or case explanations") {
  const Dataset toy = generate_covid_toy(60, 2);
  const Model tree = fit(TreeParams{2, 1}, toy);
  CHECK_THROWS_AS(global_importance(tree), UnsupportedError);
  CHECK_THROWS_AS(local_importance(tree, std::vector<double>{0.0, 0.0}), UnsupportedError);
}

TEST_CASE("tree explanation returns the walked path") {
  // worked structure: CO <= 0.324 then lung <= -1.02 gives the healthy leaf
  DecisionTree t;
  t.nodes.resize(9);
  t.root = 0;
  t.depth = 3;
  t.nodes[0] = {false, 1, 0.324, 1, 2, 0, {}};
  t.nodes[1] = {false, 0, -1.02, 3, 4, 0, {}};
  t.nodes[2] = {false, 0, 0.5, 5, 6, 0, {}};
  t.nodes[3] = {true, 0, 0, -1, -1, 0, {37, 2}};
  t.nodes[4] = {true, 0, 0, -1, -1, 1, {5, 20}};
  t.nodes[5] = {false, 1, 1.0, 7, 8, 0, {}};
  t.nodes[6] = {true, 0, 0, -1, -1, 0, {11, 3}};
  t.nodes[7] = {true, 0, 0, -1, -1, 1, {1, 14}};
  t.nodes[8] = {true, 0, 0, -1, -1, 1, {2, 15}};

  Schema schema;
  schema.task = {TaskType::binary_classification, 2};
  schema.columns = {{"LungCapacity", ColumnKind::numeric, {ColumnRole::feature}},
                    {"COLevel", ColumnKind::numeric, {ColumnRole::feature}},
                    {"Covid", ColumnKind::categorical, {ColumnRole::label}}};
  const Model m(t, schema, {"LungCapacity", "COLevel"}, {"NoCovid", "Covid"}, TreeParams{});

  const std::vector<double> x = {-1.568, 0.064};
  const Explanation e = explain_prediction(m, x);
  const auto& re = std::get<RuleExplanation>(e.payload);
  CHECK(e.label == 0);
  REQUIRE(re.conditions.size() == 2);
  CHECK(re.conditions[0].feature == 1);
  CHECK(re.conditions[0].op == ConditionOp::less_eq);
  CHECK(re.conditions[0].threshold == 0.324);
  CHECK(re.conditions[1].feature == 0);
  CHECK(re.conditions[1].op == ConditionOp::less_eq);
  CHECK(re.conditions[1].threshold == -1.02);

  SUBCASE("path conditions re-evaluate to true and the label matches predict") {
    for (const Condition& c : re.conditions) CHECK(c.holds(x));
    CHECK(e.label == predict_tree(t, x));
  }
  SUBCASE("local path length is bounded by the global depth") {
    const ComplexityReport report = complexity(m, std::span<const double>(x));
    CHECK(report.local == 2.0);
    CHECK(report.detail.at("depth") == 3.0);
    CHECK(report.local <= report.detail.at("depth"));
  }
}

TEST_CASE("tree path faithfulness on fitted models") {
  const Dataset toy = generate_covid_toy(300, 11);
  const Model m = fit(TreeParams{4, 2}, toy);
  const auto& tree = std::get<DecisionTree>(m.impl());
  const Matrix x = toy.feature_matrix();
  for (std::size_t r = 0; r < x.rows; ++r) {
    const Explanation e = explain_prediction(m, x.row(r));
    const auto& re = std::get<RuleExplanation>(e.payload);
    for (const Condition& c : re.conditions) CHECK(c.holds(x.row(r)));
    CHECK(e.label == predict_tree(tree, x.row(r)));
    CHECK(re.conditions.size() <= static_cast<std::size_t>(tree.depth));
  }
}

TEST_CASE("rule-set explanation marks the default case") {
  RuleSet rs;
  rs.default_label = 1;
  rs.default_frequency = 0.6;
  rs.rules.push_back({{{0, ConditionOp::greater, 10.0}}, 0});
  const Model m = wrap(rs, RulesParams{});
  const Explanation e = explain_prediction(m, std::vector<double>{0.0, 0.0});
  const auto& re = std::get<RuleExplanation>(e.payload);
  CHECK(re.used_default);
  CHECK(re.conditions.empty());
  CHECK(e.label == 1);
}

TEST_CASE("knn explanation lists the diagnostic cases") {
  InstanceModel knn;
  knn.memory_x = Matrix(5, 2);
  const double rows[5][2] = {
      {4.72, 6.09}, {4.70, 6.08}, {4.83, 6.08}, {4.76, 6.00}, {4.57, 6.00}};
  for (std::size_t r = 0; r < 5; ++r) {
    knn.memory_x(r, 0) = rows[r][0];
    knn.memory_x(r, 1) = rows[r][1];
  }
  knn.memory_y = {0, 0, 0, 0, 1};
  knn.k = 5;
  knn.metric = Metric::manhattan;

  Schema schema;
  schema.task = {TaskType::binary_classification, 2};
  schema.columns = {{"LungCapacity", ColumnKind::numeric, {ColumnRole::feature}},
                    {"COLevel", ColumnKind::numeric, {ColumnRole::feature}},
                    {"Covid", ColumnKind::categorical, {ColumnRole::label}}};
  const Model m(knn, schema, {"LungCapacity", "COLevel"}, {"NoCovid", "Covid"},
                KnnParams{5, Metric::manhattan});

  const Explanation e = explain_prediction(m, std::vector<double>{4.71, 6.09});
  const auto& ce = std::get<CaseExplanation>(e.payload);
  CHECK(e.label == 0);
  REQUIRE(ce.cases.size() == 5);
  CHECK(ce.tally.at(0) == 4);
  CHECK(ce.tally.at(1) == 1);
  for (std::size_t i = 1; i < ce.cases.size(); ++i)
    CHECK(ce.cases[i - 1].distance <= ce.cases[i].distance);
}

TEST_CASE("complexity details per family") {
  SUBCASE("linear sparsity counts") {
    LinearModel linear;
    linear.weights = {0.0, 2.0, 0.0, -1.0};
    Schema schema;
    schema.task = {TaskType::binary_classification, 2};
    schema.columns = {{"a", ColumnKind::numeric, {ColumnRole::feature}},
                      {"b", ColumnKind::numeric, {ColumnRole::feature}},
                      {"c", ColumnKind::numeric, {ColumnRole::feature}},
                      {"d", ColumnKind::numeric, {ColumnRole::feature}},
                      {"y", ColumnKind::categorical, {ColumnRole::label}}};
    const Model m(linear, schema, {"a", "b", "c", "d"}, {"n", "p"}, LogisticParams{});
    const ComplexityReport report = complexity(m);
    CHECK(report.detail.at("nonzero_weights") == 2.0);
    CHECK(report.detail.at("zero_weights") == 2.0);
    CHECK(report.detail.at("l1_norm") == doctest::Approx(3.0));
    CHECK(report.global == 2.0);
  }
  SUBCASE("knn local k and global memory") {
    const Dataset toy = generate_covid_toy(100, 1);
    const Model m = fit(KnnParams{5, Metric::euclidean}, toy);
    const ComplexityReport report = complexity(m);
    CHECK(report.local == 5.0);
    CHECK(report.global == 100.0);
  }
  SUBCASE("rule counts") {
    RuleSet rs;
    rs.rules.push_back({{{0, ConditionOp::greater, 1.0}}, 0});
    rs.rules.push_back({{{0, ConditionOp::less_eq, 1.0}, {1, ConditionOp::greater, 0.0}}, 1});
    const Model m = wrap(rs, RulesParams{});
    const ComplexityReport report = complexity(m);
    CHECK(report.global == 2.0);
    CHECK(report.detail.at("premise_total") == 3.0);
    CHECK(report.detail.at("premise_max") == 2.0);
    CHECK(report.local == 2.0);  // worst case without an instance
  }
}

TEST_CASE("complexity grows monotonically with structure") {
  RuleSet rs;
  rs.rules.push_back({{{0, ConditionOp::greater, 1.0}}, 0});
  const Model one = wrap(rs, RulesParams{});
  rs.rules.push_back({{{1, ConditionOp::less_eq, 0.5}}, 1});
  const Model two = wrap(rs, RulesParams{});
  CHECK(complexity(two).global > complexity(one).global);

  const Dataset toy = generate_covid_toy(300, 6);
  const Model shallow = fit(TreeParams{2, 1}, toy);
  const Model deep = fit(TreeParams{5, 1}, toy);
  CHECK(complexity(deep).detail.at("depth") >= complexity(shallow).detail.at("depth"));
}

TEST_CASE("appending an always-zero feature leaves the nonzero count unchanged") {
  const Dataset toy = generate_covid_toy(200, 15);
  LogisticParams params;
  params.l1 = 0.02;
  const Model base = fit(params, toy);

  Schema padded_schema = toy.schema();
  padded_schema.columns.insert(padded_schema.columns.end() - 1,
                               {"ZeroPad", ColumnKind::numeric, {ColumnRole::feature}});
  std::vector<Column> cols = toy.columns();
  Column zero;
  zero.numeric.assign(toy.n_rows(), 0.0);
  cols.insert(cols.end() - 1, zero);
  const Dataset padded(padded_schema, std::move(cols));
  const Model with_pad = fit(params, padded);

  CHECK(complexity(base).detail.at("nonzero_weights") ==
        complexity(with_pad).detail.at("nonzero_weights"));
}

TEST_CASE("explanation label always equals the prediction") {
  const Dataset toy = generate_covid_toy(150, 19);
  const Matrix x = toy.feature_matrix();
  for (const FitSpec spec :
       {FitSpec(LogisticParams{}), FitSpec(GamParams{6, {}, 6}), FitSpec(RulesParams{2, 3}),
        FitSpec(TreeParams{3, 1}), FitSpec(KnnParams{5, Metric::euclidean})}) {
    const Model m = fit(spec, toy);
    for (std::size_t r = 0; r < 40; ++r) {
      const Explanation e = explain_prediction(m, x.row(r));
      CHECK(e.label == predict(m, x.row(r)).label);
    }
  }
}
