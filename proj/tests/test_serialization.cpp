#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <random>

#include "doctest.h"
#include "glassbox/data.hpp"
#include "glassbox/models.hpp"

using namespace glassbox;
namespace fs = std::filesystem;

namespace {

const std::vector<FitSpec>& all_specs() {
  static const std::vector<FitSpec> specs = {
      LogisticParams{0.01, 0.005, 500, 1e-8},
      GamParams{6, {{0, 1}}, 8},
      RulesParams{2, 4},
      TreeParams{3, 2},
      KnnParams{7, Metric::manhattan},
  };
  return specs;
}

}  // namespace

TEST_CASE("every family round-trips value-exact through json") {
  const Dataset toy = generate_covid_toy(150, 31);
  for (const FitSpec& spec : all_specs()) {
    const Model original = fit(spec, toy);
    const Model restored = Model::from_json(original.to_json());
    // bit-exact structural equality via the canonical dump
    CHECK(original.to_json().dump() == restored.to_json().dump());

    // and behavioural equality on fresh instances
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss(4.0, 2.0);
    for (int i = 0; i < 200; ++i) {
      const std::vector<double> x = {gauss(rng), gauss(rng)};
      const Prediction a = predict(original, x);
      const Prediction b = predict(restored, x);
      CHECK(a.label == b.label);
      CHECK(a.value == b.value);
      CHECK(a.confidence == b.confidence);
    }
  }
}

TEST_CASE("save/load through a file preserves bytes") {
  const Dataset toy = generate_covid_toy(80, 5);
  const Model model = fit(TreeParams{3, 1}, toy);
  const fs::path path = fs::temp_directory_path() / "gb_model_roundtrip.json";
  model.save(path);
  const Model loaded = Model::load(path);
  CHECK(model.to_json().dump() == loaded.to_json().dump());

  // a second save writes identical bytes
  const fs::path path2 = fs::temp_directory_path() / "gb_model_roundtrip2.json";
  loaded.save(path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  const std::string bytes_a((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
  const std::string bytes_b((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
  CHECK(bytes_a == bytes_b);
}

TEST_CASE("schema fingerprint guards prediction inputs") {
  const Dataset toy = generate_covid_toy(60, 9);
  const Model model = fit(KnnParams{3, Metric::euclidean}, toy);

  Schema other = toy.schema();
  other.columns[0].name = "Renamed";
  Column lung = toy.columns()[0];
  lung.spec.name = "Renamed";
  const Dataset renamed(other, {lung, toy.columns()[1], toy.columns()[2]});
  CHECK_THROWS_AS(predict_all(model, renamed), ArgumentError);
}

TEST_CASE("loading garbage fails cleanly") {
  const fs::path path = fs::temp_directory_path() / "gb_not_a_model.json";
  {
    std::ofstream out(path);
    out << "{\"format\": \"something-else\"}";
  }
  CHECK_THROWS_AS(Model::load(path), IngestionError);
  const fs::path missing = fs::temp_directory_path() / "gb_missing_file.json";
  fs::remove(missing);
  CHECK_THROWS_AS(Model::load(missing), IngestionError);
}

TEST_CASE("predict dispatch matches the family-level predictors") {
  const Dataset toy = generate_covid_toy(120, 22);
  const Matrix x = toy.feature_matrix();

  const Model linear = fit(LogisticParams{}, toy);
  const Model tree = fit(TreeParams{3, 1}, toy);
  const Model knn = fit(KnnParams{5, Metric::euclidean}, toy);
  for (std::size_t r = 0; r < 30; ++r) {
    CHECK(predict(linear, x.row(r)).value ==
          predict_linear(std::get<LinearModel>(linear.impl()), x.row(r)));
    CHECK(predict(tree, x.row(r)).label ==
          predict_tree(std::get<DecisionTree>(tree.impl()), x.row(r)));
    CHECK(predict(knn, x.row(r)).label ==
          predict_knn(std::get<InstanceModel>(knn.impl()), x.row(r)).label);
  }

  SUBCASE("arity mismatch is an argument error") {
    CHECK_THROWS_AS(predict(tree, std::vector<double>{1.0}), ArgumentError);
    CHECK_THROWS_AS(predict(tree, std::vector<double>{1.0, 2.0, 3.0}), ArgumentError);
  }
  SUBCASE("non-finite instances are rejected") {
    CHECK_THROWS_AS(
        predict(tree, std::vector<double>{std::numeric_limits<double>::infinity(), 0.0}),
        ArgumentError);
  }
}

TEST_CASE("anomaly-detection tasks behave as binary classification") {
  Schema schema;
  schema.task = {TaskType::anomaly_detection, 2};
  schema.columns = {{"x", ColumnKind::numeric, {ColumnRole::feature}},
                    {"flag", ColumnKind::categorical, {ColumnRole::label}}};
  Column x, flag;
  flag.intern("normal");   // id 0
  flag.intern("anomaly");  // id 1, the positive class
  auto rng = seeded_rng(4, 0);
  std::normal_distribution<double> body(0.0, 1.0);
  for (int i = 0; i < 95; ++i) {
    x.numeric.push_back(body(rng));
    flag.codes.push_back(0);
  }
  for (int i = 0; i < 5; ++i) {
    x.numeric.push_back(10.0 + body(rng));  // far-out anomalies
    flag.codes.push_back(1);
  }
  const Dataset d(schema, {x, flag});
  const Model tree = fit(TreeParams{2, 1}, d);
  CHECK(zero_one_loss(tree, d) == 0.0);
  CHECK(predict(tree, std::vector<double>{11.0}).label == 1);
  CHECK(predict(tree, std::vector<double>{0.5}).label == 0);
}

TEST_CASE("multiclass rules cover three clusters") {
  Schema schema;
  schema.task = {TaskType::multiclass_classification, 3};
  schema.columns = {{"x", ColumnKind::numeric, {ColumnRole::feature}},
                    {"y", ColumnKind::categorical, {ColumnRole::label}}};
  Column x, y;
  y.intern("low");
  y.intern("mid");
  y.intern("high");
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 12; ++i) {
      x.numeric.push_back(c * 10.0 + i * 0.2);
      y.codes.push_back(c);
    }
  const Dataset d(schema, {x, y});
  const Model rules = fit(RulesParams{2, 3}, d);
  CHECK(zero_one_loss(rules, d) == 0.0);
}

TEST_CASE("fit specs round-trip") {
  for (const FitSpec& spec : all_specs()) {
    const FitSpec back = fit_spec_from_json(fit_spec_to_json(spec));
    CHECK(fit_spec_to_json(back) == fit_spec_to_json(spec));
    CHECK(family_name(back) == family_name(spec));
  }
}
