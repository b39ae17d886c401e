#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "glassbox/data.hpp"
#include "glassbox/models.hpp"

using namespace glassbox;

namespace {

// The five-neighbor diagnostic memory (lung capacity, CO level); label 0 is
// NoCovid, 1 is Covid.
InstanceModel diagnostic_memory(Metric metric, std::size_t k) {
  InstanceModel m;
  m.memory_x = Matrix(5, 2);
  const double rows[5][2] = {
      {4.72, 6.09}, {4.70, 6.08}, {4.83, 6.08}, {4.76, 6.00}, {4.57, 6.00}};
  for (std::size_t r = 0; r < 5; ++r) {
    m.memory_x(r, 0) = rows[r][0];
    m.memory_x(r, 1) = rows[r][1];
  }
  m.memory_y = {0, 0, 0, 0, 1};
  m.k = k;
  m.metric = metric;
  return m;
}

}  // namespace

TEST_CASE("distance metrics") {
  const std::vector<double> a = {1.0, 2.0};
  const std::vector<double> b = {4.0, 6.0};
  CHECK(instance_distance(Metric::euclidean, a, b) == doctest::Approx(5.0));
  CHECK(instance_distance(Metric::manhattan, a, b) == doctest::Approx(7.0));
  const std::vector<double> c = {1.0, 0.0};
  const std::vector<double> d = {0.0, 1.0};
  CHECK(instance_distance(Metric::cosine, c, d) == doctest::Approx(1.0));
  CHECK(instance_distance(Metric::cosine, c, c) == doctest::Approx(0.0));
}

TEST_CASE("the five-neighbor memory reproduces the worked diagnosis") {
  const InstanceModel m = diagnostic_memory(Metric::manhattan, 5);
  const KnnResult result = predict_knn(m, std::vector<double>{4.71, 6.09});

  CHECK(result.label == 0);  // NoCovid by a 4:1 vote
  REQUIRE(result.retrieved.size() == 5);
  const double expected[5] = {0.01, 0.02, 0.13, 0.14, 0.23};
  for (std::size_t i = 0; i < 5; ++i)
    CHECK(result.retrieved[i].distance == doctest::Approx(expected[i]).epsilon(1e-9));
  std::size_t covid_votes = 0;
  for (const auto& rc : result.retrieved) covid_votes += static_cast<std::size_t>(rc.label);
  CHECK(covid_votes == 1);
}

TEST_CASE("retrieved case lists are sorted ascending by distance") {
  const InstanceModel m = diagnostic_memory(Metric::euclidean, 5);
  const KnnResult result = predict_knn(m, std::vector<double>{4.71, 6.09});
  for (std::size_t i = 1; i < result.retrieved.size(); ++i)
    CHECK(result.retrieved[i - 1].distance <= result.retrieved[i].distance);
}

TEST_CASE("query equal to a memory instance with k=1") {
  const InstanceModel m = diagnostic_memory(Metric::euclidean, 1);
  const KnnResult result = predict_knn(m, std::vector<double>{4.57, 6.00});
  CHECK(result.label == 1);
  CHECK(result.retrieved[0].distance == 0.0);
  CHECK(result.retrieved[0].memory_index == 4);
}

TEST_CASE("k equal to memory size gives the global majority everywhere") {
  const InstanceModel m = diagnostic_memory(Metric::euclidean, 5);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-10.0, 10.0);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> x = {unit(rng), unit(rng)};
    CHECK(predict_knn(m, x).label == 0);  // memory majority is NoCovid
  }
}

TEST_CASE("distance ties break toward the lower memory index") {
  InstanceModel m;
  m.memory_x = Matrix(3, 1);
  m.memory_x(0, 0) = 1.0;
  m.memory_x(1, 0) = -1.0;  // same distance from 0 as index 0
  m.memory_x(2, 0) = 5.0;
  m.memory_y = {1, 0, 0};
  m.k = 1;
  m.metric = Metric::euclidean;
  const KnnResult result = predict_knn(m, std::vector<double>{0.0});
  CHECK(result.retrieved[0].memory_index == 0);
  CHECK(result.label == 1);
}

TEST_CASE("vote ties break toward the lower label id") {
  InstanceModel m;
  m.memory_x = Matrix(4, 1);
  for (std::size_t i = 0; i < 4; ++i) m.memory_x(i, 0) = static_cast<double>(i);
  m.memory_y = {1, 0, 1, 0};
  m.k = 4;
  m.metric = Metric::euclidean;
  CHECK(predict_knn(m, std::vector<double>{1.5}).label == 0);
}

TEST_CASE("argument errors") {
  InstanceModel m = diagnostic_memory(Metric::euclidean, 5);
  SUBCASE("k out of range") {
    m.k = 6;
    CHECK_THROWS_AS(predict_knn(m, std::vector<double>{0.0, 0.0}), ArgumentError);
    m.k = 0;
    CHECK_THROWS_AS(predict_knn(m, std::vector<double>{0.0, 0.0}), ArgumentError);
  }
  SUBCASE("dimension mismatch") {
    CHECK_THROWS_AS(predict_knn(m, std::vector<double>{0.0}), ArgumentError);
  }
  SUBCASE("empty memory") {
    InstanceModel empty;
    empty.k = 1;
    CHECK_THROWS_AS(predict_knn(empty, std::vector<double>{}), ArgumentError);
  }
}

TEST_CASE("model-level knn on the toy blobs") {
  const Dataset toy = generate_covid_toy(200, 12);
  const Model m = fit(KnnParams{5, Metric::euclidean}, toy);
  CHECK(zero_one_loss(m, toy) < 0.1);
  SUBCASE("k larger than the memory is rejected") {
    CHECK_THROWS_AS(fit(KnnParams{201, Metric::euclidean}, toy), ArgumentError);
  }
}
