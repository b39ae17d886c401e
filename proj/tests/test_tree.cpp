#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <functional>
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

// The worked diagnostic tree: CO level first, lung capacity on the left
// branch, a deeper right branch so the tree has depth 3.
// features: 0 = LungCapacity, 1 = COLevel; labels: 0 = NoCovid, 1 = Covid.
DecisionTree figure_tree() {
  DecisionTree t;
  t.nodes.resize(9);
  t.root = 0;
  t.depth = 3;
  t.nodes[0] = {false, 1, 0.324, 1, 2, 0, {}};
  t.nodes[1] = {false, 0, -1.02, 3, 4, 0, {}};    // left: lung capacity split
  t.nodes[2] = {false, 0, 0.5, 5, 6, 0, {}};      // right subtree
  t.nodes[3] = {true, 0, 0, -1, -1, 0, {37, 2}};  // NoCovid leaf
  t.nodes[4] = {true, 0, 0, -1, -1, 1, {5, 20}};
  t.nodes[5] = {false, 1, 1.0, 7, 8, 0, {}};
  t.nodes[6] = {true, 0, 0, -1, -1, 0, {11, 3}};
  t.nodes[7] = {true, 0, 0, -1, -1, 1, {1, 14}};
  t.nodes[8] = {true, 0, 0, -1, -1, 1, {2, 15}};
  return t;
}

// Interval boxes per leaf, for the tessellation check.
struct Box {
  double lo[2] = {-1e300, -1e300};
  double hi[2] = {1e300, 1e300};
  bool contains(std::span<const double> x) const {
    for (int f = 0; f < 2; ++f)
      if (!(x[f] > lo[f]) || !(x[f] <= hi[f])) return false;
    return true;
  }
};

void collect_boxes(const DecisionTree& t, int node, Box box, std::vector<Box>& out) {
  const TreeNode& n = t.nodes[static_cast<std::size_t>(node)];
  if (n.leaf) {
    out.push_back(box);
    return;
  }
  Box left = box, right = box;
  left.hi[n.feature] = std::min(left.hi[n.feature], n.threshold);
  right.lo[n.feature] = std::max(right.lo[n.feature], n.threshold);
  collect_boxes(t, n.left, left, out);
  collect_boxes(t, n.right, right, out);
}

}  // namespace

TEST_CASE("perfectly separable data needs one split") {
  const std::vector<double> xs = {1, 2, 3, 4, 6, 7, 8, 9};
  const std::vector<int> y = {0, 0, 0, 0, 1, 1, 1, 1};
  const Matrix x = column_matrix(xs);
  const DecisionTree t = induce_tree(x, y, 2, TreeParams{3, 1});
  CHECK(t.depth == 1);
  CHECK(t.leaf_count() == 2);
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(predict_tree(t, x.row(i)) == y[i]);
}

TEST_CASE("the worked path classifies the subject as healthy") {
  const DecisionTree t = figure_tree();
  // lung capacity -1.568, CO level 0.064: CO <= 0.324 then lung <= -1.02
  CHECK(predict_tree(t, std::vector<double>{-1.568, 0.064}) == 0);
  CHECK(t.depth == 3);
}

TEST_CASE("single-leaf tree returns its label everywhere") {
  DecisionTree t;
  t.root = 0;
  t.depth = 0;
  t.nodes = {{true, 0, 0, -1, -1, 1, {0, 5}}};
  CHECK(predict_tree(t, std::vector<double>{1.0, 2.0}) == 1);
  CHECK(predict_tree(t, std::vector<double>{-100.0, 100.0}) == 1);
}

TEST_CASE("values exactly at the threshold go left") {
  DecisionTree t;
  t.root = 0;
  t.depth = 1;
  t.nodes = {{false, 0, 5.0, 1, 2, 0, {}},
             {true, 0, 0, -1, -1, 0, {3, 0}},
             {true, 0, 0, -1, -1, 1, {0, 3}}};
  CHECK(predict_tree(t, std::vector<double>{5.0}) == 0);
  CHECK(predict_tree(t, std::vector<double>{5.0000001}) == 1);
}

TEST_CASE("depth cap bounds the leaf count") {
  const Dataset toy = generate_covid_toy(300, 2);
  const DecisionTree shallow =
      induce_tree(toy.feature_matrix(), toy.label_codes(), 2, TreeParams{1, 1});
  CHECK(shallow.leaf_count() <= 2);
  CHECK(shallow.depth <= 1);
}

TEST_CASE("min_leaf is honored") {
  const Dataset toy = generate_covid_toy(200, 5);
  const DecisionTree t = induce_tree(toy.feature_matrix(), toy.label_codes(), 2, TreeParams{6, 10});
  for (const TreeNode& node : t.nodes) {
    if (!node.leaf) continue;
    double total = 0.0;
    for (double c : node.class_counts) total += c;
    CHECK(total >= 10.0);
  }
}

TEST_CASE("leaves tessellate the plane") {
  const Dataset toy = generate_covid_toy(400, 9);
  const DecisionTree t = induce_tree(toy.feature_matrix(), toy.label_codes(), 2, TreeParams{5, 2});
  std::vector<Box> boxes;
  collect_boxes(t, t.root, Box{}, boxes);
  CHECK(boxes.size() == t.leaf_count());

  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> unit(-10.0, 10.0);
  for (int i = 0; i < 1000; ++i) {
    const std::vector<double> x = {unit(rng), unit(rng)};
    std::size_t covering = 0;
    for (const Box& box : boxes) covering += box.contains(x) ? 1 : 0;
    CHECK(covering == 1);  // every instance reaches exactly one leaf
  }
}

TEST_CASE("empty input is an argument error") {
  Matrix x(0, 2);
  CHECK_THROWS_AS(induce_tree(x, {}, 2, TreeParams{3, 1}), ArgumentError);
}

TEST_CASE("bad hyperparameters are argument errors") {
  const Matrix x = column_matrix({1, 2, 3, 4});
  const std::vector<int> y = {0, 1, 0, 1};
  CHECK_THROWS_AS(induce_tree(x, y, 2, TreeParams{0, 1}), ArgumentError);
  CHECK_THROWS_AS(induce_tree(x, y, 2, TreeParams{3, 0}), ArgumentError);
}

TEST_CASE("leaf class counts sum to the training size") {
  const Dataset toy = generate_covid_toy(250, 4);
  const DecisionTree t = induce_tree(toy.feature_matrix(), toy.label_codes(), 2, TreeParams{4, 1});
  double total = 0.0;
  for (const TreeNode& node : t.nodes)
    if (node.leaf)
      for (double c : node.class_counts) total += c;
  CHECK(total == 250.0);
}

TEST_CASE("induction is deterministic and transform-invariant on train labels") {
  const Dataset toy = generate_covid_toy(150, 21);
  const Matrix x = toy.feature_matrix();
  const auto y = toy.label_codes();
  const DecisionTree a = induce_tree(x, y, 2, TreeParams{4, 2});
  const DecisionTree b = induce_tree(x, y, 2, TreeParams{4, 2});
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i].leaf == b.nodes[i].leaf);
    CHECK(a.nodes[i].threshold == b.nodes[i].threshold);
  }

  Matrix warped = x;
  for (std::size_t r = 0; r < x.rows; ++r) {
    warped(r, 0) = std::exp(x(r, 0));
    warped(r, 1) = std::atan(x(r, 1));  // strictly increasing
  }
  const DecisionTree c = induce_tree(warped, y, 2, TreeParams{4, 2});
  for (std::size_t r = 0; r < x.rows; ++r)
    CHECK(predict_tree(a, x.row(r)) == predict_tree(c, warped.row(r)));
}

TEST_CASE("multiclass splitting works") {
  // three separated clusters on a line
  std::vector<double> xs;
  std::vector<int> y;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < 10; ++i) {
      xs.push_back(c * 10.0 + i * 0.1);
      y.push_back(c);
    }
  const Matrix x = column_matrix(xs);
  const DecisionTree t = induce_tree(x, y, 3, TreeParams{3, 1});
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(predict_tree(t, x.row(i)) == y[i]);
}
