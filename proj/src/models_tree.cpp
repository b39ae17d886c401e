#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "glassbox/models.hpp"

namespace glassbox {

namespace {

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double g = 1.0;
  for (std::size_t c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

int majority_label(const std::vector<std::size_t>& counts) {
  std::size_t best = 0;
  int label = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > best) {  // strict: ties keep the lowest label id
      best = counts[c];
      label = static_cast<int>(c);
    }
  }
  return label;
}

struct SplitChoice {
  bool found = false;
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity = std::numeric_limits<double>::infinity();
};

struct TreeBuilder {
  const Matrix& x;
  const std::vector<int>& y;
  int n_classes;
  TreeParams params;
  std::vector<TreeNode> nodes;
  int max_level = 0;

  int build(std::vector<std::size_t> rows, int level) {
    max_level = std::max(max_level, level);
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t r : rows) counts[static_cast<std::size_t>(y[r])]++;
    const bool pure = std::count_if(counts.begin(), counts.end(),
                                    [](std::size_t c) { return c > 0; }) <= 1;

    SplitChoice split;
    if (!pure && level < params.max_depth &&
        rows.size() >= 2 * static_cast<std::size_t>(params.min_leaf))
      split = best_split(rows, counts);

    if (!split.found) {
      TreeNode leaf;
      leaf.leaf = true;
      leaf.label = majority_label(counts);
      leaf.class_counts.assign(counts.begin(), counts.end());
      nodes.push_back(std::move(leaf));
      return static_cast<int>(nodes.size() - 1);
    }

    std::vector<std::size_t> left_rows, right_rows;
    for (std::size_t r : rows) {
      if (x(r, split.feature) <= split.threshold) left_rows.push_back(r);
      else right_rows.push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    TreeNode node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    const int self = static_cast<int>(nodes.size());
    nodes.push_back(std::move(node));
    const int left = build(std::move(left_rows), level + 1);
    const int right = build(std::move(right_rows), level + 1);
    nodes[static_cast<std::size_t>(self)].left = left;
    nodes[static_cast<std::size_t>(self)].right = right;
    return self;
  }

  SplitChoice best_split(const std::vector<std::size_t>& rows,
                         const std::vector<std::size_t>& total_counts) {
    SplitChoice best;
    const std::size_t n = rows.size();
    std::vector<std::pair<double, int>> ordered(n);
    for (std::size_t f = 0; f < x.cols; ++f) {
      for (std::size_t i = 0; i < n; ++i) ordered[i] = {x(rows[i], f), y[rows[i]]};
      std::sort(ordered.begin(), ordered.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::vector<std::size_t> left_counts(static_cast<std::size_t>(n_classes), 0);
      std::size_t n_left = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_counts[static_cast<std::size_t>(ordered[i].second)]++;
        ++n_left;
        if (ordered[i].first == ordered[i + 1].first) continue;  // not a boundary
        if (n_left < static_cast<std::size_t>(params.min_leaf) ||
            n - n_left < static_cast<std::size_t>(params.min_leaf))
          continue;
        std::vector<std::size_t> right_counts(static_cast<std::size_t>(n_classes));
        for (std::size_t c = 0; c < right_counts.size(); ++c)
          right_counts[c] = total_counts[c] - left_counts[c];
        const double impurity =
            (static_cast<double>(n_left) * gini(left_counts, n_left) +
             static_cast<double>(n - n_left) * gini(right_counts, n - n_left)) /
            static_cast<double>(n);
        // ties resolved toward lower feature index then lower threshold by
        // scan order and strict comparison
        if (impurity < best.impurity) {
          best.found = true;
          best.impurity = impurity;
          best.feature = f;
          best.threshold = 0.5 * (ordered[i].first + ordered[i + 1].first);
        }
      }
    }
    return best;
  }
};

}  // namespace

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.leaf; }));
}

DecisionTree induce_tree(const Matrix& x, const std::vector<int>& y, int n_classes,
                         const TreeParams& params) {
  if (x.rows == 0) throw ArgumentError("induce_tree: empty feature matrix");
  if (y.size() != x.rows) throw ArgumentError("induce_tree: label count mismatch");
  if (params.max_depth < 1) throw ArgumentError("induce_tree: max_depth must be >= 1");
  if (params.min_leaf < 1) throw ArgumentError("induce_tree: min_leaf must be >= 1");
  if (n_classes < 2) throw ArgumentError("induce_tree: need at least 2 classes");
  for (int v : y)
    if (v < 0 || v >= n_classes) throw ArgumentError("induce_tree: label id out of range");

  TreeBuilder builder{x, y, n_classes, params, {}, 0};
  std::vector<std::size_t> rows(x.rows);
  std::iota(rows.begin(), rows.end(), 0);
  DecisionTree tree;
  tree.root = builder.build(std::move(rows), 0);
  tree.nodes = std::move(builder.nodes);
  tree.depth = builder.max_level;
  return tree;
}

int predict_tree(const DecisionTree& tree, std::span<const double> x) {
  if (tree.root < 0) throw ArgumentError("predict_tree: empty tree");
  const TreeNode* node = &tree.nodes[static_cast<std::size_t>(tree.root)];
  while (!node->leaf) {
    if (node->feature >= x.size())
      throw ArgumentError("predict_tree: instance too short for split feature");
    const int next = x[node->feature] <= node->threshold ? node->left : node->right;
    node = &tree.nodes[static_cast<std::size_t>(next)];
  }
  return node->label;
}

}  // namespace glassbox
