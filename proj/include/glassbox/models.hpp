#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "glassbox/common.hpp"
#include "glassbox/data.hpp"
#include "json.hpp"

namespace glassbox {

enum class Link { identity, logistic };
enum class Voting { majority, average };
enum class Metric { euclidean, manhattan, cosine };

std::string to_string(Link link);
std::string to_string(Voting voting);
std::string to_string(Metric metric);
Metric metric_from_string(const std::string& s);

// ---------------------------------------------------------------------------
// Feature-importance family

struct LinearModel {
  double intercept = 0.0;
  std::vector<double> weights;
  Link link = Link::identity;
};

// Piecewise-constant shape over bins [edges[i], edges[i+1]); inputs outside
// the edge range clamp to the first/last bin.
struct ShapeFunction {
  std::size_t feature = 0;
  std::vector<double> edges;   // strictly ascending, values.size() + 1 entries
  std::vector<double> values;  // one per bin
  std::vector<double> masses;  // training mass per bin (for importance summaries)

  std::size_t bin_index(double x) const;
  double evaluate(double x) const;
};

struct InteractionShape {
  std::size_t feature_a = 0;
  std::size_t feature_b = 0;
  std::vector<double> edges_a;
  std::vector<double> edges_b;
  std::vector<double> values;  // (bins_a x bins_b) row-major
  std::vector<double> masses;  // training mass per cell

  double evaluate(double xa, double xb) const;
};

struct GamModel {
  double intercept = 0.0;
  std::vector<ShapeFunction> shapes;             // at most one per feature
  std::vector<InteractionShape> interactions;    // distinct unordered pairs
  Link link = Link::identity;
  bool bins_clamped = false;  // some feature had fewer distinct values than requested bins
};

// ---------------------------------------------------------------------------
// Rule family

enum class ConditionOp { less_eq, greater, equal };

struct Condition {
  std::size_t feature = 0;
  ConditionOp op = ConditionOp::less_eq;
  double threshold = 0.0;  // for equal: the category code

  bool holds(std::span<const double> x) const;
  std::string describe(const std::vector<std::string>& feature_names) const;
};

struct Rule {
  std::vector<Condition> premises;  // non-empty; interval form per feature
  int label = 0;

  bool covers(std::span<const double> x) const;
};

struct RuleSet {
  std::vector<Rule> rules;
  Voting voting = Voting::majority;
  int default_label = 0;
  double default_frequency = 1.0;          // training share of the default label
  std::vector<double> class_frequencies;   // training share per label id
};

// ---------------------------------------------------------------------------
// Tree family

struct TreeNode {
  bool leaf = false;
  // internal
  std::size_t feature = 0;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  // leaf
  int label = 0;
  std::vector<double> class_counts;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // arena; single rooted binary tree
  int root = -1;
  int depth = 0;

  std::size_t leaf_count() const;
};

// ---------------------------------------------------------------------------
// Instance family

struct InstanceModel {
  Matrix memory_x;
  std::vector<int> memory_y;
  std::size_t k = 1;
  Metric metric = Metric::euclidean;
  Voting voting = Voting::majority;
};

double instance_distance(Metric metric, std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Fit specifications (hyperparameters). Carried inside every fitted model so
// shadow models and Rashomon enumeration can refit the same configuration.

struct LogisticParams {
  double l1 = 0.0;
  double l2 = 0.0;
  int max_iters = 2000;
  double tol = 1e-9;
};

struct GamParams {
  int bins = 8;
  std::vector<std::pair<std::size_t, std::size_t>> interactions;
  int passes = 10;
};

struct RulesParams {
  int max_premises = 3;
  int min_coverage = 1;
};

struct TreeParams {
  int max_depth = 3;
  int min_leaf = 1;
};

struct KnnParams {
  int k = 5;
  Metric metric = Metric::euclidean;
};

using FitSpec = std::variant<LogisticParams, GamParams, RulesParams, TreeParams, KnnParams>;

std::string family_name(const FitSpec& spec);
nlohmann::json fit_spec_to_json(const FitSpec& spec);
FitSpec fit_spec_from_json(const nlohmann::json& j);

// ---------------------------------------------------------------------------
// The model union

struct Prediction {
  double value = 0.0;      // regression value; for binary classification the
                           // score of label 1 (so interventions see a
                           // continuous output); label id for multiclass
  int label = -1;          // classification label id, -1 for regression
  double confidence = 1.0; // share of the predicted class, in [0, 1]
};

class Model {
 public:
  using Impl = std::variant<LinearModel, GamModel, RuleSet, DecisionTree, InstanceModel>;

  Model() = default;
  Model(Impl impl, Schema schema, std::vector<std::string> feature_names,
        std::vector<std::string> label_names, FitSpec spec);

  const Impl& impl() const { return impl_; }
  Impl& impl() { return impl_; }
  const Schema& schema() const { return schema_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::string>& label_names() const { return label_names_; }
  const FitSpec& fit_spec() const { return fit_spec_; }
  std::string family() const { return family_name(fit_spec_); }
  std::size_t feature_count() const { return feature_names_.size(); }
  bool is_classification() const { return schema_.task.is_classification(); }

  nlohmann::json to_json() const;
  static Model from_json(const nlohmann::json& j);
  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);

 private:
  Impl impl_;
  Schema schema_;
  std::vector<std::string> feature_names_;
  std::vector<std::string> label_names_;
  FitSpec fit_spec_;
};

// ---------------------------------------------------------------------------
// Learners (matrix level)

// Smooth part of the L1-regularized logistic objective: mean log loss plus
// l2 * ||w||^2 (intercept unpenalized). Gradient is ordered [intercept, w...].
double logistic_objective(const Matrix& x, const std::vector<int>& y, double intercept,
                          const std::vector<double>& weights, double l2);
std::vector<double> logistic_gradient(const Matrix& x, const std::vector<int>& y,
                                      double intercept, const std::vector<double>& weights,
                                      double l2);

// Proximal gradient descent from zero initialization with a fixed step from
// a Lipschitz bound; the L1 term is handled exactly by soft thresholding.
LinearModel fit_logistic(const Matrix& x, const std::vector<int>& y, const LogisticParams& params);

double predict_linear(const LinearModel& model, std::span<const double> x);

GamModel fit_gam(const Matrix& x, const std::vector<double>& y, Link link,
                 const GamParams& params);
double predict_gam(const GamModel& model, std::span<const double> x);

RuleSet learn_rules(const Matrix& x, const std::vector<int>& y, int n_classes,
                    const RulesParams& params);
bool rule_covers(const Rule& rule, std::span<const double> x);
int predict_rules(const RuleSet& rules, std::span<const double> x);

DecisionTree induce_tree(const Matrix& x, const std::vector<int>& y, int n_classes,
                         const TreeParams& params);
int predict_tree(const DecisionTree& tree, std::span<const double> x);

struct RetrievedCase {
  std::size_t memory_index = 0;
  std::vector<double> instance;
  int label = 0;
  double distance = 0.0;
};

struct KnnResult {
  int label = 0;
  std::vector<RetrievedCase> retrieved;  // ascending distance, exactly k cases
};

KnnResult predict_knn(const InstanceModel& model, std::span<const double> x);

// ---------------------------------------------------------------------------
// Dataset-level fitting and prediction

// Fits the requested family on the dataset's encoded feature matrix.
// Classification families reject regression tasks and vice versa.
Model fit(const FitSpec& spec, const Dataset& train);

Prediction predict(const Model& model, std::span<const double> x);
std::vector<Prediction> predict_all(const Model& model, const Dataset& data);

// Model's probability-like score for a specific class, in [0, 1]; the
// membership-inference attack thresholds this on labeled records.
double label_confidence(const Model& model, std::span<const double> x, int label);

// Fraction of misclassified rows (classification only).
double zero_one_loss(const Model& model, const Dataset& data);

}  // namespace glassbox
