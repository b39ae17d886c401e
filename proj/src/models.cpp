#include <algorithm>
#include <cmath>
#include <fstream>

#include "glassbox/models.hpp"

namespace glassbox {

namespace {

constexpr const char* kModelFormat = "glassbox-model/1";

std::vector<int> binary_codes(const Dataset& data) {
  auto codes = data.label_codes();
  for (int c : codes)
    if (c != 0 && c != 1)
      throw UnsupportedError("family requires a binary label (two categories)");
  return codes;
}

void require_classification(const Dataset& data, const std::string& family) {
  if (!data.schema().task.is_classification())
    throw UnsupportedError(family + " does not support regression tasks");
}

int class_count(const Dataset& data) {
  return static_cast<int>(std::max<std::size_t>(data.label_names().size(), 2));
}

double leaf_share(const TreeNode& leaf, int label) {
  double total = 0.0;
  for (double c : leaf.class_counts) total += c;
  if (total <= 0.0) return leaf.label == label ? 1.0 : 0.0;
  const auto idx = static_cast<std::size_t>(label);
  return idx < leaf.class_counts.size() ? leaf.class_counts[idx] / total : 0.0;
}

const TreeNode& leaf_for(const DecisionTree& tree, std::span<const double> x) {
  const TreeNode* node = &tree.nodes[static_cast<std::size_t>(tree.root)];
  while (!node->leaf) {
    const int next = x[node->feature] <= node->threshold ? node->left : node->right;
    node = &tree.nodes[static_cast<std::size_t>(next)];
  }
  return *node;
}

// Vote share per label among covering rules; the default label's training
// frequency stands in when nothing covers.
double rule_share(const RuleSet& rules, std::span<const double> x, int label) {
  std::size_t covering = 0, hits = 0;
  for (const Rule& rule : rules.rules) {
    if (!rule.covers(x)) continue;
    ++covering;
    if (rule.label == label) ++hits;
  }
  if (covering == 0) {
    const auto idx = static_cast<std::size_t>(label);
    if (label >= 0 && idx < rules.class_frequencies.size())
      return rules.class_frequencies[idx];
    if (label == rules.default_label) return rules.default_frequency;
    return 1.0 - rules.default_frequency;
  }
  return static_cast<double>(hits) / static_cast<double>(covering);
}

double knn_share(const InstanceModel& model, const KnnResult& result, int label) {
  std::size_t hits = 0;
  for (const auto& rc : result.retrieved)
    if (rc.label == label) ++hits;
  return static_cast<double>(hits) / static_cast<double>(model.k);
}

nlohmann::json condition_to_json(const Condition& c) {
  const char* op = c.op == ConditionOp::less_eq ? "<=" : (c.op == ConditionOp::greater ? ">" : "=");
  return {{"feature", c.feature}, {"op", op}, {"threshold", c.threshold}};
}

Condition condition_from_json(const nlohmann::json& j) {
  Condition c;
  c.feature = j.at("feature").get<std::size_t>();
  const std::string op = j.at("op").get<std::string>();
  if (op == "<=") c.op = ConditionOp::less_eq;
  else if (op == ">") c.op = ConditionOp::greater;
  else if (op == "=") c.op = ConditionOp::equal;
  else throw IngestionError("model file: unknown condition operator " + op);
  c.threshold = j.at("threshold").get<double>();
  return c;
}

}  // namespace

std::string to_string(Link link) { return link == Link::identity ? "identity" : "logistic"; }
std::string to_string(Voting voting) { return voting == Voting::majority ? "majority" : "average"; }

std::string to_string(Metric metric) {
  switch (metric) {
    case Metric::euclidean: return "euclidean";
    case Metric::manhattan: return "manhattan";
    case Metric::cosine: return "cosine";
  }
  return "?";
}

Metric metric_from_string(const std::string& s) {
  if (s == "euclidean") return Metric::euclidean;
  if (s == "manhattan") return Metric::manhattan;
  if (s == "cosine") return Metric::cosine;
  throw ArgumentError("unknown distance metric: " + s);
}

std::string family_name(const FitSpec& spec) {
  struct Visitor {
    std::string operator()(const LogisticParams&) const { return "logistic"; }
    std::string operator()(const GamParams&) const { return "gam"; }
    std::string operator()(const RulesParams&) const { return "rules"; }
    std::string operator()(const TreeParams&) const { return "tree"; }
    std::string operator()(const KnnParams&) const { return "knn"; }
  };
  return std::visit(Visitor{}, spec);
}

nlohmann::json fit_spec_to_json(const FitSpec& spec) {
  nlohmann::json j;
  j["family"] = family_name(spec);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticParams>) {
          j["l1"] = p.l1;
          j["l2"] = p.l2;
          j["max_iters"] = p.max_iters;
          j["tol"] = p.tol;
        } else if constexpr (std::is_same_v<T, GamParams>) {
          j["bins"] = p.bins;
          j["passes"] = p.passes;
          j["interactions"] = nlohmann::json::array();
          for (const auto& [a, b] : p.interactions) j["interactions"].push_back({a, b});
        } else if constexpr (std::is_same_v<T, RulesParams>) {
          j["max_premises"] = p.max_premises;
          j["min_coverage"] = p.min_coverage;
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          j["max_depth"] = p.max_depth;
          j["min_leaf"] = p.min_leaf;
        } else if constexpr (std::is_same_v<T, KnnParams>) {
          j["k"] = p.k;
          j["metric"] = to_string(p.metric);
        }
      },
      spec);
  return j;
}

FitSpec fit_spec_from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "logistic") {
    LogisticParams p;
    p.l1 = j.value("l1", p.l1);
    p.l2 = j.value("l2", p.l2);
    p.max_iters = j.value("max_iters", p.max_iters);
    p.tol = j.value("tol", p.tol);
    return p;
  }
  if (family == "gam") {
    GamParams p;
    p.bins = j.value("bins", p.bins);
    p.passes = j.value("passes", p.passes);
    if (j.contains("interactions"))
      for (const auto& pair : j["interactions"])
        p.interactions.emplace_back(pair.at(0).get<std::size_t>(), pair.at(1).get<std::size_t>());
    return p;
  }
  if (family == "rules") {
    RulesParams p;
    p.max_premises = j.value("max_premises", p.max_premises);
    p.min_coverage = j.value("min_coverage", p.min_coverage);
    return p;
  }
  if (family == "tree") {
    TreeParams p;
    p.max_depth = j.value("max_depth", p.max_depth);
    p.min_leaf = j.value("min_leaf", p.min_leaf);
    return p;
  }
  if (family == "knn") {
    KnnParams p;
    p.k = j.value("k", p.k);
    if (j.contains("metric")) p.metric = metric_from_string(j["metric"].get<std::string>());
    return p;
  }
  throw IngestionError("unknown model family: " + family);
}

Model::Model(Impl impl, Schema schema, std::vector<std::string> feature_names,
             std::vector<std::string> label_names, FitSpec spec)
    : impl_(std::move(impl)),
      schema_(std::move(schema)),
      feature_names_(std::move(feature_names)),
      label_names_(std::move(label_names)),
      fit_spec_(std::move(spec)) {}

Model fit(const FitSpec& spec, const Dataset& train) {
  if (train.n_rows() == 0) throw ArgumentError("fit: empty training dataset");
  const Matrix x = train.feature_matrix();
  std::vector<std::string> label_names;
  if (train.schema().label_index() && train.schema().task.is_classification())
    label_names = train.label_names();

  Model::Impl impl = std::visit(
      [&](const auto& p) -> Model::Impl {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogisticParams>) {
          require_classification(train, "logistic");
          return fit_logistic(x, binary_codes(train), p);
        } else if constexpr (std::is_same_v<T, GamParams>) {
          if (train.schema().task.is_classification()) {
            std::vector<double> y;
            for (int c : binary_codes(train)) y.push_back(c);
            return fit_gam(x, y, Link::logistic, p);
          }
          return fit_gam(x, train.numeric_labels(), Link::identity, p);
        } else if constexpr (std::is_same_v<T, RulesParams>) {
          require_classification(train, "rules");
          return learn_rules(x, train.label_codes(), class_count(train), p);
        } else if constexpr (std::is_same_v<T, TreeParams>) {
          require_classification(train, "tree");
          return induce_tree(x, train.label_codes(), class_count(train), p);
        } else {
          require_classification(train, "knn");
          InstanceModel knn;
          knn.memory_x = x;
          knn.memory_y = train.label_codes();
          if (p.k < 1 || static_cast<std::size_t>(p.k) > train.n_rows())
            throw ArgumentError("knn: k must lie in [1, |memory|]");
          knn.k = static_cast<std::size_t>(p.k);
          knn.metric = p.metric;
          knn.voting = Voting::majority;
          return knn;
        }
      },
      spec);

  return Model(std::move(impl), train.schema(), train.encoded_feature_names(),
               std::move(label_names), spec);
}

Prediction predict(const Model& model, std::span<const double> x) {
  if (x.size() != model.feature_count())
    throw ArgumentError("predict: instance has " + std::to_string(x.size()) +
                        " features, model schema expects " +
                        std::to_string(model.feature_count()));
  for (double v : x)
    if (!std::isfinite(v)) throw ArgumentError("predict: non-finite feature value");

  Prediction out;
  const bool classify = model.is_classification();
  std::visit(
      [&](const auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          const double v = predict_linear(impl, x);
          if (impl.link == Link::logistic) {
            out.value = v;
            out.label = v > 0.5 ? 1 : 0;
            out.confidence = std::max(v, 1.0 - v);
          } else {
            out.value = v;
          }
        } else if constexpr (std::is_same_v<T, GamModel>) {
          const double v = predict_gam(impl, x);
          if (impl.link == Link::logistic) {
            out.value = v;
            out.label = v > 0.5 ? 1 : 0;
            out.confidence = std::max(v, 1.0 - v);
          } else {
            out.value = v;
          }
        } else if constexpr (std::is_same_v<T, RuleSet>) {
          out.label = predict_rules(impl, x);
          out.value = rule_share(impl, x, 1);
          out.confidence = rule_share(impl, x, out.label);
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          out.label = predict_tree(impl, x);
          const TreeNode& leaf = leaf_for(impl, x);
          out.value = leaf_share(leaf, 1);
          out.confidence = leaf_share(leaf, out.label);
        } else {
          const KnnResult r = predict_knn(impl, x);
          out.label = r.label;
          out.value = knn_share(impl, r, 1);
          out.confidence = knn_share(impl, r, out.label);
        }
      },
      model.impl());
  if (!classify) out.label = -1;
  // Multiclass models report the label id itself as the value.
  if (classify && model.label_names().size() > 2) out.value = out.label;
  return out;
}

std::vector<Prediction> predict_all(const Model& model, const Dataset& data) {
  if (data.schema().fingerprint() != model.schema().fingerprint()) {
    // Accept datasets whose feature layout matches even if roles differ
    // (e.g. an eval split with extra role annotations is still the same
    // feature space); only the encoded feature names must agree.
    if (data.encoded_feature_names() != model.feature_names())
      throw ArgumentError("predict: dataset feature layout does not match the model's schema");
  }
  const Matrix x = data.feature_matrix();
  std::vector<Prediction> out;
  out.reserve(x.rows);
  for (std::size_t r = 0; r < x.rows; ++r) out.push_back(predict(model, x.row(r)));
  return out;
}

double label_confidence(const Model& model, std::span<const double> x, int label) {
  if (!model.is_classification())
    throw UnsupportedError("label_confidence is defined for classification models only");
  double share = 0.0;
  std::visit(
      [&](const auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          const double p = predict_linear(impl, x);
          share = label == 1 ? p : 1.0 - p;
        } else if constexpr (std::is_same_v<T, GamModel>) {
          const double p = predict_gam(impl, x);
          share = label == 1 ? p : 1.0 - p;
        } else if constexpr (std::is_same_v<T, RuleSet>) {
          share = rule_share(impl, x, label);
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          share = leaf_share(leaf_for(impl, x), label);
        } else {
          share = knn_share(impl, predict_knn(impl, x), label);
        }
      },
      model.impl());
  return share;
}

double zero_one_loss(const Model& model, const Dataset& data) {
  if (!model.is_classification())
    throw UnsupportedError("zero_one_loss is defined for classification models only");
  if (data.n_rows() == 0) throw ArgumentError("zero_one_loss: empty dataset");
  const auto predictions = predict_all(model, data);
  const auto truth = data.label_codes();
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i].label != truth[i]) ++wrong;
  return static_cast<double>(wrong) / static_cast<double>(data.n_rows());
}

nlohmann::json Model::to_json() const {
  nlohmann::json j;
  j["format"] = kModelFormat;
  j["family"] = family();
  j["schema"] = schema_.to_json();
  j["schema_fingerprint"] = schema_.fingerprint();
  j["feature_names"] = feature_names_;
  j["label_names"] = label_names_;
  j["fit"] = fit_spec_to_json(fit_spec_);

  nlohmann::json params;
  std::visit(
      [&](const auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          params["intercept"] = impl.intercept;
          params["weights"] = impl.weights;
          params["link"] = to_string(impl.link);
        } else if constexpr (std::is_same_v<T, GamModel>) {
          params["intercept"] = impl.intercept;
          params["link"] = to_string(impl.link);
          params["bins_clamped"] = impl.bins_clamped;
          params["shapes"] = nlohmann::json::array();
          for (const auto& s : impl.shapes)
            params["shapes"].push_back({{"feature", s.feature},
                                        {"edges", s.edges},
                                        {"values", s.values},
                                        {"masses", s.masses}});
          params["interactions"] = nlohmann::json::array();
          for (const auto& s : impl.interactions)
            params["interactions"].push_back({{"feature_a", s.feature_a},
                                              {"feature_b", s.feature_b},
                                              {"edges_a", s.edges_a},
                                              {"edges_b", s.edges_b},
                                              {"values", s.values},
                                              {"masses", s.masses}});
        } else if constexpr (std::is_same_v<T, RuleSet>) {
          params["voting"] = to_string(impl.voting);
          params["default_label"] = impl.default_label;
          params["default_frequency"] = impl.default_frequency;
          params["class_frequencies"] = impl.class_frequencies;
          params["rules"] = nlohmann::json::array();
          for (const auto& rule : impl.rules) {
            nlohmann::json rj;
            rj["label"] = rule.label;
            rj["premises"] = nlohmann::json::array();
            for (const auto& c : rule.premises) rj["premises"].push_back(condition_to_json(c));
            params["rules"].push_back(std::move(rj));
          }
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          params["root"] = impl.root;
          params["depth"] = impl.depth;
          params["nodes"] = nlohmann::json::array();
          for (const auto& node : impl.nodes) {
            nlohmann::json nj;
            nj["leaf"] = node.leaf;
            if (node.leaf) {
              nj["label"] = node.label;
              nj["class_counts"] = node.class_counts;
            } else {
              nj["feature"] = node.feature;
              nj["threshold"] = node.threshold;
              nj["left"] = node.left;
              nj["right"] = node.right;
            }
            params["nodes"].push_back(std::move(nj));
          }
        } else {
          params["k"] = impl.k;
          params["metric"] = to_string(impl.metric);
          params["voting"] = to_string(impl.voting);
          params["memory_rows"] = impl.memory_x.rows;
          params["memory_cols"] = impl.memory_x.cols;
          params["memory_x"] = impl.memory_x.values;
          params["memory_y"] = impl.memory_y;
        }
      },
      impl_);
  j["params"] = std::move(params);
  return j;
}

Model Model::from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kModelFormat)
    throw IngestionError("not a glassbox model file (bad format tag)");
  Schema schema = Schema::from_json(j.at("schema"));
  FitSpec spec = fit_spec_from_json(j.at("fit"));
  auto feature_names = j.at("feature_names").get<std::vector<std::string>>();
  auto label_names = j.at("label_names").get<std::vector<std::string>>();
  const auto& params = j.at("params");
  const std::string family = j.at("family").get<std::string>();

  Impl impl;
  if (family == "logistic") {
    LinearModel m;
    m.intercept = params.at("intercept").get<double>();
    m.weights = params.at("weights").get<std::vector<double>>();
    m.link = params.at("link").get<std::string>() == "logistic" ? Link::logistic : Link::identity;
    impl = std::move(m);
  } else if (family == "gam") {
    GamModel m;
    m.intercept = params.at("intercept").get<double>();
    m.link = params.at("link").get<std::string>() == "logistic" ? Link::logistic : Link::identity;
    m.bins_clamped = params.value("bins_clamped", false);
    for (const auto& sj : params.at("shapes")) {
      ShapeFunction s;
      s.feature = sj.at("feature").get<std::size_t>();
      s.edges = sj.at("edges").get<std::vector<double>>();
      s.values = sj.at("values").get<std::vector<double>>();
      s.masses = sj.at("masses").get<std::vector<double>>();
      m.shapes.push_back(std::move(s));
    }
    for (const auto& sj : params.at("interactions")) {
      InteractionShape s;
      s.feature_a = sj.at("feature_a").get<std::size_t>();
      s.feature_b = sj.at("feature_b").get<std::size_t>();
      s.edges_a = sj.at("edges_a").get<std::vector<double>>();
      s.edges_b = sj.at("edges_b").get<std::vector<double>>();
      s.values = sj.at("values").get<std::vector<double>>();
      s.masses = sj.value("masses", std::vector<double>());
      m.interactions.push_back(std::move(s));
    }
    impl = std::move(m);
  } else if (family == "rules") {
    RuleSet m;
    m.voting = params.at("voting").get<std::string>() == "average" ? Voting::average : Voting::majority;
    m.default_label = params.at("default_label").get<int>();
    m.default_frequency = params.at("default_frequency").get<double>();
    m.class_frequencies = params.value("class_frequencies", std::vector<double>());
    for (const auto& rj : params.at("rules")) {
      Rule rule;
      rule.label = rj.at("label").get<int>();
      for (const auto& cj : rj.at("premises")) rule.premises.push_back(condition_from_json(cj));
      m.rules.push_back(std::move(rule));
    }
    impl = std::move(m);
  } else if (family == "tree") {
    DecisionTree m;
    m.root = params.at("root").get<int>();
    m.depth = params.at("depth").get<int>();
    for (const auto& nj : params.at("nodes")) {
      TreeNode node;
      node.leaf = nj.at("leaf").get<bool>();
      if (node.leaf) {
        node.label = nj.at("label").get<int>();
        node.class_counts = nj.at("class_counts").get<std::vector<double>>();
      } else {
        node.feature = nj.at("feature").get<std::size_t>();
        node.threshold = nj.at("threshold").get<double>();
        node.left = nj.at("left").get<int>();
        node.right = nj.at("right").get<int>();
      }
      m.nodes.push_back(std::move(node));
    }
    impl = std::move(m);
  } else if (family == "knn") {
    InstanceModel m;
    m.k = params.at("k").get<std::size_t>();
    m.metric = metric_from_string(params.at("metric").get<std::string>());
    m.voting = params.at("voting").get<std::string>() == "average" ? Voting::average : Voting::majority;
    m.memory_x.rows = params.at("memory_rows").get<std::size_t>();
    m.memory_x.cols = params.at("memory_cols").get<std::size_t>();
    m.memory_x.values = params.at("memory_x").get<std::vector<double>>();
    if (m.memory_x.values.size() != m.memory_x.rows * m.memory_x.cols)
      throw IngestionError("model file: memory matrix size mismatch");
    m.memory_y = params.at("memory_y").get<std::vector<int>>();
    impl = std::move(m);
  } else {
    throw IngestionError("unknown model family: " + family);
  }

  return Model(std::move(impl), std::move(schema), std::move(feature_names),
               std::move(label_names), std::move(spec));
}

void Model::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write model file: " + path.string());
  out << to_json().dump(2) << "\n";
}

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot read model file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("invalid model file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

}  // namespace glassbox
