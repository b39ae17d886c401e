#include "glassbox/explain.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace glassbox {

namespace {

std::string feature_label(const Model& model, std::size_t index) {
  const auto& names = model.feature_names();
  return index < names.size() ? names[index] : "x" + std::to_string(index);
}

std::string class_label(const Model& model, int label) {
  const auto& names = model.label_names();
  if (label >= 0 && static_cast<std::size_t>(label) < names.size())
    return names[static_cast<std::size_t>(label)];
  return std::to_string(label);
}

double weighted_mean_abs(const std::vector<double>& values, const std::vector<double>& masses) {
  double total = 0.0, acc = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double w = i < masses.size() ? masses[i] : 0.0;
    total += w;
    acc += w * std::abs(values[i]);
  }
  return total > 0.0 ? acc / total : 0.0;
}

// Conditions along the root-to-leaf walk, oriented by the branch taken.
std::vector<Condition> tree_path(const DecisionTree& tree, std::span<const double> x) {
  std::vector<Condition> path;
  const TreeNode* node = &tree.nodes[static_cast<std::size_t>(tree.root)];
  while (!node->leaf) {
    const bool left = x[node->feature] <= node->threshold;
    path.push_back({node->feature, left ? ConditionOp::less_eq : ConditionOp::greater,
                    node->threshold});
    node = &tree.nodes[static_cast<std::size_t>(left ? node->left : node->right)];
  }
  return path;
}

}  // namespace

FeatureAttribution global_importance(const Model& model) {
  FeatureAttribution out;
  out.scope = AttributionScope::global;
  if (const auto* linear = std::get_if<LinearModel>(&model.impl())) {
    out.intercept = linear->intercept;
    for (std::size_t j = 0; j < linear->weights.size(); ++j)
      out.contributions.push_back({feature_label(model, j), linear->weights[j]});
    return out;
  }
  if (const auto* gam = std::get_if<GamModel>(&model.impl())) {
    out.intercept = gam->intercept;
    for (const auto& shape : gam->shapes)
      out.contributions.push_back(
          {feature_label(model, shape.feature), weighted_mean_abs(shape.values, shape.masses)});
    for (const auto& inter : gam->interactions)
      out.contributions.push_back(
          {feature_label(model, inter.feature_a) + "*" + feature_label(model, inter.feature_b),
           weighted_mean_abs(inter.values, inter.masses)});
    return out;
  }
  throw UnsupportedError("global_importance is defined for linear and GAM families; " +
                         model.family() + " models explain through rules or cases");
}

FeatureAttribution local_importance(const Model& model, std::span<const double> x) {
  if (x.size() != model.feature_count())
    throw ArgumentError("local_importance: instance size does not match model");
  FeatureAttribution out;
  out.scope = AttributionScope::local;
  if (const auto* linear = std::get_if<LinearModel>(&model.impl())) {
    out.intercept = linear->intercept;
    double score = linear->intercept;
    for (std::size_t j = 0; j < linear->weights.size(); ++j) {
      const double contribution = linear->weights[j] * x[j];
      out.contributions.push_back({feature_label(model, j), contribution});
      score += contribution;
    }
    out.score = score;
    return out;
  }
  if (const auto* gam = std::get_if<GamModel>(&model.impl())) {
    out.intercept = gam->intercept;
    double score = gam->intercept;
    for (const auto& shape : gam->shapes) {
      const double contribution = shape.evaluate(x[shape.feature]);
      out.contributions.push_back({feature_label(model, shape.feature), contribution});
      score += contribution;
    }
    for (const auto& inter : gam->interactions) {
      const double contribution = inter.evaluate(x[inter.feature_a], x[inter.feature_b]);
      out.contributions.push_back(
          {feature_label(model, inter.feature_a) + "*" + feature_label(model, inter.feature_b),
           contribution});
      score += contribution;
    }
    out.score = score;
    return out;
  }
  throw UnsupportedError("local_importance is defined for linear and GAM families; " +
                         model.family() + " models explain through rules or cases");
}

Explanation explain_prediction(const Model& model, std::span<const double> x) {
  Explanation out;
  const Prediction prediction = predict(model, x);
  out.label = prediction.label;
  out.value = prediction.value;

  if (std::holds_alternative<LinearModel>(model.impl()) ||
      std::holds_alternative<GamModel>(model.impl())) {
    out.payload = local_importance(model, x);
    return out;
  }
  if (const auto* rules = std::get_if<RuleSet>(&model.impl())) {
    RuleExplanation re;
    re.label = prediction.label;
    for (const Rule& rule : rules->rules) {
      if (!rule.covers(x)) continue;
      ++re.covering_rules;
      // the first covering rule voting for the winner is the active rule
      if (re.conditions.empty() && rule.label == prediction.label)
        re.conditions = rule.premises;
    }
    re.used_default = re.covering_rules == 0;
    out.payload = std::move(re);
    return out;
  }
  if (const auto* tree = std::get_if<DecisionTree>(&model.impl())) {
    RuleExplanation re;
    re.label = prediction.label;
    re.conditions = tree_path(*tree, x);
    re.covering_rules = 1;  // trees tessellate: exactly one path covers x
    out.payload = std::move(re);
    return out;
  }
  const auto& knn = std::get<InstanceModel>(model.impl());
  CaseExplanation ce;
  const KnnResult result = predict_knn(knn, x);
  ce.label = result.label;
  ce.cases = result.retrieved;
  for (const auto& rc : ce.cases) ce.tally[rc.label]++;
  out.payload = std::move(ce);
  return out;
}

ComplexityReport complexity(const Model& model, std::optional<std::span<const double>> x) {
  ComplexityReport report;
  std::visit(
      [&](const auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          std::size_t nonzero = 0;
          double l1 = 0.0, l2 = 0.0;
          for (double w : impl.weights) {
            if (w != 0.0) ++nonzero;
            l1 += std::abs(w);
            l2 += w * w;
          }
          report.global = static_cast<double>(nonzero);
          report.detail["nonzero_weights"] = static_cast<double>(nonzero);
          report.detail["zero_weights"] = static_cast<double>(impl.weights.size() - nonzero);
          report.detail["l1_norm"] = l1;
          report.detail["l2_norm"] = std::sqrt(l2);
          if (x) {
            std::size_t active = 0;
            for (std::size_t j = 0; j < impl.weights.size(); ++j)
              if (impl.weights[j] * (*x)[j] != 0.0) ++active;
            report.local = static_cast<double>(active);
          } else {
            report.local = static_cast<double>(nonzero);
          }
        } else if constexpr (std::is_same_v<T, GamModel>) {
          std::size_t bins = 0;
          for (const auto& s : impl.shapes) bins += s.values.size();
          for (const auto& s : impl.interactions) bins += s.values.size();
          const auto terms = static_cast<double>(impl.shapes.size() + impl.interactions.size());
          report.global = terms;
          report.detail["shape_terms"] = static_cast<double>(impl.shapes.size());
          report.detail["interaction_terms"] = static_cast<double>(impl.interactions.size());
          report.detail["total_bins"] = static_cast<double>(bins);
          if (x) {
            std::size_t active = 0;
            for (const auto& s : impl.shapes)
              if (s.evaluate((*x)[s.feature]) != 0.0) ++active;
            for (const auto& s : impl.interactions)
              if (s.evaluate((*x)[s.feature_a], (*x)[s.feature_b]) != 0.0) ++active;
            report.local = static_cast<double>(active);
          } else {
            report.local = terms;
          }
        } else if constexpr (std::is_same_v<T, RuleSet>) {
          std::size_t premises = 0, max_premises = 0;
          for (const auto& rule : impl.rules) {
            premises += rule.premises.size();
            max_premises = std::max(max_premises, rule.premises.size());
          }
          report.global = static_cast<double>(impl.rules.size());
          report.detail["rule_count"] = static_cast<double>(impl.rules.size());
          report.detail["premise_total"] = static_cast<double>(premises);
          report.detail["premise_max"] = static_cast<double>(max_premises);
          if (x) {
            const Explanation e = explain_prediction(model, *x);
            report.local =
                static_cast<double>(std::get<RuleExplanation>(e.payload).conditions.size());
          } else {
            report.local = static_cast<double>(max_premises);
          }
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          report.global = static_cast<double>(impl.leaf_count());
          report.detail["depth"] = static_cast<double>(impl.depth);
          report.detail["node_count"] = static_cast<double>(impl.nodes.size());
          report.detail["leaf_count"] = static_cast<double>(impl.leaf_count());
          if (x) {
            const Explanation e = explain_prediction(model, *x);
            report.local =
                static_cast<double>(std::get<RuleExplanation>(e.payload).conditions.size());
          } else {
            report.local = static_cast<double>(impl.depth);
          }
        } else {
          report.global = static_cast<double>(impl.memory_x.rows);
          report.detail["memory_size"] = static_cast<double>(impl.memory_x.rows);
          report.detail["k"] = static_cast<double>(impl.k);
          report.local = static_cast<double>(impl.k);
        }
      },
      model.impl());
  return report;
}

nlohmann::json to_json(const FeatureAttribution& attribution) {
  nlohmann::json j;
  j["scope"] = attribution.scope == AttributionScope::global ? "global" : "local";
  j["intercept"] = attribution.intercept;
  if (attribution.scope == AttributionScope::local) j["score"] = attribution.score;
  j["contributions"] = nlohmann::json::array();
  for (const auto& entry : attribution.contributions)
    j["contributions"].push_back({{"feature", entry.feature}, {"value", entry.value}});
  return j;
}

nlohmann::json to_json(const Explanation& explanation, const Model& model) {
  nlohmann::json j;
  j["label"] = explanation.label;
  if (explanation.label >= 0) j["label_name"] = class_label(model, explanation.label);
  j["value"] = explanation.value;
  if (const auto* fa = std::get_if<FeatureAttribution>(&explanation.payload)) {
    j["kind"] = "attribution";
    j["attribution"] = to_json(*fa);
  } else if (const auto* re = std::get_if<RuleExplanation>(&explanation.payload)) {
    j["kind"] = "rule";
    j["conditions"] = nlohmann::json::array();
    for (const auto& c : re->conditions)
      j["conditions"].push_back(c.describe(model.feature_names()));
    j["covering_rules"] = re->covering_rules;
    j["used_default"] = re->used_default;
  } else if (const auto* ce = std::get_if<CaseExplanation>(&explanation.payload)) {
    j["kind"] = "cases";
    j["cases"] = nlohmann::json::array();
    for (const auto& rc : ce->cases)
      j["cases"].push_back({{"memory_index", rc.memory_index},
                            {"instance", rc.instance},
                            {"label", rc.label},
                            {"label_name", class_label(model, rc.label)},
                            {"distance", rc.distance}});
    nlohmann::json tally = nlohmann::json::object();
    for (const auto& [label, count] : ce->tally) tally[class_label(model, label)] = count;
    j["tally"] = std::move(tally);
  }
  return j;
}

nlohmann::json to_json(const ComplexityReport& report) {
  nlohmann::json j;
  j["local"] = report.local;
  j["global"] = report.global;
  j["detail"] = report.detail;
  return j;
}

std::string render_text(const Explanation& explanation, const Model& model) {
  std::ostringstream os;
  os << std::setprecision(6);
  if (const auto* fa = std::get_if<FeatureAttribution>(&explanation.payload)) {
    os << "local feature contributions (pre-link score " << fa->score << ")\n";
    os << "  intercept: " << fa->intercept << "\n";
    for (const auto& entry : fa->contributions)
      os << "  " << entry.feature << ": " << entry.value << "\n";
  } else if (const auto* re = std::get_if<RuleExplanation>(&explanation.payload)) {
    if (re->used_default) {
      os << "no rule covers the instance; default label applies\n";
    } else {
      os << "active conditions:\n";
      for (const auto& c : re->conditions)
        os << "  " << c.describe(model.feature_names()) << "\n";
      os << "covering rules: " << re->covering_rules << "\n";
    }
  } else if (const auto* ce = std::get_if<CaseExplanation>(&explanation.payload)) {
    os << "retrieved cases (ascending distance):\n";
    for (const auto& rc : ce->cases) {
      os << "  [";
      for (std::size_t i = 0; i < rc.instance.size(); ++i)
        os << (i ? ", " : "") << rc.instance[i];
      os << "] label=" << class_label(model, rc.label) << " distance=" << rc.distance << "\n";
    }
    os << "vote tally:";
    for (const auto& [label, count] : ce->tally)
      os << " " << class_label(model, label) << "=" << count;
    os << "\n";
  }
  if (explanation.label >= 0)
    os << "predicted label: " << class_label(model, explanation.label) << "\n";
  else
    os << "predicted value: " << explanation.value << "\n";
  return os.str();
}

std::string render_text(const ComplexityReport& report) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "complexity: local=" << report.local << " global=" << report.global << "\n";
  for (const auto& [key, value] : report.detail) os << "  " << key << ": " << value << "\n";
  return os.str();
}

namespace {

void render_tree_node(const DecisionTree& tree, int index, int indent, const Model& model,
                      std::ostringstream& os) {
  const TreeNode& node = tree.nodes[static_cast<std::size_t>(index)];
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  if (node.leaf) {
    os << pad << "-> " << class_label(model, node.label) << " (counts:";
    for (double c : node.class_counts) os << " " << c;
    os << ")\n";
    return;
  }
  os << pad << "if " << feature_label(model, node.feature) << " <= " << node.threshold << ":\n";
  render_tree_node(tree, node.left, indent + 1, model, os);
  os << pad << "else:\n";
  render_tree_node(tree, node.right, indent + 1, model, os);
}

}  // namespace

std::string render_structure(const Model& model) {
  std::ostringstream os;
  os << std::setprecision(6);
  std::visit(
      [&](const auto& impl) {
        using T = std::decay_t<decltype(impl)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          os << "linear model (" << to_string(impl.link) << " link)\n";
          os << "  intercept: " << impl.intercept << "\n";
          for (std::size_t j = 0; j < impl.weights.size(); ++j)
            os << "  " << feature_label(model, j) << ": " << impl.weights[j] << "\n";
        } else if constexpr (std::is_same_v<T, GamModel>) {
          os << "generalized additive model (" << to_string(impl.link) << " link)\n";
          os << "  intercept: " << impl.intercept << "\n";
          for (const auto& shape : impl.shapes) {
            os << "  shape " << feature_label(model, shape.feature) << " ["
               << shape.values.size() << " bins]:";
            for (double v : shape.values) os << " " << v;
            os << "\n";
          }
          for (const auto& inter : impl.interactions)
            os << "  interaction " << feature_label(model, inter.feature_a) << "*"
               << feature_label(model, inter.feature_b) << " ["
               << (inter.edges_a.size() - 1) << "x" << (inter.edges_b.size() - 1) << " grid]\n";
        } else if constexpr (std::is_same_v<T, RuleSet>) {
          os << "rule set (" << impl.rules.size() << " rules)\n";
          for (const auto& rule : impl.rules) {
            os << "  if ";
            for (std::size_t i = 0; i < rule.premises.size(); ++i)
              os << (i ? " and " : "") << rule.premises[i].describe(model.feature_names());
            os << " then " << class_label(model, rule.label) << "\n";
          }
          os << "  otherwise " << class_label(model, impl.default_label) << "\n";
        } else if constexpr (std::is_same_v<T, DecisionTree>) {
          os << "decision tree (depth " << impl.depth << ", " << impl.leaf_count()
             << " leaves)\n";
          render_tree_node(impl, impl.root, 1, model, os);
        } else {
          os << "instance model: " << impl.memory_x.rows << " memorized cases, k=" << impl.k
             << ", " << to_string(impl.metric) << " distance\n";
        }
      },
      model.impl());
  return os.str();
}

}  // namespace glassbox
