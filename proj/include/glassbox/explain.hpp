#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "glassbox/models.hpp"
#include "json.hpp"

namespace glassbox {

enum class AttributionScope { global, local };

struct AttributionEntry {
  std::string feature;
  double value = 0.0;
};

struct FeatureAttribution {
  AttributionScope scope = AttributionScope::global;
  double intercept = 0.0;
  std::vector<AttributionEntry> contributions;
  // Local scope: intercept + sum of contributions (the pre-link score; for
  // logistic links contributions are read on the logit scale).
  double score = 0.0;
};

struct RuleExplanation {
  // Active rule premises (rule set) or root-to-leaf conditions in
  // evaluation order (tree).
  std::vector<Condition> conditions;
  int label = 0;
  std::size_t covering_rules = 0;  // rule sets: how many rules covered x
  bool used_default = false;       // rule sets: nothing covered x
};

struct CaseExplanation {
  std::vector<RetrievedCase> cases;  // ascending distance, exactly k
  std::map<int, std::size_t> tally;
  int label = 0;
};

struct Explanation {
  int label = -1;       // equals predict(model, x); -1 for regression
  double value = 0.0;   // predicted value / positive-class score
  std::variant<FeatureAttribution, RuleExplanation, CaseExplanation> payload;
};

struct ComplexityReport {
  double local = 0.0;   // cost attributable to one prediction
  double global = 0.0;  // whole-model cost
  std::map<std::string, double> detail;
};

// Linear: the weights themselves. GAM: mass-weighted mean |shape value| per
// feature (interaction entries named "a*b"). Rule, tree, and instance
// families explain through explain_prediction instead.
FeatureAttribution global_importance(const Model& model);

// Linear: per-feature theta_i * x_i. GAM: shape contributions at x.
FeatureAttribution local_importance(const Model& model, std::span<const double> x);

Explanation explain_prediction(const Model& model, std::span<const double> x);

// With an instance the local component is the realized cost (active-rule
// premises, path length, nonzero contributions); without one it is the
// worst-case bound (max premises, depth, k).
ComplexityReport complexity(const Model& model,
                            std::optional<std::span<const double>> x = std::nullopt);

nlohmann::json to_json(const FeatureAttribution& attribution);
nlohmann::json to_json(const Explanation& explanation, const Model& model);
nlohmann::json to_json(const ComplexityReport& report);

// Plain-text rendering for the CLI.
std::string render_text(const Explanation& explanation, const Model& model);
std::string render_text(const ComplexityReport& report);

// Whole-model view: weight table, shape summaries, rule list, indented
// tree, or memory statistics.
std::string render_structure(const Model& model);

}  // namespace glassbox
