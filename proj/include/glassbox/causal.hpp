#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "glassbox/data.hpp"
#include "glassbox/models.hpp"
#include "json.hpp"

namespace glassbox {

struct CausalGraph {
  std::vector<std::string> variables;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // (parent, child)

  bool has_edge(std::size_t from, std::size_t to) const;
  std::vector<std::size_t> parents_of(std::size_t v) const;
  // Topological order; empty optional when the graph has a cycle.
  std::optional<std::vector<std::size_t>> topological_order() const;
  std::vector<bool> ancestors_of(std::size_t v) const;
};

struct NoiseSpec {
  enum class Kind { gaussian, categorical, none };
  Kind kind = Kind::gaussian;
  double mean = 0.0;
  double sd = 1.0;
  std::vector<double> probabilities;  // categorical: value k drawn with prob[k]

  double draw(std::mt19937_64& rng) const;
};

struct StructuralEquation {
  enum class Form { linear_additive, table, constant };
  std::string target;
  Form form = Form::linear_additive;
  // linear_additive: value = intercept + sum(coeffs[i] * parent[i]) + noise
  std::vector<std::string> parents;
  std::vector<double> coefficients;
  double intercept = 0.0;
  // table: value = entries[round(parent values)] + noise
  std::map<std::vector<int>, double> table;
  double table_default = 0.0;
  // constant (hard intervention): value = intercept, noise ignored

  double evaluate(const std::vector<double>& parent_values, double noise) const;
};

struct ScmViolation {
  std::string what;
};

class ScmModel {
 public:
  ScmModel() = default;
  ScmModel(std::vector<StructuralEquation> equations, std::vector<NoiseSpec> noises);

  const std::vector<StructuralEquation>& equations() const { return equations_; }
  const std::vector<NoiseSpec>& noises() const { return noises_; }
  const CausalGraph& graph() const { return graph_; }
  std::size_t variable_index(const std::string& name) const;

  nlohmann::json to_json() const;
  static ScmModel from_json(const nlohmann::json& j);
  static ScmModel load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<StructuralEquation> equations_;
  std::vector<NoiseSpec> noises_;
  CausalGraph graph_;  // derived from the equations at construction
};

struct Intervention {
  enum class Kind { hard, soft };
  Kind kind = Kind::hard;
  std::string variable;
  double value = 0.0;                              // hard: the constant
  std::optional<StructuralEquation> replacement;   // soft: the new mechanism

  static Intervention do_set(std::string variable, double value);
  static Intervention soft(StructuralEquation replacement);
};

// Empty list means the model is sound: acyclic, parents declared, stored
// graph matching the equations.
std::vector<ScmViolation> validate_scm(const ScmModel& scm);

// Ancestral sampling in topological order. Noise streams are keyed by
// variable name, so two models sharing a variable draw identical noise for
// it under the same seed (the coupling causal_effect relies on).
Dataset sample(const ScmModel& scm, std::size_t n, std::uint64_t seed);

// Returns the modified model; hard interventions drop parents and noise of
// the target equation.
ScmModel intervene(const ScmModel& scm, const Intervention& intervention);

struct CausalEffect {
  std::vector<std::string> variables;
  std::vector<double> mean_difference;  // E[X^I - X], coupled noise
  std::vector<double> standard_error;

  nlohmann::json to_json() const;
  std::string render_text() const;
};

CausalEffect causal_effect(const ScmModel& scm, const Intervention& intervention, std::size_t n,
                           std::uint64_t seed);

// Abduction / action / prediction. Requires invertible mechanisms
// (linear-additive with nonzero noise channel); table mechanisms are
// rejected.
std::map<std::string, double> counterfactual(const ScmModel& scm,
                                             const std::map<std::string, double>& observation,
                                             const Intervention& intervention);

struct FeatureSensitivity {
  std::string feature;
  double sensitivity = 0.0;
  bool is_ancestor = false;
  bool violates = false;
};

struct CausalConsistency {
  bool consistent = true;
  std::vector<FeatureSensitivity> features;

  nlohmann::json to_json() const;
  std::string render_text() const;
};

// Indicator that f only reacts to interventions on ancestors of `target`:
// every non-ancestor feature must have mean |f(x^do) - f(x)| <= tol. The
// grid defaults to {mean - sd, mean + sd} per feature, estimated from the
// base sample.
CausalConsistency causal_consistency(const Model& model, const ScmModel& scm,
                                     const std::string& target,
                                     const std::map<std::string, std::vector<double>>& grid,
                                     std::size_t n, std::uint64_t seed, double tol);

}  // namespace glassbox
