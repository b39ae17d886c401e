#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "glassbox/causal.hpp"
#include "glassbox/data.hpp"
#include "glassbox/models.hpp"
#include "glassbox/privacy.hpp"
#include "json.hpp"

namespace glassbox {

// Finite hyperparameter grids per family. Enumeration order is fixed:
// tree, rules, knn, logistic, gam, each lexicographic over its grid lists.
struct HypothesisSpaceSpec {
  std::vector<int> tree_max_depth;
  std::vector<int> tree_min_leaf;
  std::vector<int> rules_max_premises;
  std::vector<int> rules_min_coverage;
  std::vector<int> knn_k;
  std::vector<Metric> knn_metric;
  std::vector<double> logistic_l1;
  std::vector<double> logistic_l2;
  std::vector<int> gam_bins;

  std::size_t total_candidates() const;
  std::vector<FitSpec> enumerate() const;

  nlohmann::json to_json() const;
  static HypothesisSpaceSpec from_json(const nlohmann::json& j);
};

struct ModelCard {
  int id = -1;
  std::string family;
  nlohmann::json hyperparameters;
  double loss = 1.0;        // 0-1 loss on the evaluation split
  double complexity = 0.0;  // family-specific global complexity
  double fit_seconds = 0.0; // reported on stderr only; kept out of files
  std::optional<double> delta;
  std::optional<double> pi;
  std::optional<bool> causal_consistent;
  bool failed = false;
  std::string failure;

  nlohmann::json to_json() const;
};

struct EnumerationResult {
  std::vector<ModelCard> cards;
  std::vector<std::optional<Model>> models;  // nullopt for failed fits
};

// Fits every candidate on `train` and scores 0-1 loss on `eval`.
// Candidates are independent jobs; results merge in enumeration order, so
// any `jobs` level produces the same output.
EnumerationResult enumerate_and_fit(const HypothesisSpaceSpec& spec, const Dataset& train,
                                    const Dataset& eval, std::uint64_t seed, unsigned jobs = 1);

struct RashomonSet {
  double best_loss = 0.0;
  double epsilon = 0.0;
  std::size_t space_size = 0;  // successfully fitted candidates
  double ratio = 0.0;
  std::vector<ModelCard> members;
  std::vector<std::string> audits_run = {"none"};     // filled by annotate_ethics
  std::optional<AnonymityReport> data_anonymity;      // data-level k/l/t, when requested

  nlohmann::json to_json() const;
  std::string render_text() const;
};

// Members are the cards with loss <= best + epsilon (additive margin).
RashomonSet rashomon_set(const std::vector<ModelCard>& cards, double epsilon);

struct AnnotateOptions {
  std::string sensitive_column;             // non-empty enables the fairness audit
  std::optional<std::string> resolving_column;
  bool run_membership = false;              // enables the privacy audit
  std::size_t shadows = 4;
  std::optional<ScmModel> scm;              // with causal_target enables the causal audit
  std::string causal_target;
  std::size_t causal_n = 1000;
  double causal_tol = 1e-6;
  std::vector<std::string> qi_columns;      // non-empty attaches data-level k/l/t
  std::string qi_sensitive;                 // sensitive column for l-diversity / t-closeness
  std::uint64_t seed = 0;

  bool any() const {
    return !sensitive_column.empty() || run_membership || scm.has_value() || !qi_columns.empty();
  }
};

// Fills delta / pi / causal_consistent on every member, as requested.
// Fairness reads y and the sensitive column from `eval`; membership
// inference uses `train` as the member side and `eval` as holdout.
RashomonSet annotate_ethics(const RashomonSet& set, const EnumerationResult& fits,
                            const Dataset& train, const Dataset& eval,
                            const AnnotateOptions& options);

enum class SelectCriterion { loss, complexity, delta, pi };

SelectCriterion select_criterion_from_string(const std::string& s);
std::string to_string(SelectCriterion c);

struct SelectionResult {
  ModelCard selected;
  std::vector<ModelCard> pareto;  // non-dominated members over the policy criteria
};

// Lexicographic minimization over the ordered criteria; final ties go to
// the lowest model id. Throws if a criterion was not populated.
SelectionResult select(const RashomonSet& set, const std::vector<SelectCriterion>& policy);

std::string render_cards_text(const std::vector<ModelCard>& cards);

}  // namespace glassbox
