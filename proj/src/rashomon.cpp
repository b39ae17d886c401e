#include "glassbox/rashomon.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "glassbox/explain.hpp"
#include "glassbox/fairness.hpp"
#include "glassbox/privacy.hpp"

namespace glassbox {

std::size_t HypothesisSpaceSpec::total_candidates() const {
  return tree_max_depth.size() * tree_min_leaf.size() +
         rules_max_premises.size() * rules_min_coverage.size() +
         knn_k.size() * knn_metric.size() + logistic_l1.size() * logistic_l2.size() +
         gam_bins.size();
}

std::vector<FitSpec> HypothesisSpaceSpec::enumerate() const {
  std::vector<FitSpec> specs;
  specs.reserve(total_candidates());
  for (int depth : tree_max_depth)
    for (int leaf : tree_min_leaf) specs.push_back(TreeParams{depth, leaf});
  for (int premises : rules_max_premises)
    for (int coverage : rules_min_coverage) specs.push_back(RulesParams{premises, coverage});
  for (int k : knn_k)
    for (Metric metric : knn_metric) specs.push_back(KnnParams{k, metric});
  for (double l1 : logistic_l1)
    for (double l2 : logistic_l2) {
      LogisticParams p;
      p.l1 = l1;
      p.l2 = l2;
      specs.push_back(p);
    }
  for (int bins : gam_bins) {
    GamParams p;
    p.bins = bins;
    specs.push_back(p);
  }
  return specs;
}

nlohmann::json HypothesisSpaceSpec::to_json() const {
  nlohmann::json j;
  j["tree"] = {{"max_depth", tree_max_depth}, {"min_leaf", tree_min_leaf}};
  j["rules"] = {{"max_premises", rules_max_premises}, {"min_coverage", rules_min_coverage}};
  nlohmann::json metrics = nlohmann::json::array();
  for (Metric m : knn_metric) metrics.push_back(to_string(m));
  j["knn"] = {{"k", knn_k}, {"metric", metrics}};
  j["logistic"] = {{"l1", logistic_l1}, {"l2", logistic_l2}};
  j["gam"] = {{"bins", gam_bins}};
  return j;
}

HypothesisSpaceSpec HypothesisSpaceSpec::from_json(const nlohmann::json& j) {
  HypothesisSpaceSpec spec;
  if (j.contains("tree")) {
    spec.tree_max_depth = j["tree"].value("max_depth", std::vector<int>());
    spec.tree_min_leaf = j["tree"].value("min_leaf", std::vector<int>{1});
  }
  if (j.contains("rules")) {
    spec.rules_max_premises = j["rules"].value("max_premises", std::vector<int>());
    spec.rules_min_coverage = j["rules"].value("min_coverage", std::vector<int>{1});
  }
  if (j.contains("knn")) {
    spec.knn_k = j["knn"].value("k", std::vector<int>());
    for (const auto& mj : j["knn"].value("metric", std::vector<std::string>{"euclidean"}))
      spec.knn_metric.push_back(metric_from_string(mj));
  }
  if (j.contains("logistic")) {
    spec.logistic_l1 = j["logistic"].value("l1", std::vector<double>());
    spec.logistic_l2 = j["logistic"].value("l2", std::vector<double>{0.0});
  }
  if (j.contains("gam")) spec.gam_bins = j["gam"].value("bins", std::vector<int>());
  return spec;
}

nlohmann::json ModelCard::to_json() const {
  nlohmann::json j;
  j["id"] = id;
  j["family"] = family;
  j["hyperparameters"] = hyperparameters;
  j["loss"] = loss;
  j["complexity"] = complexity;
  if (delta) j["delta"] = *delta;
  if (pi) j["pi"] = *pi;
  if (causal_consistent) j["causal_consistent"] = *causal_consistent;
  j["failed"] = failed;
  if (failed) j["failure"] = failure;
  return j;
}

EnumerationResult enumerate_and_fit(const HypothesisSpaceSpec& spec, const Dataset& train,
                                    const Dataset& eval, std::uint64_t seed, unsigned jobs) {
  (void)seed;  // all learners are deterministic; the seed is recorded by the caller
  const auto specs = spec.enumerate();
  if (specs.empty()) throw ArgumentError("enumerate_and_fit: empty hypothesis grid");
  if (eval.n_rows() == 0) throw ArgumentError("enumerate_and_fit: empty evaluation split");

  EnumerationResult result;
  result.cards.resize(specs.size());
  result.models.resize(specs.size());

  auto fit_one = [&](std::size_t i) {
    ModelCard card;
    card.id = static_cast<int>(i);
    card.family = family_name(specs[i]);
    card.hyperparameters = fit_spec_to_json(specs[i]);
    const auto start = std::chrono::steady_clock::now();
    try {
      Model model = fit(specs[i], train);
      card.loss = zero_one_loss(model, eval);
      card.complexity = complexity(model).global;
      result.models[i] = std::move(model);
    } catch (const Error& e) {
      card.failed = true;
      card.failure = e.what();
    }
    card.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.cards[i] = std::move(card);
  };

  if (jobs <= 1) {
    for (std::size_t i = 0; i < specs.size(); ++i) fit_one(i);
  } else {
    // Independent jobs writing to pre-sized slots: merge order is the
    // enumeration order regardless of scheduling.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const unsigned count = std::min<unsigned>(jobs, static_cast<unsigned>(specs.size()));
    workers.reserve(count);
    for (unsigned w = 0; w < count; ++w) {
      workers.emplace_back([&]() {
        for (std::size_t i = next.fetch_add(1); i < specs.size(); i = next.fetch_add(1))
          fit_one(i);
      });
    }
    for (auto& worker : workers) worker.join();
  }
  return result;
}

RashomonSet rashomon_set(const std::vector<ModelCard>& cards, double epsilon) {
  if (cards.empty()) throw ArgumentError("rashomon_set: no model cards");
  if (epsilon < 0.0) throw ArgumentError("rashomon_set: epsilon must be nonnegative");

  RashomonSet set;
  set.epsilon = epsilon;
  double best = std::numeric_limits<double>::infinity();
  std::size_t space = 0;
  for (const auto& card : cards) {
    if (card.failed) continue;
    ++space;
    best = std::min(best, card.loss);
  }
  if (space == 0) throw ArgumentError("rashomon_set: every candidate failed to fit");
  set.best_loss = best;
  set.space_size = space;
  for (const auto& card : cards)
    if (!card.failed && card.loss <= best + epsilon) set.members.push_back(card);
  set.ratio = static_cast<double>(set.members.size()) / static_cast<double>(space);
  return set;
}

namespace {

std::vector<int> binary_column_codes(const Dataset& data, const std::string& column) {
  const Column& col = data.column(column);
  std::vector<int> codes;
  codes.reserve(data.n_rows());
  if (col.spec.kind == ColumnKind::categorical) {
    if (col.categories.size() > 2)
      throw ArgumentError("column '" + column + "' must be binary for this audit");
    codes = col.codes;
  } else {
    for (double v : col.numeric) {
      if (v != 0.0 && v != 1.0)
        throw ArgumentError("numeric column '" + column + "' must contain only 0/1");
      codes.push_back(static_cast<int>(v));
    }
  }
  return codes;
}

}  // namespace

RashomonSet annotate_ethics(const RashomonSet& set, const EnumerationResult& fits,
                            const Dataset& train, const Dataset& eval,
                            const AnnotateOptions& options) {
  RashomonSet out = set;
  out.audits_run.clear();
  if (!options.any()) {
    out.audits_run = {"none"};
    return out;
  }
  if (!options.sensitive_column.empty()) out.audits_run.push_back("fairness");
  if (options.run_membership) out.audits_run.push_back("privacy");
  if (options.scm) out.audits_run.push_back("causal");
  if (!options.qi_columns.empty()) {
    out.audits_run.push_back("anonymity");
    out.data_anonymity = anonymity_report(eval, options.qi_columns, options.qi_sensitive);
  }

  std::optional<std::vector<int>> sensitive;
  std::optional<std::vector<double>> resolving;
  if (!options.sensitive_column.empty()) {
    if (!eval.schema().has_column(options.sensitive_column))
      throw ArgumentError("fairness audit skipped: evaluation data has no column '" +
                          options.sensitive_column + "'");
    sensitive = binary_column_codes(eval, options.sensitive_column);
    if (options.resolving_column) {
      const Column& r = eval.column(*options.resolving_column);
      std::vector<double> values;
      for (std::size_t i = 0; i < eval.n_rows(); ++i)
        values.push_back(r.spec.kind == ColumnKind::numeric ? r.numeric[i]
                                                            : static_cast<double>(r.codes[i]));
      resolving = std::move(values);
    }
  }
  if (options.scm && options.causal_target.empty())
    throw ArgumentError("causal audit skipped: no target variable named");

  for (ModelCard& card : out.members) {
    const auto& model = fits.models.at(static_cast<std::size_t>(card.id));
    if (!model) continue;
    if (sensitive) {
      const auto predictions = predict_all(*model, eval);
      std::vector<int> yhat;
      yhat.reserve(predictions.size());
      for (const auto& p : predictions) yhat.push_back(p.label);
      card.delta = audit_fairness(eval.label_codes(), yhat, *sensitive, resolving).delta;
    }
    if (options.run_membership)
      card.pi = membership_inference(*model, train, eval, options.shadows, options.seed).pi;
    if (options.scm)
      card.causal_consistent =
          causal_consistency(*model, *options.scm, options.causal_target, {}, options.causal_n,
                             options.seed, options.causal_tol)
              .consistent;
  }
  return out;
}

SelectCriterion select_criterion_from_string(const std::string& s) {
  if (s == "loss") return SelectCriterion::loss;
  if (s == "complexity") return SelectCriterion::complexity;
  if (s == "delta") return SelectCriterion::delta;
  if (s == "pi") return SelectCriterion::pi;
  throw ArgumentError("unknown selection criterion: " + s);
}

std::string to_string(SelectCriterion c) {
  switch (c) {
    case SelectCriterion::loss: return "loss";
    case SelectCriterion::complexity: return "complexity";
    case SelectCriterion::delta: return "delta";
    case SelectCriterion::pi: return "pi";
  }
  return "?";
}

namespace {

double criterion_value(const ModelCard& card, SelectCriterion criterion) {
  switch (criterion) {
    case SelectCriterion::loss: return card.loss;
    case SelectCriterion::complexity: return card.complexity;
    case SelectCriterion::delta:
      if (!card.delta)
        throw ArgumentError("selection criterion 'delta' is unpopulated (fairness audit not run)");
      return *card.delta;
    case SelectCriterion::pi:
      if (!card.pi)
        throw ArgumentError("selection criterion 'pi' is unpopulated (privacy audit not run)");
      return *card.pi;
  }
  throw ArgumentError("unknown selection criterion");
}

}  // namespace

SelectionResult select(const RashomonSet& set, const std::vector<SelectCriterion>& policy) {
  if (set.members.empty()) throw ArgumentError("select: empty Rashomon set");
  if (policy.empty()) throw ArgumentError("select: empty policy");

  auto lex_less = [&](const ModelCard& a, const ModelCard& b) {
    for (SelectCriterion c : policy) {
      const double va = criterion_value(a, c);
      const double vb = criterion_value(b, c);
      if (va != vb) return va < vb;
    }
    return a.id < b.id;
  };

  SelectionResult result;
  result.selected = *std::min_element(set.members.begin(), set.members.end(), lex_less);

  auto dominates = [&](const ModelCard& a, const ModelCard& b) {
    bool strict = false;
    for (SelectCriterion c : policy) {
      const double va = criterion_value(a, c);
      const double vb = criterion_value(b, c);
      if (va > vb) return false;
      if (va < vb) strict = true;
    }
    return strict;
  };
  for (const ModelCard& card : set.members) {
    bool dominated = false;
    for (const ModelCard& other : set.members)
      if (dominates(other, card)) {
        dominated = true;
        break;
      }
    if (!dominated) result.pareto.push_back(card);
  }
  return result;
}

nlohmann::json RashomonSet::to_json() const {
  nlohmann::json j;
  j["best_loss"] = best_loss;
  j["epsilon"] = epsilon;
  j["space_size"] = space_size;
  j["ratio"] = ratio;
  j["audits_run"] = audits_run;
  if (data_anonymity) j["data_anonymity"] = data_anonymity->to_json();
  j["members"] = nlohmann::json::array();
  for (const auto& card : members) j["members"].push_back(card.to_json());
  return j;
}

std::string RashomonSet::render_text() const {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "Rashomon set: best loss " << best_loss << ", epsilon " << epsilon << ", "
     << members.size() << "/" << space_size << " candidates (ratio " << ratio << ")\n";
  os << render_cards_text(members);
  return os.str();
}

std::string render_cards_text(const std::vector<ModelCard>& cards) {
  std::ostringstream os;
  os << std::left << std::setw(5) << "id" << std::setw(10) << "family" << std::setw(10) << "loss"
     << std::setw(12) << "complexity" << std::setw(10) << "delta" << std::setw(10) << "pi"
     << std::setw(8) << "causal" << "hyperparameters\n";
  for (const auto& card : cards) {
    os << std::left << std::setw(5) << card.id << std::setw(10) << card.family;
    if (card.failed) {
      os << "failed: " << card.failure << "\n";
      continue;
    }
    os << std::setw(10) << std::setprecision(4) << card.loss << std::setw(12) << card.complexity;
    if (card.delta) os << std::setw(10) << *card.delta;
    else os << std::setw(10) << "-";
    if (card.pi) os << std::setw(10) << *card.pi;
    else os << std::setw(10) << "-";
    if (card.causal_consistent) os << std::setw(8) << (*card.causal_consistent ? "yes" : "no");
    else os << std::setw(8) << "-";
    os << card.hyperparameters.dump() << "\n";
  }
  return os.str();
}

}  // namespace glassbox
