#include "glassbox/causal.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <queue>
#include <set>
#include <sstream>

namespace glassbox {

bool CausalGraph::has_edge(std::size_t from, std::size_t to) const {
  return std::find(edges.begin(), edges.end(), std::make_pair(from, to)) != edges.end();
}

std::vector<std::size_t> CausalGraph::parents_of(std::size_t v) const {
  std::vector<std::size_t> out;
  for (const auto& [from, to] : edges)
    if (to == v) out.push_back(from);
  return out;
}

std::optional<std::vector<std::size_t>> CausalGraph::topological_order() const {
  std::vector<std::size_t> indegree(variables.size(), 0);
  for (const auto& [from, to] : edges) indegree[to]++;
  // lowest-index-first queue keeps the order deterministic
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < variables.size(); ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    const std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (const auto& [from, to] : edges)
      if (from == v && --indegree[to] == 0) ready.push(to);
  }
  if (order.size() != variables.size()) return std::nullopt;
  return order;
}

std::vector<bool> CausalGraph::ancestors_of(std::size_t v) const {
  std::vector<bool> mark(variables.size(), false);
  std::vector<std::size_t> stack = {v};
  while (!stack.empty()) {
    const std::size_t cur = stack.back();
    stack.pop_back();
    for (const auto& [from, to] : edges) {
      if (to == cur && !mark[from]) {
        mark[from] = true;
        stack.push_back(from);
      }
    }
  }
  return mark;
}

double NoiseSpec::draw(std::mt19937_64& rng) const {
  switch (kind) {
    case Kind::gaussian: {
      std::normal_distribution<double> dist(mean, sd);
      return dist(rng);
    }
    case Kind::categorical: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      double u = unit(rng);
      double acc = 0.0;
      for (std::size_t k = 0; k < probabilities.size(); ++k) {
        acc += probabilities[k];
        if (u < acc) return static_cast<double>(k);
      }
      return probabilities.empty() ? 0.0 : static_cast<double>(probabilities.size() - 1);
    }
    case Kind::none:
      return 0.0;
  }
  return 0.0;
}

double StructuralEquation::evaluate(const std::vector<double>& parent_values,
                                    double noise) const {
  switch (form) {
    case Form::constant:
      return intercept;
    case Form::linear_additive: {
      double v = intercept + noise;
      for (std::size_t i = 0; i < parents.size(); ++i)
        v += (i < coefficients.size() ? coefficients[i] : 0.0) * parent_values[i];
      return v;
    }
    case Form::table: {
      std::vector<int> key(parent_values.size());
      for (std::size_t i = 0; i < parent_values.size(); ++i)
        key[i] = static_cast<int>(std::lround(parent_values[i]));
      auto it = table.find(key);
      return (it != table.end() ? it->second : table_default) + noise;
    }
  }
  return 0.0;
}

namespace {

CausalGraph derive_graph(const std::vector<StructuralEquation>& equations) {
  CausalGraph graph;
  for (const auto& eq : equations) graph.variables.push_back(eq.target);
  auto index_of = [&](const std::string& name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < graph.variables.size(); ++i)
      if (graph.variables[i] == name) return i;
    return std::nullopt;
  };
  for (std::size_t child = 0; child < equations.size(); ++child) {
    for (const auto& parent : equations[child].parents) {
      if (auto p = index_of(parent)) graph.edges.emplace_back(*p, child);
    }
  }
  return graph;
}

}  // namespace

ScmModel::ScmModel(std::vector<StructuralEquation> equations, std::vector<NoiseSpec> noises)
    : equations_(std::move(equations)), noises_(std::move(noises)) {
  if (noises_.size() != equations_.size())
    throw ArgumentError("scm: one noise distribution per equation required");
  std::set<std::string> names;
  for (const auto& eq : equations_)
    if (!names.insert(eq.target).second)
      throw ArgumentError("scm: duplicate equation for variable " + eq.target);
  graph_ = derive_graph(equations_);
}

std::size_t ScmModel::variable_index(const std::string& name) const {
  for (std::size_t i = 0; i < equations_.size(); ++i)
    if (equations_[i].target == name) return i;
  throw ArgumentError("scm: unknown variable " + name);
}

std::vector<ScmViolation> validate_scm(const ScmModel& scm) {
  std::vector<ScmViolation> violations;
  std::set<std::string> declared;
  for (const auto& eq : scm.equations()) declared.insert(eq.target);
  for (const auto& eq : scm.equations()) {
    for (const auto& parent : eq.parents) {
      if (!declared.count(parent))
        violations.push_back({"equation for '" + eq.target + "' references undeclared parent '" +
                              parent + "'"});
      if (parent == eq.target)
        violations.push_back({"equation for '" + eq.target + "' lists itself as a parent"});
    }
    if (eq.form == StructuralEquation::Form::linear_additive &&
        eq.coefficients.size() != eq.parents.size())
      violations.push_back({"equation for '" + eq.target + "' has " +
                            std::to_string(eq.coefficients.size()) + " coefficients for " +
                            std::to_string(eq.parents.size()) + " parents"});
  }
  if (!scm.graph().topological_order())
    violations.push_back({"the induced graph contains a cycle"});

  const CausalGraph derived = derive_graph(scm.equations());
  auto canon = [](const CausalGraph& g) {
    std::set<std::pair<std::size_t, std::size_t>> s(g.edges.begin(), g.edges.end());
    return s;
  };
  if (canon(derived) != canon(scm.graph()))
    violations.push_back({"stored graph does not match the graph derived from the equations"});
  return violations;
}

namespace {

void require_valid(const ScmModel& scm) {
  const auto violations = validate_scm(scm);
  if (!violations.empty()) throw ArgumentError("invalid scm: " + violations.front().what);
}

// Per-variable noise columns, keyed by variable name so interventions do
// not shift other variables' streams.
std::vector<std::vector<double>> draw_noise(const ScmModel& scm, std::size_t n,
                                            std::uint64_t seed) {
  std::vector<std::vector<double>> noise(scm.equations().size());
  for (std::size_t v = 0; v < scm.equations().size(); ++v) {
    auto rng = seeded_rng(seed, hash_string(scm.equations()[v].target));
    noise[v].resize(n);
    for (std::size_t i = 0; i < n; ++i) noise[v][i] = scm.noises()[v].draw(rng);
  }
  return noise;
}

Matrix evaluate_scm(const ScmModel& scm, const std::vector<std::vector<double>>& noise,
                    std::size_t n) {
  const auto order = scm.graph().topological_order();
  Matrix values(n, scm.equations().size());
  for (std::size_t v : *order) {
    const auto& eq = scm.equations()[v];
    std::vector<std::size_t> parent_idx;
    parent_idx.reserve(eq.parents.size());
    for (const auto& p : eq.parents) parent_idx.push_back(scm.variable_index(p));
    std::vector<double> parent_values(eq.parents.size());
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < parent_idx.size(); ++j)
        parent_values[j] = values(i, parent_idx[j]);
      values(i, v) = eq.evaluate(parent_values, noise[v][i]);
    }
  }
  return values;
}

}  // namespace

Dataset sample(const ScmModel& scm, std::size_t n, std::uint64_t seed) {
  require_valid(scm);
  if (n == 0) throw ArgumentError("sample: n must be >= 1");
  const Matrix values = evaluate_scm(scm, draw_noise(scm, n, seed), n);

  Schema schema;
  schema.task = {TaskType::regression, 2};
  std::vector<Column> columns;
  for (std::size_t v = 0; v < scm.equations().size(); ++v) {
    ColumnSpec spec{scm.equations()[v].target, ColumnKind::numeric, {ColumnRole::feature}};
    schema.columns.push_back(spec);
    Column col;
    col.spec = spec;
    col.numeric.resize(n);
    for (std::size_t i = 0; i < n; ++i) col.numeric[i] = values(i, v);
    columns.push_back(std::move(col));
  }
  return Dataset(std::move(schema), std::move(columns));
}

Intervention Intervention::do_set(std::string variable, double value) {
  Intervention iv;
  iv.kind = Kind::hard;
  iv.variable = std::move(variable);
  iv.value = value;
  return iv;
}

Intervention Intervention::soft(StructuralEquation replacement) {
  Intervention iv;
  iv.kind = Kind::soft;
  iv.variable = replacement.target;
  iv.replacement = std::move(replacement);
  return iv;
}

ScmModel intervene(const ScmModel& scm, const Intervention& intervention) {
  const std::size_t v = scm.variable_index(intervention.variable);
  std::vector<StructuralEquation> equations = scm.equations();
  std::vector<NoiseSpec> noises = scm.noises();
  if (intervention.kind == Intervention::Kind::hard) {
    StructuralEquation eq;
    eq.target = intervention.variable;
    eq.form = StructuralEquation::Form::constant;
    eq.intercept = intervention.value;
    equations[v] = std::move(eq);
    noises[v].kind = NoiseSpec::Kind::none;  // PA and U both severed
  } else {
    if (!intervention.replacement)
      throw ArgumentError("soft intervention requires a replacement mechanism");
    if (intervention.replacement->target != intervention.variable)
      throw ArgumentError("soft intervention replacement must target the intervened variable");
    equations[v] = *intervention.replacement;
  }
  ScmModel result(std::move(equations), std::move(noises));
  const auto violations = validate_scm(result);
  if (!violations.empty())
    throw ArgumentError("intervention produced an invalid scm: " + violations.front().what);
  return result;
}

CausalEffect causal_effect(const ScmModel& scm, const Intervention& intervention, std::size_t n,
                           std::uint64_t seed) {
  require_valid(scm);
  if (n < 1) throw ArgumentError("causal_effect: n must be >= 1");
  const ScmModel post = intervene(scm, intervention);

  // Coupled noise: both worlds consume the same per-variable streams, so
  // variables untouched by the intervention cancel exactly.
  const auto noise = draw_noise(scm, n, seed);
  const Matrix base = evaluate_scm(scm, noise, n);
  const Matrix shifted = evaluate_scm(post, noise, n);

  CausalEffect effect;
  effect.variables = scm.graph().variables;
  effect.mean_difference.resize(effect.variables.size());
  effect.standard_error.resize(effect.variables.size());
  for (std::size_t v = 0; v < effect.variables.size(); ++v) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += shifted(i, v) - base(i, v);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = shifted(i, v) - base(i, v) - mean;
      var += d * d;
    }
    var /= n > 1 ? static_cast<double>(n - 1) : 1.0;
    effect.mean_difference[v] = mean;
    effect.standard_error[v] = std::sqrt(var / static_cast<double>(n));
  }
  return effect;
}

std::map<std::string, double> counterfactual(const ScmModel& scm,
                                             const std::map<std::string, double>& observation,
                                             const Intervention& intervention) {
  require_valid(scm);
  for (const auto& eq : scm.equations())
    if (!observation.count(eq.target))
      throw ArgumentError("counterfactual: observation is missing variable " + eq.target);

  // Abduction: recover each noise from the observed assignment.
  std::vector<double> recovered(scm.equations().size(), 0.0);
  for (std::size_t v = 0; v < scm.equations().size(); ++v) {
    const auto& eq = scm.equations()[v];
    switch (eq.form) {
      case StructuralEquation::Form::table:
        throw UnsupportedError(
            "counterfactual: table mechanisms are not noise-invertible; variable " + eq.target);
      case StructuralEquation::Form::constant:
        recovered[v] = 0.0;
        break;
      case StructuralEquation::Form::linear_additive: {
        double value = observation.at(eq.target) - eq.intercept;
        for (std::size_t i = 0; i < eq.parents.size(); ++i)
          value -= eq.coefficients[i] * observation.at(eq.parents[i]);
        recovered[v] = value;
        break;
      }
    }
  }

  // Action + prediction with the recovered noises.
  const ScmModel post = intervene(scm, intervention);
  const auto order = post.graph().topological_order();
  std::map<std::string, double> result;
  for (std::size_t v : *order) {
    const auto& eq = post.equations()[v];
    std::vector<double> parent_values;
    parent_values.reserve(eq.parents.size());
    for (const auto& p : eq.parents) parent_values.push_back(result.at(p));
    result[eq.target] = eq.evaluate(parent_values, recovered[scm.variable_index(eq.target)]);
  }
  return result;
}

CausalConsistency causal_consistency(const Model& model, const ScmModel& scm,
                                     const std::string& target,
                                     const std::map<std::string, std::vector<double>>& grid,
                                     std::size_t n, std::uint64_t seed, double tol) {
  require_valid(scm);
  const std::size_t target_idx = scm.variable_index(target);  // throws if absent
  const auto ancestor = scm.graph().ancestors_of(target_idx);

  const auto& feature_names = model.feature_names();
  std::vector<std::size_t> feature_var(feature_names.size());
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    feature_var[f] = scm.variable_index(feature_names[f]);
    if (feature_names[f] == target)
      throw ArgumentError("causal_consistency: model uses the target variable as a feature");
  }

  const auto noise = draw_noise(scm, n, seed);
  const Matrix base = evaluate_scm(scm, noise, n);

  auto model_output = [&](const Matrix& world, std::size_t row) {
    std::vector<double> x(feature_var.size());
    for (std::size_t f = 0; f < feature_var.size(); ++f) x[f] = world(row, feature_var[f]);
    return predict(model, x).value;
  };

  std::vector<double> base_output(n);
  for (std::size_t i = 0; i < n; ++i) base_output[i] = model_output(base, i);

  CausalConsistency out;
  for (std::size_t f = 0; f < feature_names.size(); ++f) {
    const std::size_t v = feature_var[f];
    std::vector<double> alphas;
    if (auto it = grid.find(feature_names[f]); it != grid.end()) {
      alphas = it->second;
    } else {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += base(i, v);
      mean /= static_cast<double>(n);
      double var = 0.0;
      for (std::size_t i = 0; i < n; ++i) var += (base(i, v) - mean) * (base(i, v) - mean);
      var /= static_cast<double>(n);
      const double sd = std::sqrt(var);
      alphas = {mean - sd, mean + sd};
    }

    double acc = 0.0;
    std::size_t count = 0;
    for (double alpha : alphas) {
      const ScmModel post = intervene(scm, Intervention::do_set(feature_names[f], alpha));
      const Matrix world = evaluate_scm(post, noise, n);
      for (std::size_t i = 0; i < n; ++i) {
        acc += std::abs(model_output(world, i) - base_output[i]);
        ++count;
      }
    }

    FeatureSensitivity fs;
    fs.feature = feature_names[f];
    fs.sensitivity = count ? acc / static_cast<double>(count) : 0.0;
    fs.is_ancestor = ancestor[v];
    fs.violates = !fs.is_ancestor && fs.sensitivity > tol;
    if (fs.violates) out.consistent = false;
    out.features.push_back(std::move(fs));
  }
  return out;
}

// --- serialization ---------------------------------------------------------

nlohmann::json ScmModel::to_json() const {
  nlohmann::json j;
  j["variables"] = nlohmann::json::array();
  for (std::size_t v = 0; v < equations_.size(); ++v) {
    const auto& eq = equations_[v];
    const auto& noise = noises_[v];
    nlohmann::json nj;
    switch (noise.kind) {
      case NoiseSpec::Kind::gaussian:
        nj = {{"type", "gaussian"}, {"mean", noise.mean}, {"sd", noise.sd}};
        break;
      case NoiseSpec::Kind::categorical:
        nj = {{"type", "categorical"}, {"probs", noise.probabilities}};
        break;
      case NoiseSpec::Kind::none:
        nj = {{"type", "none"}};
        break;
    }
    nlohmann::json mj;
    switch (eq.form) {
      case StructuralEquation::Form::linear_additive:
        mj = {{"type", "linear"},
              {"intercept", eq.intercept},
              {"parents", eq.parents},
              {"coeffs", eq.coefficients}};
        break;
      case StructuralEquation::Form::constant:
        mj = {{"type", "constant"}, {"value", eq.intercept}};
        break;
      case StructuralEquation::Form::table: {
        mj["type"] = "table";
        mj["parents"] = eq.parents;
        mj["default"] = eq.table_default;
        mj["entries"] = nlohmann::json::array();
        for (const auto& [key, value] : eq.table)
          mj["entries"].push_back({{"key", key}, {"value", value}});
        break;
      }
    }
    j["variables"].push_back({{"name", eq.target}, {"noise", nj}, {"mechanism", mj}});
  }
  return j;
}

ScmModel ScmModel::from_json(const nlohmann::json& j) {
  std::vector<StructuralEquation> equations;
  std::vector<NoiseSpec> noises;
  for (const auto& vj : j.at("variables")) {
    StructuralEquation eq;
    eq.target = vj.at("name").get<std::string>();
    const auto& mj = vj.at("mechanism");
    const std::string type = mj.at("type").get<std::string>();
    if (type == "linear") {
      eq.form = StructuralEquation::Form::linear_additive;
      eq.intercept = mj.value("intercept", 0.0);
      eq.parents = mj.value("parents", std::vector<std::string>());
      eq.coefficients = mj.value("coeffs", std::vector<double>());
    } else if (type == "constant") {
      eq.form = StructuralEquation::Form::constant;
      eq.intercept = mj.at("value").get<double>();
    } else if (type == "table") {
      eq.form = StructuralEquation::Form::table;
      eq.parents = mj.value("parents", std::vector<std::string>());
      eq.table_default = mj.value("default", 0.0);
      for (const auto& ej : mj.at("entries"))
        eq.table[ej.at("key").get<std::vector<int>>()] = ej.at("value").get<double>();
    } else {
      throw IngestionError("scm file: unknown mechanism type " + type);
    }

    NoiseSpec noise;
    const auto& nj = vj.at("noise");
    const std::string ntype = nj.at("type").get<std::string>();
    if (ntype == "gaussian") {
      noise.kind = NoiseSpec::Kind::gaussian;
      noise.mean = nj.value("mean", 0.0);
      noise.sd = nj.value("sd", 1.0);
    } else if (ntype == "categorical") {
      noise.kind = NoiseSpec::Kind::categorical;
      noise.probabilities = nj.at("probs").get<std::vector<double>>();
    } else if (ntype == "none") {
      noise.kind = NoiseSpec::Kind::none;
    } else {
      throw IngestionError("scm file: unknown noise type " + ntype);
    }

    equations.push_back(std::move(eq));
    noises.push_back(noise);
  }
  return ScmModel(std::move(equations), std::move(noises));
}

ScmModel ScmModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot read scm file: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("invalid scm file " + path.string() + ": " + e.what());
  }
  return from_json(j);
}

void ScmModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IngestionError("cannot write scm file: " + path.string());
  out << to_json().dump(2) << "\n";
}

nlohmann::json CausalEffect::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t v = 0; v < variables.size(); ++v)
    j.push_back({{"variable", variables[v]},
                 {"mean_difference", mean_difference[v]},
                 {"standard_error", standard_error[v]}});
  return j;
}

std::string CausalEffect::render_text() const {
  std::ostringstream os;
  os << "causal effect (E[X^I - X])\n" << std::setprecision(6);
  for (std::size_t v = 0; v < variables.size(); ++v)
    os << "  " << variables[v] << ": " << mean_difference[v] << " (se " << standard_error[v]
       << ")\n";
  return os.str();
}

nlohmann::json CausalConsistency::to_json() const {
  nlohmann::json j;
  j["consistent"] = consistent;
  j["features"] = nlohmann::json::array();
  for (const auto& fs : features)
    j["features"].push_back({{"feature", fs.feature},
                             {"sensitivity", fs.sensitivity},
                             {"is_ancestor", fs.is_ancestor},
                             {"violates", fs.violates}});
  return j;
}

std::string CausalConsistency::render_text() const {
  std::ostringstream os;
  os << "causal consistency: " << (consistent ? "consistent" : "violated") << "\n"
     << std::setprecision(6);
  for (const auto& fs : features)
    os << "  " << fs.feature << ": sensitivity " << fs.sensitivity
       << (fs.is_ancestor ? " (ancestor of target)" : " (non-ancestor)")
       << (fs.violates ? "  <-- violation" : "") << "\n";
  return os.str();
}

}  // namespace glassbox
