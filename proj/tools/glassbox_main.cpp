// glassbox CLI: synthetic data, model fitting, explanation, trustworthiness
// audits, and Rashomon-set exploration over tabular datasets.
//
// Exit codes: 0 success / all verifications passed, 1 a verification
// verdict failed, 2 usage or data error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "glassbox/causal.hpp"
#include "glassbox/data.hpp"
#include "glassbox/explain.hpp"
#include "glassbox/fairness.hpp"
#include "glassbox/models.hpp"
#include "glassbox/privacy.hpp"
#include "glassbox/rashomon.hpp"

namespace gb = glassbox;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerdictFail = 1;
constexpr int kExitUsage = 2;

fs::path default_out_root() {
  if (const char* env = std::getenv("GLASSBOX_OUT")) return fs::path(env);
  return fs::path("glassbox-out");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir))
    throw gb::IngestionError("cannot create output directory: " + dir.string());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gb::IngestionError("cannot write file: " + path.string());
  out << text;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

// Every run leaves a replayable record of its resolved configuration.
void write_config_echo(const fs::path& dir, const nlohmann::json& config) {
  write_json(dir / "config.json", config);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> parse_instance(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw gb::ArgumentError("cannot parse instance value '" + item + "'");
    }
  }
  if (values.empty()) throw gb::ArgumentError("empty instance");
  return values;
}

std::vector<int> binary_codes_of_column(const gb::Dataset& data, const std::string& name) {
  const gb::Column& col = data.column(name);
  std::vector<int> codes;
  codes.reserve(data.n_rows());
  if (col.spec.kind == gb::ColumnKind::categorical) {
    if (col.categories.size() > 2)
      throw gb::ArgumentError("column '" + name + "' has more than two categories");
    codes = col.codes;
  } else {
    for (double v : col.numeric) {
      if (v != 0.0 && v != 1.0)
        throw gb::ArgumentError("numeric column '" + name + "' must contain only 0/1");
      codes.push_back(static_cast<int>(v));
    }
  }
  return codes;
}

struct CommonOptions {
  std::string out;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
};

// --- synth ------------------------------------------------------------------

struct SynthOptions {
  std::size_t n = 100;
};

int run_synth(const CommonOptions& common, const SynthOptions& opts) {
  const fs::path dir(common.out);
  ensure_dir(dir);
  const gb::Dataset data = gb::generate_covid_toy(opts.n, common.seed);
  gb::save_csv(data, dir / "covid.csv");
  data.schema().save(dir / "covid.schema.json");
  write_config_echo(dir, {{"command", "synth"},
                          {"n", opts.n},
                          {"seed", common.seed}});
  std::cout << "wrote " << (dir / "covid.csv").string() << " (" << data.n_rows() << " rows)\n";
  return kExitOk;
}

// --- fit --------------------------------------------------------------------

struct FitOptions {
  std::string data_path;
  std::string schema_path;
  std::string family = "tree";
  bool standardize = false;
  bool one_hot = false;
  // logistic
  double l1 = 0.0, l2 = 0.0, tol = 1e-9;
  int max_iters = 2000;
  // gam
  int bins = 8, passes = 10;
  std::string interactions;  // "0:1,2:3"
  // rules
  int max_premises = 3, min_coverage = 1;
  // tree
  int max_depth = 3, min_leaf = 1;
  // knn
  int k = 5;
  std::string metric = "euclidean";
};

gb::FitSpec build_fit_spec(const FitOptions& opts) {
  if (opts.family == "logistic") {
    gb::LogisticParams p;
    p.l1 = opts.l1;
    p.l2 = opts.l2;
    p.max_iters = opts.max_iters;
    p.tol = opts.tol;
    return p;
  }
  if (opts.family == "gam") {
    gb::GamParams p;
    p.bins = opts.bins;
    p.passes = opts.passes;
    for (const auto& pair : split_list(opts.interactions)) {
      const auto colon = pair.find(':');
      if (colon == std::string::npos)
        throw gb::ArgumentError("interactions must look like '0:1,1:2'");
      p.interactions.emplace_back(std::stoul(pair.substr(0, colon)),
                                  std::stoul(pair.substr(colon + 1)));
    }
    return p;
  }
  if (opts.family == "rules") return gb::RulesParams{opts.max_premises, opts.min_coverage};
  if (opts.family == "tree") return gb::TreeParams{opts.max_depth, opts.min_leaf};
  if (opts.family == "knn") return gb::KnnParams{opts.k, gb::metric_from_string(opts.metric)};
  throw gb::ArgumentError("unknown family: " + opts.family);
}

int run_fit(const CommonOptions& common, const FitOptions& opts) {
  const fs::path dir(common.out);
  ensure_dir(dir);
  const gb::Schema schema = gb::Schema::load(opts.schema_path);
  gb::Dataset data = gb::load_csv(opts.data_path, schema);
  if (opts.one_hot) data = gb::one_hot_encode(data);
  gb::ScalerParams scaler;
  if (opts.standardize) {
    auto [scaled, params] = gb::standardize(data);
    data = std::move(scaled);
    scaler = std::move(params);
    nlohmann::json sj = nlohmann::json::array();
    for (const auto& c : scaler.columns)
      sj.push_back({{"column", c.column}, {"mean", c.mean}, {"sd", c.sd}, {"scaled", c.scaled}});
    write_json(dir / "scaler.json", sj);
    if (scaler.any_constant())
      std::cerr << "warning: constant feature column(s) passed through unscaled\n";
  }

  const gb::FitSpec spec = build_fit_spec(opts);
  const gb::Model model = gb::fit(spec, data);
  model.save(dir / "model.json");

  const gb::ComplexityReport report = gb::complexity(model);
  write_json(dir / "complexity.json", gb::to_json(report));
  write_text(dir / "complexity.txt", gb::render_text(report));
  write_text(dir / "structure.txt", gb::render_structure(model));

  if (opts.family == "logistic" || opts.family == "gam") {
    const gb::FeatureAttribution attribution = gb::global_importance(model);
    write_json(dir / "global_importance.json", gb::to_json(attribution));
  }
  if (model.is_classification()) {
    nlohmann::json train_metrics;
    train_metrics["zero_one_loss"] = gb::zero_one_loss(model, data);
    write_json(dir / "train_metrics.json", train_metrics);
  }

  write_config_echo(dir, {{"command", "fit"},
                          {"data", opts.data_path},
                          {"schema", opts.schema_path},
                          {"family", opts.family},
                          {"one_hot", opts.one_hot},
                          {"standardize", opts.standardize},
                          {"fit", gb::fit_spec_to_json(spec)},
                          {"seed", common.seed}});
  std::cout << "wrote " << (dir / "model.json").string() << "\n";
  return kExitOk;
}

// --- explain ----------------------------------------------------------------

struct ExplainOptions {
  std::string model_path;
  std::string instance;  // inline "v1,v2,..."
  std::string data_path;
  std::string schema_path;
  int row = -1;
  bool write_files = false;
};

int run_explain(const CommonOptions& common, const ExplainOptions& opts) {
  const gb::Model model = gb::Model::load(opts.model_path);
  std::vector<double> x;
  if (!opts.instance.empty()) {
    x = parse_instance(opts.instance);
  } else if (!opts.data_path.empty() && opts.row >= 0) {
    const gb::Schema schema = opts.schema_path.empty() ? model.schema()
                                                       : gb::Schema::load(opts.schema_path);
    const gb::Dataset data = gb::load_csv(opts.data_path, schema);
    if (static_cast<std::size_t>(opts.row) >= data.n_rows())
      throw gb::ArgumentError("row index out of range");
    const gb::Matrix features = data.feature_matrix();
    x = features.row_vector(static_cast<std::size_t>(opts.row));
  } else {
    throw gb::ArgumentError("explain needs --x or --data with --row");
  }

  const gb::Explanation explanation = gb::explain_prediction(model, x);
  const gb::ComplexityReport local = gb::complexity(model, std::span<const double>(x));
  const std::string text = gb::render_text(explanation, model) + gb::render_text(local);
  std::cout << text;

  if (opts.write_files) {
    const fs::path dir(common.out);
    ensure_dir(dir);
    write_json(dir / "explanation.json", gb::to_json(explanation, model));
    write_text(dir / "explanation.txt", text);
    write_config_echo(dir, {{"command", "explain"},
                            {"model", opts.model_path},
                            {"x", x},
                            {"seed", common.seed}});
  }
  return kExitOk;
}

// --- audit ------------------------------------------------------------------

struct AuditOptions {
  std::string model_path;
  std::string data_path;
  std::string schema_path;
  std::string predictions_path;  // alternative fairness input: y,yhat,s[,r]
  bool fairness = false;
  std::string sensitive;
  std::string resolving;
  double tau_fairness = 0.2;
  bool anonymity = false;
  std::string qi;  // comma separated
  std::string sensitive_attr;
  bool privacy = false;
  std::string holdout_path;
  std::size_t shadows = 4;
  double tau_privacy = 0.5;
  bool causal = false;
  std::string scm_path;
  std::string target;
  double causal_tol = 1e-6;
  std::size_t causal_n = 1000;
};

int run_audit(const CommonOptions& common, const AuditOptions& opts) {
  if (!opts.fairness && !opts.anonymity && !opts.privacy && !opts.causal)
    throw gb::ArgumentError("audit: select at least one of --fairness/--anonymity/--privacy/--causal");

  const fs::path dir(common.out);
  ensure_dir(dir);

  std::optional<gb::Model> model;
  std::optional<gb::Dataset> data;
  auto need_model = [&]() -> const gb::Model& {
    if (!model) {
      if (opts.model_path.empty()) throw gb::ArgumentError("audit: --model required");
      model = gb::Model::load(opts.model_path);
    }
    return *model;
  };
  auto need_data = [&]() -> const gb::Dataset& {
    if (!data) {
      if (opts.data_path.empty() || opts.schema_path.empty())
        throw gb::ArgumentError("audit: --data and --schema required");
      data = gb::load_csv(opts.data_path, gb::Schema::load(opts.schema_path));
    }
    return *data;
  };

  bool all_pass = true;
  nlohmann::json results;

  if (opts.fairness) {
    std::vector<int> y, yhat, s;
    std::optional<std::vector<double>> r;
    if (!opts.predictions_path.empty()) {
      // Prediction-file mode: columns y, yhat, s, optional r.
      gb::Schema pred_schema;
      pred_schema.task = {gb::TaskType::regression, 2};
      pred_schema.columns = {{"y", gb::ColumnKind::numeric, {}},
                             {"yhat", gb::ColumnKind::numeric, {}},
                             {"s", gb::ColumnKind::numeric, {}}};
      std::ifstream probe(opts.predictions_path);
      std::string header;
      std::getline(probe, header);
      if (!header.empty() && header.back() == '\r') header.pop_back();
      bool has_r = false;
      for (const auto& field : split_list(header)) has_r |= field == "r";
      if (has_r) pred_schema.columns.push_back({"r", gb::ColumnKind::numeric, {}});
      const gb::Dataset predictions = gb::load_csv(opts.predictions_path, pred_schema);
      for (double v : predictions.column("y").numeric) y.push_back(static_cast<int>(v));
      for (double v : predictions.column("yhat").numeric) yhat.push_back(static_cast<int>(v));
      for (double v : predictions.column("s").numeric) s.push_back(static_cast<int>(v));
      if (predictions.schema().has_column("r")) r = predictions.column("r").numeric;
    } else {
      if (opts.sensitive.empty())
        throw gb::ArgumentError("fairness audit: --sensitive column required");
      const gb::Dataset& eval = need_data();
      const gb::Model& m = need_model();
      y = eval.label_codes();
      for (const auto& p : gb::predict_all(m, eval)) yhat.push_back(p.label);
      s = binary_codes_of_column(eval, opts.sensitive);
      if (!opts.resolving.empty()) {
        const gb::Column& rc = eval.column(opts.resolving);
        std::vector<double> values;
        for (std::size_t i = 0; i < eval.n_rows(); ++i)
          values.push_back(rc.spec.kind == gb::ColumnKind::numeric
                               ? rc.numeric[i]
                               : static_cast<double>(rc.codes[i]));
        r = std::move(values);
      }
    }
    const gb::FairnessReport report = gb::audit_fairness(y, yhat, s, r);
    const bool pass = gb::verify_fairness(report, opts.tau_fairness);
    all_pass = all_pass && pass;
    results["fairness"] = report.to_json();
    results["fairness"]["tau"] = opts.tau_fairness;
    results["fairness"]["verdict"] = pass ? "pass" : "fail";
    write_text(dir / "fairness.txt",
               report.render_text() + "  verdict: " + (pass ? "pass" : "fail") + " (tau " +
                   std::to_string(opts.tau_fairness) + ")\n");
    std::cout << "fairness: delta=" << report.delta << " tau=" << opts.tau_fairness << " -> "
              << (pass ? "pass" : "fail") << "\n";
  }

  if (opts.anonymity) {
    if (opts.qi.empty()) throw gb::ArgumentError("anonymity audit: --qi columns required");
    const gb::Dataset& d = need_data();
    const gb::AnonymityReport report =
        gb::anonymity_report(d, split_list(opts.qi), opts.sensitive_attr);
    results["anonymity"] = report.to_json();
    write_text(dir / "anonymity.txt", report.render_text());
    std::cout << "anonymity: k=" << report.k << " l=" << report.l << " t=" << report.t << "\n";
  }

  if (opts.privacy) {
    if (opts.holdout_path.empty())
      throw gb::ArgumentError("privacy audit: --holdout dataset required");
    if (opts.schema_path.empty()) throw gb::ArgumentError("privacy audit: --schema required");
    const gb::Model& m = need_model();
    const gb::Dataset& train = need_data();
    const gb::Dataset holdout = gb::load_csv(opts.holdout_path, gb::Schema::load(opts.schema_path));
    const gb::MembershipAttack attack =
        gb::membership_inference(m, train, holdout, opts.shadows, common.seed);
    const bool pass = gb::verify_privacy(attack, opts.tau_privacy);
    all_pass = all_pass && pass;
    results["privacy"] = attack.to_json();
    results["privacy"]["tau"] = opts.tau_privacy;
    results["privacy"]["verdict"] = pass ? "pass" : "fail";
    write_text(dir / "privacy.txt", attack.render_text() + "  verdict: " +
                                        (pass ? "pass" : "fail") + " (tau " +
                                        std::to_string(opts.tau_privacy) + ")\n");
    std::cout << "privacy: pi=" << attack.pi << " tau=" << opts.tau_privacy << " -> "
              << (pass ? "pass" : "fail") << "\n";
  }

  if (opts.causal) {
    if (opts.scm_path.empty()) throw gb::ArgumentError("causal audit: --scm file required");
    if (opts.target.empty()) throw gb::ArgumentError("causal audit: --target variable required");
    const gb::Model& m = need_model();
    const gb::ScmModel scm = gb::ScmModel::load(opts.scm_path);
    const gb::CausalConsistency consistency =
        gb::causal_consistency(m, scm, opts.target, {}, opts.causal_n, common.seed, opts.causal_tol);
    all_pass = all_pass && consistency.consistent;
    results["causal"] = consistency.to_json();
    results["causal"]["verdict"] = consistency.consistent ? "pass" : "fail";
    write_text(dir / "causal.txt", consistency.render_text());
    std::cout << "causal: " << (consistency.consistent ? "pass" : "fail") << "\n";
  }

  write_json(dir / "audit.json", results);
  write_config_echo(dir, {{"command", "audit"},
                          {"model", opts.model_path},
                          {"data", opts.data_path},
                          {"schema", opts.schema_path},
                          {"predictions", opts.predictions_path},
                          {"fairness", opts.fairness},
                          {"sensitive", opts.sensitive},
                          {"resolving", opts.resolving},
                          {"tau_fairness", opts.tau_fairness},
                          {"anonymity", opts.anonymity},
                          {"qi", opts.qi},
                          {"sensitive_attr", opts.sensitive_attr},
                          {"privacy", opts.privacy},
                          {"holdout", opts.holdout_path},
                          {"shadows", opts.shadows},
                          {"tau_privacy", opts.tau_privacy},
                          {"causal", opts.causal},
                          {"scm", opts.scm_path},
                          {"target", opts.target},
                          {"causal_tol", opts.causal_tol},
                          {"causal_n", opts.causal_n},
                          {"seed", common.seed}});
  return all_pass ? kExitOk : kExitVerdictFail;
}

// --- rashomon ---------------------------------------------------------------

struct RashomonOptions {
  std::string data_path;
  std::string schema_path;
  std::string space_path;
  std::string eval_path;
  double eval_fraction = 0.3;
  bool train_loss = false;  // margin on training loss instead of held-out
  double epsilon = 0.05;
  std::string policy = "loss";
  std::string sensitive;
  std::string resolving;
  bool membership = false;
  std::size_t shadows = 4;
  std::string scm_path;
  std::string target;
  std::size_t causal_n = 1000;
  double causal_tol = 1e-6;
  std::string qi;
  std::string qi_sensitive;
  bool save_members = false;
};

int run_rashomon(const CommonOptions& common, const RashomonOptions& opts) {
  const fs::path dir(common.out);
  ensure_dir(dir);
  const gb::Schema schema = gb::Schema::load(opts.schema_path);
  const gb::Dataset full = gb::load_csv(opts.data_path, schema);
  const gb::HypothesisSpaceSpec space = [&]() {
    std::ifstream in(opts.space_path);
    if (!in) throw gb::IngestionError("cannot read space file: " + opts.space_path);
    nlohmann::json j;
    in >> j;
    return gb::HypothesisSpaceSpec::from_json(j);
  }();
  if (space.total_candidates() == 0) throw gb::ArgumentError("rashomon: empty hypothesis grid");

  gb::Dataset train = full, eval = full;
  if (opts.train_loss) {
    // margin measured on training loss; eval == train, labeled as such
  } else if (!opts.eval_path.empty()) {
    eval = gb::load_csv(opts.eval_path, schema);
  } else {
    auto [tr, ev] = gb::split(full, 1.0 - opts.eval_fraction, common.seed);
    train = std::move(tr);
    eval = std::move(ev);
  }

  const gb::EnumerationResult fits =
      gb::enumerate_and_fit(space, train, eval, common.seed, common.jobs);
  double total_fit_seconds = 0.0;
  for (const auto& card : fits.cards) total_fit_seconds += card.fit_seconds;
  std::cerr << "fitted " << fits.cards.size() << " candidates in " << total_fit_seconds << "s\n";

  gb::RashomonSet set = gb::rashomon_set(fits.cards, opts.epsilon);

  gb::AnnotateOptions annotate;
  annotate.sensitive_column = opts.sensitive;
  if (!opts.resolving.empty()) annotate.resolving_column = opts.resolving;
  annotate.run_membership = opts.membership;
  annotate.shadows = opts.shadows;
  if (!opts.scm_path.empty()) {
    annotate.scm = gb::ScmModel::load(opts.scm_path);
    annotate.causal_target = opts.target;
    annotate.causal_n = opts.causal_n;
    annotate.causal_tol = opts.causal_tol;
  }
  annotate.qi_columns = split_list(opts.qi);
  annotate.qi_sensitive = opts.qi_sensitive;
  annotate.seed = common.seed;
  if (annotate.any()) set = gb::annotate_ethics(set, fits, train, eval, annotate);

  std::vector<gb::SelectCriterion> policy;
  for (const auto& name : split_list(opts.policy))
    policy.push_back(gb::select_criterion_from_string(name));
  const gb::SelectionResult selection = gb::select(set, policy);

  nlohmann::json cards_json = nlohmann::json::array();
  for (const auto& card : fits.cards) cards_json.push_back(card.to_json());
  write_json(dir / "cards.json", cards_json);
  write_text(dir / "cards.txt", gb::render_cards_text(fits.cards));
  write_json(dir / "rashomon.json", set.to_json());
  write_text(dir / "rashomon.txt", set.render_text());
  nlohmann::json pareto_json = nlohmann::json::array();
  for (const auto& card : selection.pareto) pareto_json.push_back(card.to_json());
  write_json(dir / "pareto.json", pareto_json);
  write_json(dir / "selected.json", selection.selected.to_json());
  const auto& selected_model = fits.models.at(static_cast<std::size_t>(selection.selected.id));
  if (selected_model) selected_model->save(dir / "selected_model.json");
  if (opts.save_members) {
    ensure_dir(dir / "members");
    for (const auto& card : set.members) {
      const auto& member = fits.models.at(static_cast<std::size_t>(card.id));
      if (member) member->save(dir / "members" / ("member_" + std::to_string(card.id) + ".json"));
    }
  }

  write_config_echo(dir, {{"command", "rashomon"},
                          {"data", opts.data_path},
                          {"schema", opts.schema_path},
                          {"space", space.to_json()},
                          {"eval", opts.eval_path},
                          {"eval_fraction", opts.eval_fraction},
                          {"train_loss", opts.train_loss},
                          {"epsilon", opts.epsilon},
                          {"policy", opts.policy},
                          {"sensitive", opts.sensitive},
                          {"membership", opts.membership},
                          {"shadows", opts.shadows},
                          {"scm", opts.scm_path},
                          {"target", opts.target},
                          {"seed", common.seed}});
  std::cout << "selected model " << selection.selected.id << " (" << selection.selected.family
            << "), loss " << selection.selected.loss << "; set ratio " << set.ratio << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glassbox: interpretable models with fairness, privacy, and causal audits"};
  app.require_subcommand(1);

  CommonOptions common;
  common.out = default_out_root().string();
  app.add_option("--out", common.out, "output directory")->capture_default_str();
  app.add_option("--seed", common.seed, "random seed")->capture_default_str();
  app.add_option("--jobs", common.jobs, "worker threads for candidate fitting")
      ->capture_default_str();

  SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "write the synthetic two-feature dataset");
  synth_cmd->add_option("--n", synth.n, "number of rows")->capture_default_str();

  FitOptions fit_opts;
  auto* fit_cmd = app.add_subcommand("fit", "fit an interpretable model");
  fit_cmd->add_option("--data", fit_opts.data_path, "training CSV")->required();
  fit_cmd->add_option("--schema", fit_opts.schema_path, "schema JSON")->required();
  fit_cmd->add_option("--family", fit_opts.family, "logistic|gam|rules|tree|knn")
      ->capture_default_str();
  fit_cmd->add_flag("--standardize", fit_opts.standardize, "scale numeric features first");
  fit_cmd->add_flag("--one-hot", fit_opts.one_hot, "one-hot encode categorical features first");
  fit_cmd->add_option("--l1", fit_opts.l1, "logistic: L1 weight");
  fit_cmd->add_option("--l2", fit_opts.l2, "logistic: L2 weight");
  fit_cmd->add_option("--max-iters", fit_opts.max_iters, "logistic: iteration cap");
  fit_cmd->add_option("--tol", fit_opts.tol, "logistic: parameter-change stop");
  fit_cmd->add_option("--bins", fit_opts.bins, "gam: quantile bins per shape");
  fit_cmd->add_option("--passes", fit_opts.passes, "gam: backfitting passes");
  fit_cmd->add_option("--interactions", fit_opts.interactions, "gam: pairs like 0:1,1:2");
  fit_cmd->add_option("--max-premises", fit_opts.max_premises, "rules: premise cap per rule");
  fit_cmd->add_option("--min-coverage", fit_opts.min_coverage, "rules: minimum kept coverage");
  fit_cmd->add_option("--max-depth", fit_opts.max_depth, "tree: depth cap");
  fit_cmd->add_option("--min-leaf", fit_opts.min_leaf, "tree: minimum rows per leaf");
  fit_cmd->add_option("--k", fit_opts.k, "knn: neighbor count");
  fit_cmd->add_option("--metric", fit_opts.metric, "knn: euclidean|manhattan|cosine");

  ExplainOptions explain_opts;
  auto* explain_cmd = app.add_subcommand("explain", "explain one prediction");
  explain_cmd->add_option("--model", explain_opts.model_path, "model JSON")->required();
  explain_cmd->add_option("--x", explain_opts.instance, "inline instance values v1,v2,...");
  explain_cmd->add_option("--data", explain_opts.data_path, "CSV to take the instance from");
  explain_cmd->add_option("--schema", explain_opts.schema_path, "schema for --data");
  explain_cmd->add_option("--row", explain_opts.row, "row index into --data");
  explain_cmd->add_flag("--write", explain_opts.write_files, "also write explanation files");

  AuditOptions audit_opts;
  auto* audit_cmd = app.add_subcommand("audit", "fairness / anonymity / privacy / causal audits");
  audit_cmd->add_option("--model", audit_opts.model_path, "model JSON");
  audit_cmd->add_option("--data", audit_opts.data_path, "evaluation CSV");
  audit_cmd->add_option("--schema", audit_opts.schema_path, "schema JSON");
  audit_cmd->add_option("--predictions", audit_opts.predictions_path,
                        "fairness from a y,yhat,s[,r] CSV instead of a model");
  audit_cmd->add_flag("--fairness", audit_opts.fairness, "run the group-fairness audit");
  audit_cmd->add_option("--sensitive", audit_opts.sensitive, "binary sensitive column");
  audit_cmd->add_option("--resolving", audit_opts.resolving, "resolving column for CSD");
  audit_cmd->add_option("--tau-fairness", audit_opts.tau_fairness, "fairness threshold")
      ->capture_default_str();
  audit_cmd->add_flag("--anonymity", audit_opts.anonymity, "run k/l/t data metrics");
  audit_cmd->add_option("--qi", audit_opts.qi, "quasi-identifier columns a,b,c");
  audit_cmd->add_option("--sensitive-attr", audit_opts.sensitive_attr,
                        "sensitive column for l-diversity / t-closeness");
  audit_cmd->add_flag("--privacy", audit_opts.privacy, "run the membership-inference audit");
  audit_cmd->add_option("--holdout", audit_opts.holdout_path, "non-member CSV");
  audit_cmd->add_option("--shadows", audit_opts.shadows, "shadow model count")
      ->capture_default_str();
  audit_cmd->add_option("--tau-privacy", audit_opts.tau_privacy, "privacy threshold")
      ->capture_default_str();
  audit_cmd->add_flag("--causal", audit_opts.causal, "run the causal-consistency audit");
  audit_cmd->add_option("--scm", audit_opts.scm_path, "SCM description JSON");
  audit_cmd->add_option("--target", audit_opts.target, "target variable in the SCM");
  audit_cmd->add_option("--causal-tol", audit_opts.causal_tol, "non-ancestor sensitivity bound")
      ->capture_default_str();
  audit_cmd->add_option("--causal-n", audit_opts.causal_n, "Monte-Carlo sample size")
      ->capture_default_str();

  RashomonOptions rash_opts;
  auto* rash_cmd = app.add_subcommand("rashomon", "enumerate near-optimal models and select");
  rash_cmd->add_option("--data", rash_opts.data_path, "training CSV")->required();
  rash_cmd->add_option("--schema", rash_opts.schema_path, "schema JSON")->required();
  rash_cmd->add_option("--space", rash_opts.space_path, "hypothesis-space grid JSON")->required();
  rash_cmd->add_option("--eval", rash_opts.eval_path, "held-out CSV (otherwise split)");
  rash_cmd->add_option("--eval-fraction", rash_opts.eval_fraction, "held-out fraction")
      ->capture_default_str();
  rash_cmd->add_flag("--train-loss", rash_opts.train_loss, "margin on training loss");
  rash_cmd->add_option("--epsilon", rash_opts.epsilon, "Rashomon margin")->capture_default_str();
  rash_cmd->add_option("--policy", rash_opts.policy, "ordered criteria: loss,complexity,delta,pi")
      ->capture_default_str();
  rash_cmd->add_option("--sensitive", rash_opts.sensitive, "annotate fairness delta");
  rash_cmd->add_option("--resolving", rash_opts.resolving, "resolving column for CSD");
  rash_cmd->add_flag("--membership", rash_opts.membership, "annotate privacy pi (slow)");
  rash_cmd->add_option("--shadows", rash_opts.shadows, "shadow model count")
      ->capture_default_str();
  rash_cmd->add_option("--scm", rash_opts.scm_path, "annotate causal consistency");
  rash_cmd->add_option("--target", rash_opts.target, "SCM target variable");
  rash_cmd->add_option("--causal-n", rash_opts.causal_n, "Monte-Carlo sample size")
      ->capture_default_str();
  rash_cmd->add_option("--causal-tol", rash_opts.causal_tol, "non-ancestor sensitivity bound")
      ->capture_default_str();
  rash_cmd->add_option("--qi", rash_opts.qi, "attach data-level k/l/t over these columns");
  rash_cmd->add_option("--qi-sensitive", rash_opts.qi_sensitive,
                       "sensitive column for the data-level audit");
  rash_cmd->add_flag("--save-members", rash_opts.save_members,
                     "serialize every Rashomon-set member model");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(common, synth);
    if (fit_cmd->parsed()) return run_fit(common, fit_opts);
    if (explain_cmd->parsed()) return run_explain(common, explain_opts);
    if (audit_cmd->parsed()) return run_audit(common, audit_opts);
    if (rash_cmd->parsed()) return run_rashomon(common, rash_opts);
    std::cerr << "no subcommand selected\n";
    return kExitUsage;
  } catch (const gb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return kExitUsage;
  }
}
