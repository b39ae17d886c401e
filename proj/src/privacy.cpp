#include "glassbox/privacy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

namespace glassbox {

namespace {

std::string cell_key(const Column& col, std::size_t row) {
  // Exact-equality grouping: categorical values group by category id,
  // numeric values by bit pattern.
  if (col.spec.kind == ColumnKind::categorical)
    return "c" + std::to_string(col.codes[row]);
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(double));
  const double v = col.numeric[row];
  std::memcpy(&bits, &v, sizeof(bits));
  return "n" + std::to_string(bits);
}

}  // namespace

std::vector<QuasiIdentifierGroup> quasi_identifier_groups(const Dataset& dataset,
                                                          const std::vector<std::string>& qi,
                                                          const std::string& sensitive) {
  if (dataset.n_rows() == 0) throw ArgumentError("quasi-identifier grouping: empty dataset");
  if (qi.empty()) throw ArgumentError("quasi-identifier grouping: empty column list");
  std::vector<const Column*> qi_cols;
  for (const auto& name : qi) qi_cols.push_back(&dataset.column(name));
  const Column* sens_col = sensitive.empty() ? nullptr : &dataset.column(sensitive);

  std::map<std::string, QuasiIdentifierGroup> groups;
  for (std::size_t r = 0; r < dataset.n_rows(); ++r) {
    std::string key, shown;
    for (const Column* col : qi_cols) {
      key += cell_key(*col, r);
      key += '|';
      if (!shown.empty()) shown += ", ";
      shown += col->value_as_text(r);
    }
    QuasiIdentifierGroup& group = groups[key];
    if (group.rows.empty()) group.key = "(" + shown + ")";
    group.rows.push_back(r);
    if (sens_col) group.sensitive_histogram[cell_key(*sens_col, r)]++;
  }

  std::vector<QuasiIdentifierGroup> out;
  out.reserve(groups.size());
  for (auto& [key, group] : groups) out.push_back(std::move(group));
  return out;
}

std::pair<std::size_t, AnonymityReport> k_anonymity(const Dataset& dataset,
                                                    const std::vector<std::string>& qi) {
  const auto groups = quasi_identifier_groups(dataset, qi);
  AnonymityReport report;
  report.group_count = groups.size();
  std::size_t k = dataset.n_rows();
  for (const auto& group : groups) {
    if (group.rows.size() < k) {
      k = group.rows.size();
      report.smallest_group = group.key;
    }
  }
  report.k = k;
  return {k, report};
}

std::size_t l_diversity(const Dataset& dataset, const std::vector<std::string>& qi,
                        const std::string& sensitive) {
  if (sensitive.empty()) throw ArgumentError("l_diversity: sensitive column required");
  const auto groups = quasi_identifier_groups(dataset, qi, sensitive);
  std::size_t l = dataset.n_rows();
  for (const auto& group : groups) l = std::min(l, group.sensitive_histogram.size());
  return l;
}

double t_closeness(const Dataset& dataset, const std::vector<std::string>& qi,
                   const std::string& sensitive) {
  if (sensitive.empty()) throw ArgumentError("t_closeness: sensitive column required");
  const Column& sens = dataset.column(sensitive);
  if (sens.spec.kind != ColumnKind::categorical)
    throw UnsupportedError("t_closeness: numeric sensitive column must be discretized first");

  const auto groups = quasi_identifier_groups(dataset, qi, sensitive);
  std::map<std::string, double> global;
  const auto n = static_cast<double>(dataset.n_rows());
  for (std::size_t r = 0; r < dataset.n_rows(); ++r) global[cell_key(sens, r)] += 1.0 / n;

  double t = 0.0;
  for (const auto& group : groups) {
    const auto size = static_cast<double>(group.rows.size());
    double tv = 0.0;
    for (const auto& [value, p_global] : global) {
      auto it = group.sensitive_histogram.find(value);
      const double p_group = it == group.sensitive_histogram.end()
                                 ? 0.0
                                 : static_cast<double>(it->second) / size;
      tv += std::abs(p_group - p_global);
    }
    t = std::max(t, 0.5 * tv);
  }
  return t;
}

AnonymityReport anonymity_report(const Dataset& dataset, const std::vector<std::string>& qi,
                                 const std::string& sensitive) {
  auto [k, report] = k_anonymity(dataset, qi);
  if (!sensitive.empty()) {
    const auto groups = quasi_identifier_groups(dataset, qi, sensitive);
    std::size_t l = dataset.n_rows();
    for (const auto& group : groups) {
      if (group.sensitive_histogram.size() < l) {
        l = group.sensitive_histogram.size();
        report.least_diverse_group = group.key;
      }
    }
    report.l = l;

    const Column& sens = dataset.column(sensitive);
    if (sens.spec.kind == ColumnKind::categorical) {
      std::map<std::string, double> global;
      const auto n = static_cast<double>(dataset.n_rows());
      for (std::size_t r = 0; r < dataset.n_rows(); ++r) global[cell_key(sens, r)] += 1.0 / n;
      double t = -1.0;
      for (const auto& group : groups) {
        const auto size = static_cast<double>(group.rows.size());
        double tv = 0.0;
        for (const auto& [value, p_global] : global) {
          auto it = group.sensitive_histogram.find(value);
          const double p_group = it == group.sensitive_histogram.end()
                                     ? 0.0
                                     : static_cast<double>(it->second) / size;
          tv += std::abs(p_group - p_global);
        }
        if (0.5 * tv > t) {
          t = 0.5 * tv;
          report.most_skewed_group = group.key;
        }
      }
      report.t = std::max(t, 0.0);
    }
  }
  return report;
}

namespace {

struct ScoredRecord {
  double confidence = 0.0;
  bool member = false;
};

// Threshold maximizing accuracy of "member iff confidence >= t" over the
// shadow records; ties resolve to the lowest threshold.
double learn_threshold(std::vector<ScoredRecord> records) {
  std::set<double> candidates;
  for (const auto& rec : records) candidates.insert(rec.confidence);
  double best_threshold = records.empty() ? 0.5 : *candidates.begin();
  std::size_t best_correct = 0;
  for (double t : candidates) {
    std::size_t correct = 0;
    for (const auto& rec : records)
      if ((rec.confidence >= t) == rec.member) ++correct;
    if (correct > best_correct) {
      best_correct = correct;
      best_threshold = t;
    }
  }
  return best_threshold;
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed,
                                          std::uint64_t stream) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  auto rng = seeded_rng(seed, stream);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

MembershipAttack membership_inference(const Model& target, const Dataset& train,
                                      const Dataset& holdout, std::size_t shadows,
                                      std::uint64_t seed) {
  if (shadows < 1) throw ArgumentError("membership_inference: shadows must be >= 1");
  if (!target.is_classification())
    throw UnsupportedError("membership_inference: regression targets are not supported");
  const std::size_t chunk = holdout.n_rows() / shadows;
  if (chunk < 4)
    throw ArgumentError("membership_inference: holdout too small to build " +
                        std::to_string(shadows) + " shadow models");

  // Shadow phase: the holdout is cut into `shadows` disjoint chunks; each
  // chunk's first half trains a shadow model, the second half plays the
  // non-member side.
  const auto holdout_order = shuffled_indices(holdout.n_rows(), seed, 101);
  std::vector<ScoredRecord> shadow_records;
  const std::size_t half = chunk / 2;
  for (std::size_t sidx = 0; sidx < shadows; ++sidx) {
    const std::size_t base = sidx * chunk;
    std::vector<std::size_t> member_rows(holdout_order.begin() + static_cast<std::ptrdiff_t>(base),
                                         holdout_order.begin() + static_cast<std::ptrdiff_t>(base + half));
    std::vector<std::size_t> non_member_rows(
        holdout_order.begin() + static_cast<std::ptrdiff_t>(base + half),
        holdout_order.begin() + static_cast<std::ptrdiff_t>(base + 2 * half));

    const Dataset shadow_train = holdout.take_rows(member_rows);
    const Dataset shadow_out = holdout.take_rows(non_member_rows);
    Model shadow;
    try {
      FitSpec spec = target.fit_spec();
      if (auto* knn = std::get_if<KnnParams>(&spec))
        knn->k = std::min(knn->k, static_cast<int>(shadow_train.n_rows()));
      shadow = fit(spec, shadow_train);
    } catch (const Error&) {
      continue;  // degenerate slice (e.g. one-class); skip this shadow
    }

    const Matrix x_in = shadow_train.feature_matrix();
    const auto y_in = shadow_train.label_codes();
    for (std::size_t r = 0; r < x_in.rows; ++r)
      shadow_records.push_back({label_confidence(shadow, x_in.row(r), y_in[r]), true});
    const Matrix x_out = shadow_out.feature_matrix();
    const auto y_out = shadow_out.label_codes();
    for (std::size_t r = 0; r < x_out.rows; ++r)
      shadow_records.push_back({label_confidence(shadow, x_out.row(r), y_out[r]), false});
  }
  if (shadow_records.empty())
    throw FitError("membership_inference: no shadow model could be trained");

  MembershipAttack attack;
  attack.shadow_count = shadows;
  attack.shadow_train_fraction = 0.5;
  attack.confidence_threshold = learn_threshold(std::move(shadow_records));

  // Evaluation phase: balanced members (target's training rows) vs
  // non-members (holdout rows), scored against the target model itself.
  const std::size_t n_eval = std::min(train.n_rows(), holdout.n_rows());
  if (n_eval == 0) throw ArgumentError("membership_inference: empty evaluation side");
  const auto member_order = shuffled_indices(train.n_rows(), seed, 202);
  const auto non_member_order = shuffled_indices(holdout.n_rows(), seed, 303);

  std::size_t correct = 0;
  const Matrix train_x = train.feature_matrix();
  const auto train_y = train.label_codes();
  const Matrix holdout_x = holdout.feature_matrix();
  const auto holdout_y = holdout.label_codes();
  for (std::size_t i = 0; i < n_eval; ++i) {
    const std::size_t mr = member_order[i];
    if (label_confidence(target, train_x.row(mr), train_y[mr]) >= attack.confidence_threshold)
      ++correct;
    const std::size_t nr = non_member_order[i];
    if (label_confidence(target, holdout_x.row(nr), holdout_y[nr]) < attack.confidence_threshold)
      ++correct;
  }
  attack.evaluation_members = n_eval;
  attack.evaluation_non_members = n_eval;
  attack.pi = static_cast<double>(correct) / static_cast<double>(2 * n_eval);
  return attack;
}

bool verify_privacy(const MembershipAttack& attack, double tau) {
  if (tau < 0.0 || tau > 1.0) throw ArgumentError("verify_privacy: tau must lie in [0, 1]");
  return attack.pi <= tau;
}

nlohmann::json AnonymityReport::to_json() const {
  nlohmann::json j;
  j["k"] = k;
  j["l"] = l;
  j["t"] = t;
  j["group_count"] = group_count;
  j["smallest_group"] = smallest_group;
  j["least_diverse_group"] = least_diverse_group;
  j["most_skewed_group"] = most_skewed_group;
  return j;
}

std::string AnonymityReport::render_text() const {
  std::ostringstream os;
  os << "anonymity report\n";
  os << "  k-anonymity: " << k;
  if (!smallest_group.empty()) os << "  (smallest group " << smallest_group << ")";
  os << "\n  l-diversity: " << l;
  if (!least_diverse_group.empty()) os << "  (least diverse " << least_diverse_group << ")";
  os << "\n  t-closeness: " << std::setprecision(6) << t;
  if (!most_skewed_group.empty()) os << "  (most skewed " << most_skewed_group << ")";
  os << "\n  groups: " << group_count << "\n";
  return os.str();
}

nlohmann::json MembershipAttack::to_json() const {
  nlohmann::json j;
  j["shadow_count"] = shadow_count;
  j["shadow_train_fraction"] = shadow_train_fraction;
  j["confidence_threshold"] = confidence_threshold;
  j["pi"] = pi;
  j["evaluation_members"] = evaluation_members;
  j["evaluation_non_members"] = evaluation_non_members;
  return j;
}

std::string MembershipAttack::render_text() const {
  std::ostringstream os;
  os << "membership inference attack\n";
  os << "  shadows: " << shadow_count << " (train fraction " << shadow_train_fraction << ")\n";
  os << "  learned confidence threshold: " << std::setprecision(6) << confidence_threshold << "\n";
  os << "  attack accuracy Pi: " << pi << " on " << evaluation_members << "+"
     << evaluation_non_members << " records\n";
  return os.str();
}

}  // namespace glassbox
