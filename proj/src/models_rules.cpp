#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "glassbox/models.hpp"

namespace glassbox {

namespace {

// Interval view of a growing rule: (feature > lo) and (feature <= hi).
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
};

struct GrownRule {
  std::map<std::size_t, Interval> bounds;

  bool covers(std::span<const double> x) const {
    for (const auto& [f, iv] : bounds) {
      const double v = x[f];
      if (!(v > iv.lo) || !(v <= iv.hi)) return false;
    }
    return true;
  }

  std::size_t premise_count() const {
    std::size_t q = 0;
    for (const auto& [f, iv] : bounds) {
      if (std::isfinite(iv.lo)) ++q;
      if (std::isfinite(iv.hi)) ++q;
    }
    return q;
  }

  Rule finalize(int label) const {
    Rule rule;
    rule.label = label;
    for (const auto& [f, iv] : bounds) {
      if (std::isfinite(iv.hi)) rule.premises.push_back({f, ConditionOp::less_eq, iv.hi});
      if (std::isfinite(iv.lo)) rule.premises.push_back({f, ConditionOp::greater, iv.lo});
    }
    return rule;
  }
};

struct Candidate {
  std::size_t feature = 0;
  bool upper = false;  // true: (f <= t), false: (f > t)
  double threshold = 0.0;
  double precision = -1.0;
  std::size_t coverage = 0;

  // max precision, then max coverage, then low feature, low threshold,
  // (f <= t) before (f > t)
  bool better_than(const Candidate& other) const {
    if (precision != other.precision) return precision > other.precision;
    if (coverage != other.coverage) return coverage > other.coverage;
    if (feature != other.feature) return feature < other.feature;
    if (threshold != other.threshold) return threshold < other.threshold;
    return upper && !other.upper;
  }
};

}  // namespace

bool Condition::holds(std::span<const double> x) const {
  if (feature >= x.size()) throw ArgumentError("condition references feature beyond instance size");
  const double v = x[feature];
  switch (op) {
    case ConditionOp::less_eq: return v <= threshold;
    case ConditionOp::greater: return v > threshold;
    case ConditionOp::equal: return v == threshold;
  }
  return false;
}

std::string Condition::describe(const std::vector<std::string>& feature_names) const {
  std::ostringstream os;
  if (feature < feature_names.size()) os << feature_names[feature];
  else os << "x" << feature;
  switch (op) {
    case ConditionOp::less_eq: os << " <= "; break;
    case ConditionOp::greater: os << " > "; break;
    case ConditionOp::equal: os << " = "; break;
  }
  os << threshold;
  return os.str();
}

bool Rule::covers(std::span<const double> x) const {
  return std::all_of(premises.begin(), premises.end(),
                     [&](const Condition& c) { return c.holds(x); });
}

bool rule_covers(const Rule& rule, std::span<const double> x) { return rule.covers(x); }

RuleSet learn_rules(const Matrix& x, const std::vector<int>& y, int n_classes,
                    const RulesParams& params) {
  if (x.rows == 0 || y.size() != x.rows) throw ArgumentError("learn_rules: empty or ragged input");
  if (params.min_coverage < 1) throw ArgumentError("learn_rules: min_coverage must be >= 1");
  if (params.max_premises < 1) throw ArgumentError("learn_rules: max_premises must be >= 1");
  if (n_classes < 2) throw ArgumentError("learn_rules: need at least 2 classes");

  std::vector<std::size_t> class_counts(static_cast<std::size_t>(n_classes), 0);
  for (int v : y) {
    if (v < 0 || v >= n_classes) throw ArgumentError("learn_rules: label id out of range");
    class_counts[static_cast<std::size_t>(v)]++;
  }

  RuleSet out;
  out.voting = Voting::majority;
  out.default_label = static_cast<int>(
      std::max_element(class_counts.begin(), class_counts.end()) - class_counts.begin());
  out.default_frequency = static_cast<double>(class_counts[static_cast<std::size_t>(out.default_label)]) /
                          static_cast<double>(x.rows);
  for (std::size_t c : class_counts)
    out.class_frequencies.push_back(static_cast<double>(c) / static_cast<double>(x.rows));

  auto precision_of = [&](const GrownRule& rule, const std::vector<std::size_t>& uncovered,
                          int target, std::size_t& coverage) {
    std::size_t covered = 0, hits = 0;
    for (std::size_t r : uncovered) {
      if (!rule.covers(x.row(r))) continue;
      ++covered;
      if (y[r] == target) ++hits;
    }
    coverage = covered;
    return covered == 0 ? -1.0 : static_cast<double>(hits) / static_cast<double>(covered);
  };

  for (int target = 0; target < n_classes; ++target) {
    // Each class starts from the full training set; overlap between classes
    // is resolved at prediction time by the voting schema.
    std::vector<std::size_t> uncovered(x.rows);
    std::iota(uncovered.begin(), uncovered.end(), 0);

    while (!uncovered.empty()) {
      GrownRule rule;
      std::size_t coverage = 0;
      double precision = precision_of(rule, uncovered, target, coverage);

      while (rule.premise_count() < static_cast<std::size_t>(params.max_premises) &&
             precision < 1.0) {
        // Candidate thresholds: midpoints between consecutive distinct
        // values of the instances the partial rule still covers.
        Candidate best;
        for (std::size_t f = 0; f < x.cols; ++f) {
          std::vector<double> values;
          for (std::size_t r : uncovered)
            if (rule.covers(x.row(r))) values.push_back(x(r, f));
          std::sort(values.begin(), values.end());
          values.erase(std::unique(values.begin(), values.end()), values.end());
          for (std::size_t i = 0; i + 1 < values.size(); ++i) {
            const double threshold = 0.5 * (values[i] + values[i + 1]);
            for (bool upper : {true, false}) {
              GrownRule trial = rule;
              Interval& iv = trial.bounds[f];
              if (upper) iv.hi = std::min(iv.hi, threshold);
              else iv.lo = std::max(iv.lo, threshold);
              if (!(iv.lo < iv.hi)) continue;  // empty interval
              Candidate cand;
              cand.feature = f;
              cand.upper = upper;
              cand.threshold = threshold;
              cand.precision = precision_of(trial, uncovered, target, cand.coverage);
              if (cand.coverage == 0) continue;
              if (best.precision < 0.0 || cand.better_than(best)) best = cand;
            }
          }
        }
        if (best.precision <= precision) break;  // no strict improvement left
        Interval& iv = rule.bounds[best.feature];
        if (best.upper) iv.hi = std::min(iv.hi, best.threshold);
        else iv.lo = std::max(iv.lo, best.threshold);
        precision = precision_of(rule, uncovered, target, coverage);
      }

      if (rule.premise_count() == 0) break;  // nothing worth separating
      if (coverage < static_cast<std::size_t>(params.min_coverage)) break;

      out.rules.push_back(rule.finalize(target));
      std::vector<std::size_t> rest;
      rest.reserve(uncovered.size() - coverage);
      for (std::size_t r : uncovered)
        if (!rule.covers(x.row(r))) rest.push_back(r);
      uncovered = std::move(rest);
    }
  }
  return out;
}

int predict_rules(const RuleSet& rules, std::span<const double> x) {
  std::map<int, std::size_t> votes;
  for (const Rule& rule : rules.rules)
    if (rule.covers(x)) votes[rule.label]++;
  if (votes.empty()) return rules.default_label;
  int best = votes.begin()->first;
  std::size_t best_votes = votes.begin()->second;
  for (const auto& [label, count] : votes) {
    if (count > best_votes) {  // ties keep the lowest label id (map order)
      best = label;
      best_votes = count;
    }
  }
  return best;
}

}  // namespace glassbox
