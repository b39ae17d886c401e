#include "glassbox/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <sstream>

namespace glassbox {

namespace {

void check_binary_inputs(const std::vector<int>& yhat, const std::vector<int>& s,
                         const std::vector<int>* y) {
  if (yhat.size() != s.size() || (y && y->size() != s.size()))
    throw ArgumentError("fairness: y, yhat, and s must have equal length");
  if (s.empty()) throw ArgumentError("fairness: empty input");
  for (int v : s)
    if (v != 0 && v != 1) throw ArgumentError("fairness: sensitive values must be 0/1");
  for (int v : yhat)
    if (v != 0 && v != 1) throw ArgumentError("fairness: predictions must be 0/1");
  if (y)
    for (int v : *y)
      if (v != 0 && v != 1) throw ArgumentError("fairness: labels must be 0/1");
}

}  // namespace

GroupedConfusion GroupedConfusion::count(const std::vector<int>& y, const std::vector<int>& yhat,
                                         const std::vector<int>& s) {
  GroupedConfusion out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Cell& cell = out.group[s[i]];
    if (y[i] == 1) (yhat[i] == 1 ? cell.tp : cell.fn)++;
    else (yhat[i] == 1 ? cell.fp : cell.tn)++;
  }
  return out;
}

double statistical_disparity(const std::vector<int>& yhat, const std::vector<int>& s) {
  check_binary_inputs(yhat, s, nullptr);
  std::size_t n[2] = {0, 0}, pos[2] = {0, 0};
  for (std::size_t i = 0; i < s.size(); ++i) {
    n[s[i]]++;
    pos[s[i]] += static_cast<std::size_t>(yhat[i]);
  }
  if (n[1] == 0) throw UndefinedMetricError("statistical disparity: protected group (S=1) is empty");
  if (n[0] == 0) throw UndefinedMetricError("statistical disparity: non-protected group (S=0) is empty");
  return static_cast<double>(pos[1]) / static_cast<double>(n[1]) -
         static_cast<double>(pos[0]) / static_cast<double>(n[0]);
}

CsdResult conditional_statistical_disparity(const std::vector<int>& yhat,
                                            const std::vector<int>& s,
                                            const std::vector<double>& r) {
  check_binary_inputs(yhat, s, nullptr);
  if (r.size() != s.size()) throw ArgumentError("fairness: resolving vector size mismatch");

  struct Tally {
    std::size_t n[2] = {0, 0};
    std::size_t pos[2] = {0, 0};
  };
  std::map<double, Tally> strata;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Tally& t = strata[r[i]];
    t.n[s[i]]++;
    t.pos[s[i]] += static_cast<std::size_t>(yhat[i]);
  }

  CsdResult out;
  double weight_total = 0.0, weighted_sum = 0.0, max_abs = 0.0;
  bool any_defined = false;
  for (const auto& [value, t] : strata) {
    StratumDisparity sd;
    sd.r_value = value;
    sd.size = t.n[0] + t.n[1];
    if (t.n[0] == 0 || t.n[1] == 0) {
      sd.disparity = MetricValue::undefined(
          t.n[1] == 0 ? "no protected members in stratum" : "no non-protected members in stratum");
    } else {
      const double d = static_cast<double>(t.pos[1]) / static_cast<double>(t.n[1]) -
                       static_cast<double>(t.pos[0]) / static_cast<double>(t.n[0]);
      sd.disparity = MetricValue::ok(d);
      any_defined = true;
      const auto w = static_cast<double>(sd.size);
      weight_total += w;
      weighted_sum += w * d;
      max_abs = std::max(max_abs, std::abs(d));
    }
    out.strata.push_back(std::move(sd));
  }
  if (!any_defined)
    throw UndefinedMetricError("conditional statistical disparity: no stratum has both groups");
  out.max_abs = max_abs;
  out.weighted_mean = weighted_sum / weight_total;
  return out;
}

std::pair<MetricValue, MetricValue> error_rate_gaps(const std::vector<int>& y,
                                                    const std::vector<int>& yhat,
                                                    const std::vector<int>& s) {
  check_binary_inputs(yhat, s, &y);
  const GroupedConfusion confusion = GroupedConfusion::count(y, yhat, s);
  const auto& g0 = confusion.group[0];
  const auto& g1 = confusion.group[1];

  MetricValue tpr_gap;
  if (g0.tp + g0.fn == 0)
    tpr_gap = MetricValue::undefined("no actual positives in group S=0");
  else if (g1.tp + g1.fn == 0)
    tpr_gap = MetricValue::undefined("no actual positives in group S=1");
  else
    tpr_gap = MetricValue::ok(static_cast<double>(g1.tp) / static_cast<double>(g1.tp + g1.fn) -
                              static_cast<double>(g0.tp) / static_cast<double>(g0.tp + g0.fn));

  MetricValue fpr_gap;
  if (g0.fp + g0.tn == 0)
    fpr_gap = MetricValue::undefined("no actual negatives in group S=0");
  else if (g1.fp + g1.tn == 0)
    fpr_gap = MetricValue::undefined("no actual negatives in group S=1");
  else
    fpr_gap = MetricValue::ok(static_cast<double>(g1.fp) / static_cast<double>(g1.fp + g1.tn) -
                              static_cast<double>(g0.fp) / static_cast<double>(g0.fp + g0.tn));
  return {tpr_gap, fpr_gap};
}

std::pair<MetricValue, MetricValue> predictive_value_gaps(const std::vector<int>& y,
                                                          const std::vector<int>& yhat,
                                                          const std::vector<int>& s) {
  check_binary_inputs(yhat, s, &y);
  const GroupedConfusion confusion = GroupedConfusion::count(y, yhat, s);
  const auto& g0 = confusion.group[0];
  const auto& g1 = confusion.group[1];

  MetricValue ppv_gap;
  if (g0.tp + g0.fp == 0)
    ppv_gap = MetricValue::undefined("no positive predictions in group S=0");
  else if (g1.tp + g1.fp == 0)
    ppv_gap = MetricValue::undefined("no positive predictions in group S=1");
  else
    ppv_gap = MetricValue::ok(static_cast<double>(g1.tp) / static_cast<double>(g1.tp + g1.fp) -
                              static_cast<double>(g0.tp) / static_cast<double>(g0.tp + g0.fp));

  MetricValue npv_gap;
  if (g0.tn + g0.fn == 0)
    npv_gap = MetricValue::undefined("no negative predictions in group S=0");
  else if (g1.tn + g1.fn == 0)
    npv_gap = MetricValue::undefined("no negative predictions in group S=1");
  else
    npv_gap = MetricValue::ok(static_cast<double>(g1.tn) / static_cast<double>(g1.tn + g1.fn) -
                              static_cast<double>(g0.tn) / static_cast<double>(g0.tn + g0.fn));
  return {ppv_gap, npv_gap};
}

FairnessReport audit_fairness(const std::vector<int>& y, const std::vector<int>& yhat,
                              const std::vector<int>& s,
                              const std::optional<std::vector<double>>& r) {
  check_binary_inputs(yhat, s, &y);
  FairnessReport report;

  try {
    report.sd = MetricValue::ok(statistical_disparity(yhat, s));
  } catch (const UndefinedMetricError& e) {
    report.sd = MetricValue::undefined(e.what());
  }

  if (r) {
    try {
      CsdResult csd = conditional_statistical_disparity(yhat, s, *r);
      report.csd_strata = std::move(csd.strata);
      report.csd_max_abs = MetricValue::ok(csd.max_abs);
      report.csd_weighted_mean = MetricValue::ok(csd.weighted_mean);
    } catch (const UndefinedMetricError& e) {
      report.csd_max_abs = MetricValue::undefined(e.what());
      report.csd_weighted_mean = MetricValue::undefined(e.what());
    }
  } else {
    report.csd_max_abs = MetricValue::undefined("no resolving feature supplied");
    report.csd_weighted_mean = MetricValue::undefined("no resolving feature supplied");
  }

  std::tie(report.tpr_gap, report.fpr_gap) = error_rate_gaps(y, yhat, s);
  std::tie(report.ppv_gap, report.npv_gap) = predictive_value_gaps(y, yhat, s);

  double delta = 0.0;
  auto fold = [&](const char* name, const MetricValue& metric, bool feeds_delta = true) {
    if (!metric.defined) {
      report.undefined_metrics.emplace_back(name, metric.reason);
      return;
    }
    if (feeds_delta) delta = std::max(delta, std::abs(metric.value));
  };
  fold("statistical_disparity", report.sd);
  if (r) fold("conditional_statistical_disparity", report.csd_max_abs);
  fold("equal_opportunity(tpr)", report.tpr_gap);
  fold("predictive_equality(fpr)", report.fpr_gap);
  fold("conditional_use_accuracy(ppv)", report.ppv_gap);
  fold("conditional_use_accuracy(npv)", report.npv_gap);
  report.delta = delta;
  return report;
}

bool verify_fairness(const FairnessReport& report, double tau) {
  if (tau < 0.0) throw ArgumentError("verify_fairness: tau must be nonnegative");
  return report.delta <= tau;
}

namespace {

nlohmann::json metric_json(const MetricValue& metric) {
  nlohmann::json j;
  j["defined"] = metric.defined;
  if (metric.defined) j["value"] = metric.value;
  else j["reason"] = metric.reason;
  return j;
}

std::string metric_text(const MetricValue& metric) {
  if (!metric.defined) return "undefined (" + metric.reason + ")";
  std::ostringstream os;
  os << std::setprecision(6) << metric.value;
  return os.str();
}

}  // namespace

nlohmann::json FairnessReport::to_json() const {
  nlohmann::json j;
  j["statistical_disparity"] = metric_json(sd);
  j["csd_max_abs"] = metric_json(csd_max_abs);
  j["csd_weighted_mean"] = metric_json(csd_weighted_mean);
  j["csd_strata"] = nlohmann::json::array();
  for (const auto& stratum : csd_strata) {
    nlohmann::json sj = metric_json(stratum.disparity);
    sj["r"] = stratum.r_value;
    sj["size"] = stratum.size;
    j["csd_strata"].push_back(std::move(sj));
  }
  j["equal_opportunity_tpr_gap"] = metric_json(tpr_gap);
  j["predictive_equality_fpr_gap"] = metric_json(fpr_gap);
  j["cua_ppv_gap"] = metric_json(ppv_gap);
  j["cua_npv_gap"] = metric_json(npv_gap);
  j["delta"] = delta;
  j["undefined_metrics"] = nlohmann::json::array();
  for (const auto& [name, reason] : undefined_metrics)
    j["undefined_metrics"].push_back({{"metric", name}, {"reason", reason}});
  return j;
}

std::string FairnessReport::render_text() const {
  std::ostringstream os;
  os << "fairness report\n";
  os << "  statistical disparity:      " << metric_text(sd) << "\n";
  os << "  csd (max abs over strata):  " << metric_text(csd_max_abs) << "\n";
  os << "  csd (weighted mean):        " << metric_text(csd_weighted_mean) << "\n";
  os << "  equal opportunity (TPR):    " << metric_text(tpr_gap) << "\n";
  os << "  predictive equality (FPR):  " << metric_text(fpr_gap) << "\n";
  os << "  cond. use accuracy (PPV):   " << metric_text(ppv_gap) << "\n";
  os << "  cond. use accuracy (NPV):   " << metric_text(npv_gap) << "\n";
  os << "  delta (max |gap|):          " << std::setprecision(6) << delta << "\n";
  for (const auto& [name, reason] : undefined_metrics)
    os << "  undefined: " << name << " (" << reason << ")\n";
  return os.str();
}

}  // namespace glassbox
