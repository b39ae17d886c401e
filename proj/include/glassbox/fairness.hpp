#pragma once

#include <optional>
#include <string>
#include <vector>

#include "glassbox/common.hpp"
#include "json.hpp"

namespace glassbox {

// Confusion counts per sensitive group (index 0 / 1; 1 is the protected
// group).
struct GroupedConfusion {
  struct Cell {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    std::size_t size() const { return tp + fp + tn + fn; }
    std::size_t positive_predictions() const { return tp + fp; }
  };
  Cell group[2];

  static GroupedConfusion count(const std::vector<int>& y, const std::vector<int>& yhat,
                                const std::vector<int>& s);
};

struct MetricValue {
  double value = 0.0;
  bool defined = false;
  std::string reason;  // set when undefined

  static MetricValue ok(double v) { return {v, true, {}}; }
  static MetricValue undefined(std::string why) { return {0.0, false, std::move(why)}; }
};

struct StratumDisparity {
  double r_value = 0.0;
  std::size_t size = 0;
  MetricValue disparity;  // undefined when a group is empty in the stratum
};

struct FairnessReport {
  MetricValue sd;
  std::vector<StratumDisparity> csd_strata;
  MetricValue csd_max_abs;        // feeds delta
  MetricValue csd_weighted_mean;  // stratum-size-weighted signed mean
  MetricValue tpr_gap;            // equal opportunity
  MetricValue fpr_gap;            // predictive equality
  MetricValue ppv_gap;            // conditional use accuracy (positive side)
  MetricValue npv_gap;            // conditional use accuracy (negative side)
  double delta = 0.0;             // max |defined gap|
  std::vector<std::pair<std::string, std::string>> undefined_metrics;

  nlohmann::json to_json() const;
  std::string render_text() const;
};

// P[yhat=1 | s=1] - P[yhat=1 | s=0]; throws UndefinedMetricError when a
// group is empty.
double statistical_disparity(const std::vector<int>& yhat, const std::vector<int>& s);

// Per-stratum disparity controlling the resolving feature, plus
// (max-absolute, size-weighted-mean) aggregates over defined strata.
struct CsdResult {
  std::vector<StratumDisparity> strata;
  double max_abs = 0.0;
  double weighted_mean = 0.0;
};
CsdResult conditional_statistical_disparity(const std::vector<int>& yhat,
                                            const std::vector<int>& s,
                                            const std::vector<double>& r);

// (TPR gap, FPR gap), each S=1 minus S=0. Zero-denominator sides come back
// undefined rather than throwing.
std::pair<MetricValue, MetricValue> error_rate_gaps(const std::vector<int>& y,
                                                    const std::vector<int>& yhat,
                                                    const std::vector<int>& s);

// (PPV gap, NPV gap), same conventions.
std::pair<MetricValue, MetricValue> predictive_value_gaps(const std::vector<int>& y,
                                                          const std::vector<int>& yhat,
                                                          const std::vector<int>& s);

FairnessReport audit_fairness(const std::vector<int>& y, const std::vector<int>& yhat,
                              const std::vector<int>& s,
                              const std::optional<std::vector<double>>& r = std::nullopt);

// delta <= tau (closed bound). Undefined metrics do not veto; they ride
// along in the report.
bool verify_fairness(const FairnessReport& report, double tau);

}  // namespace glassbox
