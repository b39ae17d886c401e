#include <algorithm>
#include <cmath>

#include "glassbox/models.hpp"

namespace glassbox {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(-z)) without overflow
double log1p_exp_neg(double z) {
  if (z >= 0.0) return std::log1p(std::exp(-z));
  return -z + std::log1p(std::exp(z));
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// Largest eigenvalue of the Gram matrix of [1 | X] by power iteration;
// bounds the logistic Hessian as lambda_max / (4n).
double gram_lambda_max(const Matrix& x) {
  const std::size_t m = x.cols + 1;
  const std::size_t n = x.rows;
  std::vector<double> gram(m * m, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    auto row = x.row(r);
    for (std::size_t i = 0; i < m; ++i) {
      const double xi = i == 0 ? 1.0 : row[i - 1];
      for (std::size_t j = i; j < m; ++j) {
        const double xj = j == 0 ? 1.0 : row[j - 1];
        gram[i * m + j] += xi * xj;
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < i; ++j) gram[i * m + j] = gram[j * m + i];

  std::vector<double> v(m, 1.0), w(m, 0.0);
  double lambda = 0.0;
  for (int iter = 0; iter < 128; ++iter) {
    for (std::size_t i = 0; i < m; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m; ++j) s += gram[i * m + j] * v[j];
      w[i] = s;
    }
    double norm = 0.0;
    for (double wi : w) norm += wi * wi;
    norm = std::sqrt(norm);
    if (norm == 0.0) return 0.0;
    lambda = norm;
    for (std::size_t i = 0; i < m; ++i) v[i] = w[i] / norm;
  }
  return lambda;
}

}  // namespace

double logistic_objective(const Matrix& x, const std::vector<int>& y, double intercept,
                          const std::vector<double>& weights, double l2) {
  double loss = 0.0;
  for (std::size_t r = 0; r < x.rows; ++r) {
    const double z = intercept + dot(x.row(r), weights);
    // y=1 contributes log(1+e^-z), y=0 contributes log(1+e^z)
    loss += y[r] == 1 ? log1p_exp_neg(z) : log1p_exp_neg(-z);
  }
  loss /= static_cast<double>(x.rows);
  double penalty = 0.0;
  for (double w : weights) penalty += w * w;
  return loss + l2 * penalty;
}

std::vector<double> logistic_gradient(const Matrix& x, const std::vector<int>& y,
                                      double intercept, const std::vector<double>& weights,
                                      double l2) {
  std::vector<double> grad(weights.size() + 1, 0.0);
  for (std::size_t r = 0; r < x.rows; ++r) {
    auto row = x.row(r);
    const double residual = sigmoid(intercept + dot(row, weights)) - static_cast<double>(y[r]);
    grad[0] += residual;
    for (std::size_t j = 0; j < weights.size(); ++j) grad[j + 1] += residual * row[j];
  }
  const double inv_n = 1.0 / static_cast<double>(x.rows);
  for (double& g : grad) g *= inv_n;
  for (std::size_t j = 0; j < weights.size(); ++j) grad[j + 1] += 2.0 * l2 * weights[j];
  return grad;
}

LinearModel fit_logistic(const Matrix& x, const std::vector<int>& y,
                         const LogisticParams& params) {
  if (x.rows == 0 || y.size() != x.rows) throw ArgumentError("fit_logistic: empty or ragged input");
  if (params.l1 < 0.0 || params.l2 < 0.0) throw ArgumentError("fit_logistic: negative regularization weight");
  for (double v : x.values)
    if (!std::isfinite(v)) throw ArgumentError("fit_logistic: non-finite feature value");
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 0) has0 = true;
    else if (v == 1) has1 = true;
    else throw ArgumentError("fit_logistic: labels must be 0/1");
  }
  if (!has0 || !has1) throw FitError("fit_logistic: need at least one instance of each class");

  // 1% headroom on the curvature bound keeps the step valid even if the
  // power iteration stops marginally short of the top eigenvalue
  const double lipschitz =
      1.01 * gram_lambda_max(x) / (4.0 * static_cast<double>(x.rows)) + 2.0 * params.l2;
  const double step = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

  LinearModel model;
  model.link = Link::logistic;
  model.weights.assign(x.cols, 0.0);
  model.intercept = 0.0;

  for (int iter = 0; iter < params.max_iters; ++iter) {
    const auto grad = logistic_gradient(x, y, model.intercept, model.weights, params.l2);
    double max_change = 0.0;
    const double new_intercept = model.intercept - step * grad[0];
    max_change = std::abs(new_intercept - model.intercept);
    model.intercept = new_intercept;
    for (std::size_t j = 0; j < model.weights.size(); ++j) {
      const double w = soft_threshold(model.weights[j] - step * grad[j + 1], step * params.l1);
      max_change = std::max(max_change, std::abs(w - model.weights[j]));
      model.weights[j] = w;
    }
    if (max_change < params.tol) break;
  }
  return model;
}

double predict_linear(const LinearModel& model, std::span<const double> x) {
  if (x.size() != model.weights.size())
    throw ArgumentError("predict_linear: instance has " + std::to_string(x.size()) +
                        " features, model expects " + std::to_string(model.weights.size()));
  const double z = model.intercept + dot(x, model.weights);
  return model.link == Link::logistic ? sigmoid(z) : z;
}

}  // namespace glassbox
