#include <algorithm>
#include <cmath>
#include <set>

#include "glassbox/models.hpp"

namespace glassbox {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Quantile bin edges over a feature column. When the column has fewer
// distinct values than requested bins, each distinct value gets its own bin
// (the clamped case).
std::vector<double> quantile_edges(const std::vector<double>& column, int bins, bool& clamped) {
  std::vector<double> sorted = column;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct;
  for (double v : sorted)
    if (distinct.empty() || v != distinct.back()) distinct.push_back(v);

  std::vector<double> edges;
  if (distinct.size() <= 1) {
    clamped = true;
    const double v = distinct.empty() ? 0.0 : distinct[0];
    edges = {v, v + 1.0};  // single bin
    return edges;
  }
  if (static_cast<std::size_t>(bins) >= distinct.size()) {
    if (static_cast<std::size_t>(bins) > distinct.size()) clamped = true;
    edges.push_back(distinct.front());
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
      edges.push_back(0.5 * (distinct[i] + distinct[i + 1]));
    edges.push_back(distinct.back());
    return edges;
  }
  edges.push_back(sorted.front());
  const auto n = static_cast<double>(sorted.size());
  for (int k = 1; k < bins; ++k) {
    const auto idx = static_cast<std::size_t>(std::floor(static_cast<double>(k) / bins * (n - 1)));
    const double q = sorted[std::min(idx, sorted.size() - 1)];
    if (q > edges.back()) edges.push_back(q);
  }
  if (sorted.back() > edges.back()) edges.push_back(sorted.back());
  if (edges.size() < 2) edges.push_back(edges.back() + 1.0);
  return edges;
}

std::size_t bin_of(const std::vector<double>& edges, std::size_t nbins, double x) {
  if (nbins == 0) return 0;
  std::size_t lo = 0;
  for (std::size_t i = 1; i + 1 < edges.size(); ++i) {
    if (x >= edges[i]) lo = i;
    else break;
  }
  return std::min(lo, nbins - 1);
}

void center_shape(std::vector<double>& values, const std::vector<double>& masses,
                  double& intercept_sink) {
  double total = 0.0, weighted = 0.0;
  for (std::size_t b = 0; b < values.size(); ++b) {
    total += masses[b];
    weighted += masses[b] * values[b];
  }
  if (total <= 0.0) return;
  const double mean = weighted / total;
  for (double& v : values) v -= mean;
  intercept_sink += mean;
}

}  // namespace

// bin i covers [edges[i], edges[i+1]); inputs outside the range clamp to
// the first/last bin
std::size_t ShapeFunction::bin_index(double x) const {
  return bin_of(edges, values.size(), x);
}

double ShapeFunction::evaluate(double x) const {
  if (values.empty()) return 0.0;
  return values[bin_index(x)];
}

double InteractionShape::evaluate(double xa, double xb) const {
  if (values.empty()) return 0.0;
  const std::size_t bins_b = edges_b.size() - 1;
  const std::size_t ia = bin_of(edges_a, edges_a.size() - 1, xa);
  const std::size_t ib = bin_of(edges_b, bins_b, xb);
  return values[ia * bins_b + ib];
}

GamModel fit_gam(const Matrix& x, const std::vector<double>& y, Link link,
                 const GamParams& params) {
  if (x.rows == 0 || y.size() != x.rows) throw ArgumentError("fit_gam: empty or ragged input");
  if (params.bins < 2) throw ArgumentError("fit_gam: bins must be >= 2");
  if (params.passes < 1) throw ArgumentError("fit_gam: passes must be >= 1");
  for (const auto& [a, b] : params.interactions) {
    if (a == b) throw ArgumentError("fit_gam: interaction pair must use distinct features");
    if (a >= x.cols || b >= x.cols) throw ArgumentError("fit_gam: interaction feature out of range");
  }
  {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& [a, b] : params.interactions)
      if (!seen.insert({std::min(a, b), std::max(a, b)}).second)
        throw ArgumentError("fit_gam: duplicate interaction pair");
  }

  const std::size_t n = x.rows;
  GamModel model;
  model.link = link;

  std::vector<std::vector<double>> columns(x.cols, std::vector<double>(n));
  for (std::size_t j = 0; j < x.cols; ++j)
    for (std::size_t r = 0; r < n; ++r) columns[j][r] = x(r, j);

  // Bin layout and per-row bin assignment, fixed before backfitting.
  std::vector<std::vector<std::size_t>> row_bin(x.cols);
  for (std::size_t j = 0; j < x.cols; ++j) {
    ShapeFunction shape;
    shape.feature = j;
    bool clamped = false;
    shape.edges = quantile_edges(columns[j], params.bins, clamped);
    model.bins_clamped = model.bins_clamped || clamped;
    shape.values.assign(shape.edges.size() - 1, 0.0);
    shape.masses.assign(shape.edges.size() - 1, 0.0);
    row_bin[j].resize(n);
    for (std::size_t r = 0; r < n; ++r) {
      const std::size_t b = shape.bin_index(columns[j][r]);
      row_bin[j][r] = b;
      shape.masses[b] += 1.0;
    }
    model.shapes.push_back(std::move(shape));
  }

  std::vector<std::vector<std::size_t>> row_cell(params.interactions.size());
  for (std::size_t p = 0; p < params.interactions.size(); ++p) {
    const auto [a, b] = params.interactions[p];
    InteractionShape inter;
    inter.feature_a = a;
    inter.feature_b = b;
    inter.edges_a = model.shapes[a].edges;
    inter.edges_b = model.shapes[b].edges;
    const std::size_t cells = (inter.edges_a.size() - 1) * (inter.edges_b.size() - 1);
    inter.values.assign(cells, 0.0);
    row_cell[p].resize(n);
    for (std::size_t r = 0; r < n; ++r)
      row_cell[p][r] = row_bin[a][r] * (inter.edges_b.size() - 1) + row_bin[b][r];
    model.interactions.push_back(std::move(inter));
  }

  // Current additive score per row, kept incrementally.
  std::vector<double> score(n, 0.0);
  if (link == Link::identity) {
    double mean = 0.0;
    for (double v : y) mean += v;
    model.intercept = mean / static_cast<double>(n);
  } else {
    double pos = 0.0;
    for (double v : y) pos += v;
    double rate = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    model.intercept = std::log(rate / (1.0 - rate));
  }
  for (std::size_t r = 0; r < n; ++r) score[r] = model.intercept;

  std::vector<double> delta;
  auto refit_block = [&](std::vector<double>& values, const std::vector<std::size_t>& assignment,
                         std::size_t cells) {
    // Regression: full per-bin refit to the residual. Logistic: one Newton
    // step per bin on the working gradient.
    delta.assign(cells, 0.0);
    if (link == Link::identity) {
      std::vector<double> mass(cells, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t c = assignment[r];
        delta[c] += y[r] - score[r];
        mass[c] += 1.0;
      }
      for (std::size_t c = 0; c < cells; ++c) delta[c] = mass[c] > 0.0 ? delta[c] / mass[c] : 0.0;
    } else {
      std::vector<double> num(cells, 0.0), den(cells, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        const std::size_t c = assignment[r];
        const double p = sigmoid(score[r]);
        num[c] += y[r] - p;
        den[c] += p * (1.0 - p);
      }
      for (std::size_t c = 0; c < cells; ++c)
        delta[c] = den[c] > 1e-10 ? num[c] / den[c] : 0.0;
    }
    for (std::size_t r = 0; r < n; ++r) score[r] += delta[assignment[r]];
    for (std::size_t c = 0; c < cells; ++c) values[c] += delta[c];
  };

  for (int pass = 0; pass < params.passes; ++pass) {
    for (std::size_t j = 0; j < x.cols; ++j)
      refit_block(model.shapes[j].values, row_bin[j], model.shapes[j].values.size());
    for (std::size_t p = 0; p < model.interactions.size(); ++p)
      refit_block(model.interactions[p].values, row_cell[p], model.interactions[p].values.size());
  }

  // Shapes carry mean zero over the training mass; offsets live in the
  // intercept. Scores are unchanged by construction.
  for (std::size_t j = 0; j < x.cols; ++j)
    center_shape(model.shapes[j].values, model.shapes[j].masses, model.intercept);
  for (std::size_t p = 0; p < model.interactions.size(); ++p) {
    auto& inter = model.interactions[p];
    inter.masses.assign(inter.values.size(), 0.0);
    for (std::size_t r = 0; r < n; ++r) inter.masses[row_cell[p][r]] += 1.0;
    center_shape(inter.values, inter.masses, model.intercept);
  }
  return model;
}

double predict_gam(const GamModel& model, std::span<const double> x) {
  std::size_t max_feature = 0;
  for (const auto& s : model.shapes) max_feature = std::max(max_feature, s.feature + 1);
  for (const auto& i : model.interactions)
    max_feature = std::max({max_feature, i.feature_a + 1, i.feature_b + 1});
  if (x.size() < max_feature)
    throw ArgumentError("predict_gam: instance has " + std::to_string(x.size()) +
                        " features, model references feature " + std::to_string(max_feature - 1));
  double z = model.intercept;
  for (const auto& shape : model.shapes) z += shape.evaluate(x[shape.feature]);
  for (const auto& inter : model.interactions)
    z += inter.evaluate(x[inter.feature_a], x[inter.feature_b]);
  return model.link == Link::logistic ? sigmoid(z) : z;
}

}  // namespace glassbox
