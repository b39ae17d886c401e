#include <algorithm>
#include <cmath>
#include <map>

#include "glassbox/models.hpp"

namespace glassbox {

double instance_distance(Metric metric, std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("distance: dimension mismatch");
  switch (metric) {
    case Metric::euclidean: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case Metric::manhattan: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
      return s;
    }
    case Metric::cosine: {
      double ab = 0.0, aa = 0.0, bb = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
      }
      if (aa == 0.0 && bb == 0.0) return 0.0;
      if (aa == 0.0 || bb == 0.0) return 1.0;
      return 1.0 - ab / (std::sqrt(aa) * std::sqrt(bb));
    }
  }
  throw ArgumentError("distance: unknown metric");
}

KnnResult predict_knn(const InstanceModel& model, std::span<const double> x) {
  const std::size_t n = model.memory_x.rows;
  if (n == 0) throw ArgumentError("predict_knn: empty memory");
  if (model.k < 1 || model.k > n) throw ArgumentError("predict_knn: k out of range");
  if (x.size() != model.memory_x.cols)
    throw ArgumentError("predict_knn: instance has " + std::to_string(x.size()) +
                        " features, memory has " + std::to_string(model.memory_x.cols));

  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t i = 0; i < n; ++i)
    order[i] = {instance_distance(model.metric, model.memory_x.row(i), x), i};
  // ties resolved toward the lower memory index
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(model.k),
                    order.end());

  KnnResult result;
  result.retrieved.reserve(model.k);
  std::map<int, std::size_t> votes;
  double label_sum = 0.0;
  for (std::size_t i = 0; i < model.k; ++i) {
    const auto [distance, index] = order[i];
    RetrievedCase rc;
    rc.memory_index = index;
    rc.instance = model.memory_x.row_vector(index);
    rc.label = model.memory_y[index];
    rc.distance = distance;
    votes[rc.label]++;
    label_sum += rc.label;
    result.retrieved.push_back(std::move(rc));
  }

  if (model.voting == Voting::average) {
    result.label = static_cast<int>(std::lround(label_sum / static_cast<double>(model.k)));
  } else {
    int best = votes.begin()->first;
    std::size_t best_votes = votes.begin()->second;
    for (const auto& [label, count] : votes) {
      if (count > best_votes) {  // ties keep the lowest label id
        best = label;
        best_votes = count;
      }
    }
    result.label = best;
  }
  return result;
}

}  // namespace glassbox
