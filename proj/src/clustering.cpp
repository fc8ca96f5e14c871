#include "cbrsim/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cbrsim {

namespace {

std::vector<double> distinct_sorted(const std::vector<double>& values) {
  std::vector<double> d(values);
  std::sort(d.begin(), d.end());
  d.erase(std::unique(d.begin(), d.end()), d.end());
  return d;
}

// Nearest center; ties to the higher-valued center.
int nearest_center(const std::vector<double>& centers, double v) {
  int best = 0;
  double best_dist = std::abs(v - centers[0]);
  for (int i = 1; i < static_cast<int>(centers.size()); ++i) {
    const double dist = std::abs(v - centers[i]);
    if (dist < best_dist || (dist == best_dist && centers[i] > centers[best])) {
      best = i;
      best_dist = dist;
    }
  }
  return best;
}

std::vector<double> initial_centers(const std::vector<double>& values, int k) {
  const std::size_t n = values.size();
  std::vector<double> sorted(values);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> centers(k);
  for (int i = 0; i < k; ++i) {
    auto idx = static_cast<std::size_t>((i + 0.5) / k * static_cast<double>(n));
    centers[i] = sorted[std::min(idx, n - 1)];
  }
  if (std::adjacent_find(centers.begin(), centers.end()) != centers.end()) {
    // Quantile picks collided on clumpy data; spread over distinct values.
    const auto d = distinct_sorted(values);
    for (int i = 0; i < k; ++i) {
      centers[i] = d[static_cast<std::size_t>(i) * (d.size() - 1) / (k - 1)];
    }
  }
  return centers;
}

KMeansResult lloyd(const std::vector<double>& values, const std::vector<double>& weights, int k) {
  if (k < 2) throw ClusteringError("k must be >= 2");
  if (static_cast<int>(distinct_sorted(values).size()) < k) {
    throw DegenerateKError("fewer distinct values than k=" + std::to_string(k));
  }
  const std::size_t n = values.size();
  std::vector<double> centers = initial_centers(values, k);
  std::vector<int> assign(n, -1);
  std::vector<int> prev;
  for (int iter = 0; iter < 100; ++iter) {
    for (std::size_t i = 0; i < n; ++i) assign[i] = nearest_center(centers, values[i]);
    if (assign == prev) break;
    prev = assign;
    std::vector<double> sum(k, 0.0);
    std::vector<double> wsum(k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[assign[i]] += values[i] * weights[i];
      wsum[assign[i]] += weights[i];
    }
    std::vector<bool> used(n, false);
    for (int c = 0; c < k; ++c) {
      if (wsum[c] > 0.0) {
        centers[c] = sum[c] / wsum[c];
      }
    }
    for (int c = 0; c < k; ++c) {
      if (wsum[c] > 0.0) continue;
      // Re-seed an empty cluster at the point farthest from its own center.
      std::size_t pick = n;
      double best = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        const double dist = std::abs(values[i] - centers[assign[i]]);
        if (dist > best) {
          best = dist;
          pick = i;
        }
      }
      if (pick < n) {
        centers[c] = values[pick];
        used[pick] = true;
      }
    }
  }
  return {std::move(centers), std::move(assign)};
}

}  // namespace

KMeansResult kmeans_1d(const std::vector<double>& values, int k) {
  return lloyd(values, std::vector<double>(values.size(), 1.0), k);
}

KMeansResult weighted_kmeans(const std::vector<double>& values, double decay, int k) {
  if (!(decay > 0.0)) throw ClusteringError("decay constant must be positive");
  const std::size_t n = values.size();
  std::vector<double> weights(n);
  for (std::size_t j = 0; j < n; ++j) {
    weights[j] = std::exp(-static_cast<double>(n - 1 - j) / decay);
  }
  return lloyd(values, weights, k);
}

double silhouette_score(const std::vector<double>& values, const std::vector<int>& assignment) {
  const std::size_t n = values.size();
  int k = 0;
  for (int label : assignment) k = std::max(k, label + 1);
  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[assignment[i]].push_back(i);
  int non_empty = 0;
  for (const auto& m : members) non_empty += m.empty() ? 0 : 1;
  if (non_empty < 2) throw ClusteringError("silhouette needs at least 2 non-empty clusters");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int own = assignment[i];
    if (members[own].size() == 1) continue;  // singleton contributes 0
    double a = 0.0;
    for (std::size_t j : members[own]) a += std::abs(values[i] - values[j]);
    a /= static_cast<double>(members[own].size() - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c == own || members[c].empty()) continue;
      double mean = 0.0;
      for (std::size_t j : members[c]) mean += std::abs(values[i] - values[j]);
      mean /= static_cast<double>(members[c].size());
      b = std::min(b, mean);
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

namespace {

ClusterModel model_from(const KMeansResult& res, const std::vector<double>& values) {
  ClusterModel m;
  m.centers = res.centers;
  std::sort(m.centers.begin(), m.centers.end(), std::greater<>());
  m.centers.erase(std::unique(m.centers.begin(), m.centers.end()), m.centers.end());
  m.k = static_cast<int>(m.centers.size());
  m.trained = true;
  m.silhouette = silhouette_score(values, res.assignment);
  return m;
}

template <typename Fit>
ClusterModel fit_with(const std::vector<double>& values, int k_max, Fit fit) {
  const auto d = distinct_sorted(values);
  if (d.size() < 2) {
    ClusterModel m;
    m.centers = {values.empty() ? 0.0 : values.front()};
    m.k = 1;
    m.trained = true;
    m.degenerate = true;
    return m;
  }
  ClusterModel best;
  const int hi = std::min<int>(k_max, static_cast<int>(d.size()));
  for (int k = 2; k <= hi; ++k) {
    ClusterModel cand = model_from(fit(k), values);
    if (!best.trained || cand.silhouette > best.silhouette) best = cand;
  }
  return best;
}

}  // namespace

ClusterModel fit_model(const std::vector<double>& values, int k_max) {
  return fit_with(values, k_max, [&](int k) { return kmeans_1d(values, k); });
}

ClusterModel fit_model_weighted(const std::vector<double>& values, double decay, int k_max) {
  return fit_with(values, k_max, [&](int k) { return weighted_kmeans(values, decay, k); });
}

int rank_of(const ClusterModel& m, double value) {
  if (!m.trained) throw ClusteringError("rank_of on untrained model");
  int best = 0;
  double best_dist = std::abs(value - m.centers[0]);
  for (int i = 1; i < static_cast<int>(m.centers.size()); ++i) {
    const double dist = std::abs(value - m.centers[i]);
    if (dist < best_dist) {  // centers descend, so ties keep the higher one
      best = i;
      best_dist = dist;
    }
  }
  return best + 1;
}

double boundary_above(const ClusterModel& m, int rank) {
  if (!m.trained) throw ClusteringError("boundary_above on untrained model");
  if (rank < 2 || rank > m.k) throw ClusteringError("boundary_above: no better cluster");
  return (m.centers[rank - 2] + m.centers[rank - 1]) / 2.0;
}

void lvq_update(ClusterModel& m, double u_new, double alpha) {
  if (!m.trained) throw ClusteringError("lvq_update on untrained model");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ClusteringError("alpha must be in (0,1)");
  const int i = rank_of(m, u_new) - 1;
  m.centers[i] += alpha * (u_new - m.centers[i]);
  std::sort(m.centers.begin(), m.centers.end(), std::greater<>());
}

UpdateMethod update_method_from_name(const std::string& name) {
  if (name == "none") return UpdateMethod::None;
  if (name == "lvq") return UpdateMethod::Lvq;
  if (name == "periodic") return UpdateMethod::Periodic;
  if (name == "weighted") return UpdateMethod::Weighted;
  throw ClusteringError("unknown update method: " + name);
}

const char* to_name(UpdateMethod m) {
  switch (m) {
    case UpdateMethod::None: return "none";
    case UpdateMethod::Lvq: return "lvq";
    case UpdateMethod::Periodic: return "periodic";
    case UpdateMethod::Weighted: return "weighted";
  }
  return "?";
}

void ClusterTracker::record(double value, Seconds t) {
  values_.push_back(value);
  times_.push_back(t);
  if (!model_.trained) {
    if (static_cast<int>(values_.size()) >= cfg_.n_tr) {
      model_ = fit_model(values_, cfg_.k_max);
      since_refit_ = 0;
    }
    return;
  }
  switch (cfg_.update) {
    case UpdateMethod::None:
      break;
    case UpdateMethod::Lvq:
      lvq_update(model_, value, cfg_.alpha);
      break;
    case UpdateMethod::Periodic:
    case UpdateMethod::Weighted:
      ++since_refit_;
      if (since_refit_ >= cfg_.t_p) {
        maybe_refit();
        since_refit_ = 0;
      }
      break;
  }
}

void ClusterTracker::maybe_refit() {
  const auto n = values_.size();
  const auto w = static_cast<std::size_t>(cfg_.window);
  const std::vector<double> window(values_.end() - static_cast<std::ptrdiff_t>(std::min(w, n)),
                                   values_.end());
  if (distinct_sorted(window).size() < 2) return;  // keep the old model
  model_ = cfg_.update == UpdateMethod::Weighted
               ? fit_model_weighted(window, cfg_.decay, cfg_.k_max)
               : fit_model(window, cfg_.k_max);
}

}  // namespace cbrsim
