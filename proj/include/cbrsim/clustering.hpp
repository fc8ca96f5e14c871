#pragma once

#include <stdexcept>
#include <vector>

#include "cbrsim/trace.hpp"

namespace cbrsim {

struct ClusteringError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised when the data has fewer distinct values than the requested k.
struct DegenerateKError : ClusteringError {
  using ClusteringError::ClusteringError;
};

struct KMeansResult {
  std::vector<double> centers;
  std::vector<int> assignment;  // per input value, index into centers
};

// Lloyd iterations with deterministic quantile initialization.
// Ties in assignment go to the higher-valued center.
KMeansResult kmeans_1d(const std::vector<double>& values, int k);

// Exponential recency weighting: values are given in recording order and the
// weight of a value with recency index i (most recent i = 0) is exp(-i/decay).
KMeansResult weighted_kmeans(const std::vector<double>& values, double decay, int k);

// Mean over points of (b - a) / max(a, b); singleton-cluster points count 0.
double silhouette_score(const std::vector<double>& values, const std::vector<int>& assignment);

struct ClusterModel {
  std::vector<double> centers;  // strictly descending; rank r = centers[r-1]
  int k = 0;
  bool trained = false;
  bool degenerate = false;  // all samples equal: single center, rank 1 everywhere
  double silhouette = 0.0;
  friend bool operator==(const ClusterModel&, const ClusterModel&) = default;
};

// k-Means for k = 2..k_max scored by silhouette; highest score wins, ties
// going to the smaller k. All-equal samples fall back to a flagged k=1 model.
ClusterModel fit_model(const std::vector<double>& values, int k_max);
ClusterModel fit_model_weighted(const std::vector<double>& values, double decay, int k_max);

// 1-based rank of the nearest center; ties to the higher center.
int rank_of(const ClusterModel& m, double value);

// Smallest value whose rank is strictly better than `rank`: the midpoint
// between centers[rank-2] and centers[rank-1] (ties rank to the higher
// center). Precondition: 2 <= rank <= m.k.
double boundary_above(const ClusterModel& m, int rank);

// c_i <- c_i + alpha * (u_new - c_i) for the nearest center, then re-sort.
void lvq_update(ClusterModel& m, double u_new, double alpha);

enum class UpdateMethod { None, Lvq, Periodic, Weighted };

UpdateMethod update_method_from_name(const std::string& name);
const char* to_name(UpdateMethod m);

struct ClusteringConfig {
  int n_tr = 50;
  int k_max = 4;
  UpdateMethod update = UpdateMethod::Lvq;
  double alpha = 0.05;   // LVQ learning rate
  int t_p = 50;          // periodic/weighted update period (samples)
  int window = 50;       // periodic/weighted refit window
  double decay = 400.0;  // weighted k-Means decay constant
};

// One utility-sample stream (per node and, for destination-dependent
// utilities, per destination): records values, trains the model when n_tr
// samples have accumulated, then applies the configured update method.
class ClusterTracker {
 public:
  ClusterTracker() = default;
  explicit ClusterTracker(const ClusteringConfig& cfg) : cfg_(cfg) {}

  void record(double value, Seconds t);

  bool trained() const { return model_.trained; }
  const ClusterModel& model() const { return model_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<Seconds>& timestamps() const { return times_; }
  std::size_t sample_count() const { return values_.size(); }

 private:
  void maybe_refit();

  ClusteringConfig cfg_;
  std::vector<double> values_;
  std::vector<Seconds> times_;
  ClusterModel model_;
  int since_refit_ = 0;
};

}  // namespace cbrsim
