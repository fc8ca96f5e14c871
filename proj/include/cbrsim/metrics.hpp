#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cbrsim/engine.hpp"

namespace cbrsim {

struct MetricsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Percent reduction in transmissions relative to a baseline.
double routing_gain(double baseline_tx, double variant_tx);

// Relative change (variant/baseline - 1); used for delivery rate and delay.
double rate_change(double baseline, double variant);

// One experiment cell: arithmetic means over repetitions, per-rep values kept.
struct AggRow {
  std::string label;
  int reps = 0;
  double generated = 0.0;
  double delivered = 0.0;
  double delivery_ratio = 0.0;
  double transmissions = 0.0;
  double drops = 0.0;
  double replications = 0.0;
  bool cost_defined = false;    // every repetition delivered at least one packet
  double cost = 0.0;
  bool delay_defined = false;
  double mean_delay = 0.0;
  std::vector<double> rep_delivery_ratio;
  std::vector<double> rep_transmissions;
  std::vector<double> rep_mean_delay;  // only reps with deliveries
  std::optional<double> gain;             // vs baseline row
  std::optional<double> delivery_change;  // vs baseline row
  std::optional<double> delay_change;     // vs baseline row
};

AggRow aggregate(const std::string& label, const std::vector<RunResult>& reps);

// Fills gain/delivery_change/delay_change on every non-baseline row.
void add_baseline_comparisons(std::vector<AggRow>& rows, const std::string& baseline_label);

std::string csv_quote(const std::string& field);
std::string to_csv(const std::vector<AggRow>& rows);
std::string to_table(const std::vector<AggRow>& rows);

}  // namespace cbrsim
