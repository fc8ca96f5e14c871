#include "cbrsim/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace cbrsim {

double routing_gain(double baseline_tx, double variant_tx) {
  if (baseline_tx == 0.0) throw MetricsError("routing gain undefined: baseline has zero transmissions");
  return 100.0 * (1.0 - variant_tx / baseline_tx);
}

double rate_change(double baseline, double variant) {
  if (baseline == 0.0) throw MetricsError("relative change undefined: zero baseline");
  return variant / baseline - 1.0;
}

AggRow aggregate(const std::string& label, const std::vector<RunResult>& reps) {
  if (reps.empty()) throw MetricsError("no repetitions to aggregate");
  AggRow row;
  row.label = label;
  row.reps = static_cast<int>(reps.size());
  double cost_sum = 0.0, delay_sum = 0.0;
  row.cost_defined = true;
  for (const RunResult& r : reps) {
    row.generated += static_cast<double>(r.generated);
    row.delivered += static_cast<double>(r.delivered);
    row.transmissions += static_cast<double>(r.transmissions);
    row.drops += static_cast<double>(r.drops);
    row.replications += static_cast<double>(r.replications);
    row.rep_delivery_ratio.push_back(r.delivery_ratio());
    row.rep_transmissions.push_back(static_cast<double>(r.transmissions));
    if (r.cost_defined()) {
      cost_sum += r.cost();
      delay_sum += r.mean_delay();
      row.rep_mean_delay.push_back(r.mean_delay());
    } else {
      row.cost_defined = false;
    }
  }
  const auto n = static_cast<double>(reps.size());
  row.generated /= n;
  row.delivered /= n;
  row.transmissions /= n;
  row.drops /= n;
  row.replications /= n;
  row.delivery_ratio =
      std::accumulate(row.rep_delivery_ratio.begin(), row.rep_delivery_ratio.end(), 0.0) / n;
  if (row.cost_defined) {
    row.cost = cost_sum / n;
    row.mean_delay = delay_sum / n;
    row.delay_defined = true;
  }
  return row;
}

void add_baseline_comparisons(std::vector<AggRow>& rows, const std::string& baseline_label) {
  const auto base = std::find_if(rows.begin(), rows.end(), [&](const AggRow& r) {
    return r.label == baseline_label;
  });
  if (base == rows.end()) throw MetricsError("baseline row not found: " + baseline_label);
  for (AggRow& row : rows) {
    if (&row == &*base) continue;
    if (base->cost_defined && row.cost_defined) {
      row.gain = routing_gain(base->cost, row.cost);
    }
    if (base->delivery_ratio > 0.0) {
      row.delivery_change = rate_change(base->delivery_ratio, row.delivery_ratio);
    }
    if (base->delay_defined && row.delay_defined && base->mean_delay > 0.0) {
      row.delay_change = rate_change(base->mean_delay, row.mean_delay);
    }
  }
}

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

namespace {

std::string fmt(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

std::vector<std::vector<std::string>> cells(const std::vector<AggRow>& rows) {
  std::vector<std::vector<std::string>> out;
  out.push_back({"label", "reps", "generated", "delivered", "delivery_ratio", "transmissions",
                 "cost", "mean_delay", "drops", "replications", "routing_gain_pct",
                 "delivery_change", "delay_change"});
  for (const AggRow& r : rows) {
    out.push_back({r.label, std::to_string(r.reps), fmt(r.generated, 1), fmt(r.delivered, 1),
                   fmt(r.delivery_ratio), fmt(r.transmissions, 1),
                   r.cost_defined ? fmt(r.cost) : "", r.delay_defined ? fmt(r.mean_delay, 1) : "",
                   fmt(r.drops, 1), fmt(r.replications, 1), r.gain ? fmt(*r.gain, 2) : "",
                   r.delivery_change ? fmt(*r.delivery_change) : "",
                   r.delay_change ? fmt(*r.delay_change) : ""});
  }
  return out;
}

}  // namespace

std::string to_csv(const std::vector<AggRow>& rows) {
  std::ostringstream out;
  for (const auto& line : cells(rows)) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i) out << ',';
      out << csv_quote(line[i]);
    }
    out << "\r\n";
  }
  return out.str();
}

std::string to_table(const std::vector<AggRow>& rows) {
  const auto grid = cells(rows);
  std::vector<std::size_t> width(grid[0].size(), 0);
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  std::ostringstream out;
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i) out << "  ";
      out << line[i] << std::string(width[i] - line[i].size(), ' ');
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace cbrsim
