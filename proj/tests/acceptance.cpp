// Acceptance gate: one line per criterion, nonzero exit if any fails.
//
// Each criterion is validated against independent oracles (see oracles.hpp)
// or hand-derived tables (golden_decisions.hpp), never against the library's
// own output alone.

#include <algorithm>
#include <chrono>
#include <climits>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cbrsim/clustering.hpp"
#include "cbrsim/config.hpp"
#include "cbrsim/engine.hpp"
#include "cbrsim/experiment.hpp"
#include "cbrsim/metrics.hpp"
#include "cbrsim/rng.hpp"
#include "cbrsim/strategy.hpp"
#include "cbrsim/trace.hpp"
#include "golden_decisions.hpp"
#include "oracles.hpp"

using namespace cbrsim;

namespace {

int g_failures = 0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int n, const char* what, bool ok, const std::string& detail) {
  std::printf("[%s] %2d: %s (%s)\n", ok ? "PASS" : "FAIL", n, what, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void report_skip(int n, const char* what, const std::string& why) {
  std::printf("[SKIP] %2d: %s (%s)\n", n, what, why.c_str());
  std::fflush(stdout);
}

template <typename Fn>
void criterion(int n, const char* what, Fn body) {
  const auto t0 = Clock::now();
  try {
    std::string detail;
    const bool ok = body(detail);
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s%.1fs", detail.empty() ? "" : "; ", seconds_since(t0));
    report(n, what, ok, detail + buf);
  } catch (const std::exception& e) {
    report(n, what, false, std::string("exception: ") + e.what());
  }
}

std::string fmt(const char* pattern, double a, double b = 0.0) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), pattern, a, b);
  return buf;
}

// ---------------------------------------------------------------- criterion 1

bool golden_tables(std::string& detail) {
  const auto tables = golden::tables();
  bool ok = tables.size() >= 10;
  std::size_t rows = 0;
  for (const auto& table : tables) {
    ok = ok && table.rows.size() >= 8;
    for (const auto& row : table.rows) {
      rows += 1;
      if (!(decide(table.strategy, row.in, row.copies) == row.expect)) {
        detail = std::string(to_name(table.strategy)) + ": '" + row.note + "' mismatched";
        return false;
      }
    }
  }
  detail = std::to_string(tables.size()) + " tables, " + std::to_string(rows) + " rows";
  return ok;
}

// ---------------------------------------------------------------- criterion 2

// 1-4 planted modes, 20-200 points. Single-mode datasets get a heavy upper
// tail (tight core plus a scattered 20%), matching how utility samples from
// one population actually look; multi-mode datasets use plain jitter.
std::vector<double> random_modes_dataset(Rng& rng, int* n_modes_out) {
  const int n = static_cast<int>(rng.uniform_int(20, 200));
  const int n_modes = static_cast<int>(rng.uniform_int(1, 4));
  std::vector<double> centers;
  for (int m = 0; m < n_modes; ++m) centers.push_back(15.0 * m + 5.0 * rng.uniform01());
  std::vector<double> values;
  for (int i = 0; i < n; ++i) {
    const double c = centers[static_cast<std::size_t>(i) % centers.size()];
    double noise = rng.uniform01() - 0.5;
    if (n_modes == 1 && rng.uniform01() < 0.2) noise += 3.0 + 3.0 * rng.uniform01();
    values.push_back(c + noise);
  }
  *n_modes_out = n_modes;
  return values;
}

// True when the two labelings induce the same partition of indices.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) return false;
  std::map<int, int> fwd, rev;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto f = fwd.emplace(a[i], b[i]);
    if (!f.second && f.first->second != b[i]) return false;
    const auto r = rev.emplace(b[i], a[i]);
    if (!r.second && r.first->second != a[i]) return false;
  }
  return true;
}

bool clustering_oracle(std::string& detail) {
  Rng rng(2024);
  int exact_wcss = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int n_modes = 0;
    const auto values = random_modes_dataset(rng, &n_modes);

    // model selection must equal the exhaustive silhouette argmax
    const ClusterModel got = fit_model(values, 4);
    int best_k = 0;
    double best_s = -2.0;
    std::vector<int> best_assignment;
    for (int k = 2; k <= 4; ++k) {
      KMeansResult res;
      try {
        res = kmeans_1d(values, k);
      } catch (const DegenerateKError&) {
        continue;
      }
      const double s = silhouette_score(values, res.assignment);
      if (s > best_s) {
        best_s = s;
        best_k = k;
        best_assignment = res.assignment;
      }
    }
    if (got.k != best_k) {
      detail = "trial " + std::to_string(trial) + ": chose k=" + std::to_string(got.k) +
               ", oracle k=" + std::to_string(best_k);
      return false;
    }
    std::vector<int> got_assignment;
    for (double v : values) got_assignment.push_back(rank_of(got, v));
    if (!same_partition(got_assignment, best_assignment)) {
      detail = "trial " + std::to_string(trial) + ": partition differs from the oracle";
      return false;
    }

    // kmeans WCSS vs the DP-optimal contiguous partition
    const int k = std::max(2, n_modes);
    const auto res = kmeans_1d(values, k);
    const double mine = oracle::wcss(values, res.centers, res.assignment);
    const double best = oracle::optimal_wcss_1d(values, k);
    if (mine <= best * (1.0 + 1e-9)) {
      ++exact_wcss;
    } else if (mine > best * 1.05) {
      detail = "trial " + std::to_string(trial) + ": wcss " + std::to_string(mine) +
               " vs optimal " + std::to_string(best);
      return false;
    }
  }
  detail = std::to_string(exact_wcss) + "/200 wcss-optimal";
  return exact_wcss >= 190;
}

// ---------------------------------------------------------------- criterion 3

bool lvq_closed_form(std::string& detail) {
  Rng rng(99);
  for (int trial = 0; trial < 10000; ++trial) {
    const int k = static_cast<int>(rng.uniform_int(1, 4));
    std::set<double> distinct;
    while (static_cast<int>(distinct.size()) < k) distinct.insert(100.0 * rng.uniform01());
    ClusterModel m;
    m.centers.assign(distinct.rbegin(), distinct.rend());
    m.k = k;
    m.trained = true;
    const double u = 120.0 * rng.uniform01() - 10.0;
    const double alpha = rng.uniform01();

    std::vector<double> expect = m.centers;
    const int target = rank_of(m, u) - 1;
    expect[target] += alpha * (u - expect[target]);
    std::sort(expect.rbegin(), expect.rend());

    lvq_update(m, u, alpha);
    for (int i = 0; i < k; ++i) {
      if (std::fabs(m.centers[i] - expect[i]) > 1e-12) {
        detail = "trial " + std::to_string(trial) + ": center off by " +
                 std::to_string(m.centers[i] - expect[i]);
        return false;
      }
    }
  }
  detail = "10000 triples";
  return true;
}

// ---------------------------------------------------------------- criterion 4

const Strategy kAllStrategies[] = {
    Strategy::Epidemic, Strategy::Cnr,     Strategy::Abs,      Strategy::Df,
    Strategy::Coord,    Strategy::CbrCnr,  Strategy::CbrDf,    Strategy::CbrCoord,
    Strategy::C2brCnr,  Strategy::C2brDf,  Strategy::C2brCoord, Strategy::SimbetSpray,
};

bool epidemic_dominance(std::string& detail) {
  for (int t = 0; t < 50; ++t) {
    SyntheticParams p;
    p.n_nodes = 30;
    p.n_communities = 3;
    p.duration = 3 * 86400;
    p.seed = 1000 + static_cast<std::uint64_t>(t);
    const ContactTrace trace = generate_synthetic(p);

    RunConfig base;
    base.traffic.n_packets = 60;
    base.traffic.seed = 500 + static_cast<std::uint64_t>(t);
    const Seconds ttl = static_cast<Seconds>(std::llround(trace.duration * base.traffic.ttl_frac));

    RunConfig epi = base;
    epi.strategy = Strategy::Epidemic;
    const RunResult er = run(trace, epi);
    for (const auto& pk : er.packets) {
      const GeneratedPacket g{pk.src, pk.dst, pk.t_gen};
      if (pk.delivered != oracle::reachable(trace, g, ttl)) {
        detail = "trace " + std::to_string(t) + ": epidemic disagrees with the path oracle";
        return false;
      }
    }

    for (Strategy s : kAllStrategies) {
      if (s == Strategy::Epidemic) continue;
      RunConfig cfg = base;
      cfg.strategy = s;
      if (needs_simbet(s)) cfg.utility = UtilityKind::SimBet;
      const RunResult r = run(trace, cfg);
      if (r.transmissions > er.transmissions) {
        detail = std::string("trace ") + std::to_string(t) + ": " + to_name(s) +
                 " sent more than epidemic";
        return false;
      }
      for (std::size_t i = 0; i < r.packets.size(); ++i) {
        if (r.packets[i].delivered && !er.packets[i].delivered) {
          detail = std::string("trace ") + std::to_string(t) + ": " + to_name(s) +
                   " delivered a packet epidemic missed";
          return false;
        }
      }
    }
  }
  detail = "50 traces x 11 strategies";
  return true;
}

// ---------------------------------------------------------------- criterion 5

bool untrained_equivalence(std::string& detail) {
  const std::pair<Strategy, Strategy> pairs[] = {
      {Strategy::Cnr, Strategy::CbrCnr},
      {Strategy::Df, Strategy::CbrDf},
      {Strategy::Coord, Strategy::CbrCoord},
  };
  for (int t = 0; t < 10; ++t) {
    SyntheticParams p;
    p.n_nodes = 30;
    p.n_communities = 3;
    p.duration = 6 * 86400;
    p.seed = 2000 + static_cast<std::uint64_t>(t);
    const ContactTrace trace = generate_synthetic(p);
    for (const auto& [plain, gated] : pairs) {
      RunConfig cfg;
      cfg.traffic.n_packets = 500;
      cfg.traffic.seed = 600 + static_cast<std::uint64_t>(t);
      cfg.strategy = plain;
      const RunResult a = run(trace, cfg);
      cfg.strategy = gated;
      cfg.clustering.n_tr = INT_MAX;  // the model never trains
      const RunResult b = run(trace, cfg);
      if (!(a == b)) {
        detail = std::string("trace ") + std::to_string(t) + ": " + to_name(gated) +
                 " with infinite training differs from " + to_name(plain);
        return false;
      }
    }
  }
  detail = "10 traces x 3 pairs, bit-for-bit";
  return true;
}

// ---------------------------------------------------------------- criterion 6

ExperimentConfig experiment_from(const std::string& text) {
  return parse_experiment(ConfigDoc::parse(text));
}

const AggRow& row_labeled(const std::vector<AggRow>& rows, const std::string& label) {
  for (const auto& r : rows) {
    if (r.label == label) return r;
  }
  throw std::runtime_error("missing result row: " + label);
}

bool gated_gain(std::string& detail) {
  const ExperimentConfig exp = experiment_from(
      "strategy = cnr,df,coord,cbr-cnr,cbr-df,cbr-coord\n"
      "utility = destenc,enc,lts,prophet\n"
      "traffic.packets = 4000\n"
      "repetitions = 20\n"
      "seed = 7\n");
  const ContactTrace trace = load_experiment_trace(exp);
  const auto rows = run_experiment(trace, exp);

  double min_gain = 1e9;
  double max_delta = 0.0;
  for (const char* util : {"destenc", "enc", "lts", "prophet"}) {
    for (const char* strat : {"cnr", "df", "coord"}) {
      const AggRow& base = row_labeled(rows, std::string(strat) + "/" + util);
      const AggRow& gated = row_labeled(rows, std::string("cbr-") + strat + "/" + util);
      const double gain = routing_gain(base.cost, gated.cost);
      const double delta = std::fabs(gated.delivery_ratio - base.delivery_ratio);
      min_gain = std::min(min_gain, gain);
      max_delta = std::max(max_delta, delta);
      if (!(gain > 10.0) || !(delta <= 0.05)) {
        detail = std::string(strat) + "/" + util + ": " + fmt("gain %.1f%%, |ddelivery| %.3f", gain, delta);
        return false;
      }
    }
  }
  detail = fmt("min gain %.1f%%, max |ddelivery| %.3f", min_gain, max_delta);
  return true;
}

// ---------------------------------------------------------------- criterion 7

bool real_trace_check(std::string& detail, const std::string& path) {
  ExperimentConfig exp = experiment_from(
      "strategy = cnr,cbr-cnr\n"
      "utility = destenc,enc,lts,prophet,spm,lastcontact\n"
      "repetitions = 5\n"
      "seed = 7\n");
  exp.trace = path;
  const ContactTrace trace = load_experiment_trace(exp);
  const auto rows = run_experiment(trace, exp);
  double min_gain = 1e9;
  double min_delta = 1e9;
  for (const char* util : {"destenc", "enc", "lts", "prophet", "spm", "lastcontact"}) {
    const AggRow& base = row_labeled(rows, std::string("cnr/") + util);
    const AggRow& gated = row_labeled(rows, std::string("cbr-cnr/") + util);
    const double gain = routing_gain(base.cost, gated.cost);
    const double delta = gated.delivery_ratio - base.delivery_ratio;
    min_gain = std::min(min_gain, gain);
    min_delta = std::min(min_delta, delta);
    if (!(gain > 0.0) || !(delta >= -0.03)) {
      detail = std::string(util) + ": " + fmt("gain %.1f%%, ddelivery %.3f", gain, delta);
      return false;
    }
  }
  detail = fmt("min gain %.1f%%, min ddelivery %.3f", min_gain, min_delta);
  return true;
}

// ---------------------------------------------------------------- criterion 8

bool stopping_overhead(std::string& detail) {
  const char* base_text =
      "strategy = c2br-df,c2br-coord,cnr\n"
      "utility = simbet\n"
      "repetitions = 3\n"
      "seed = 7\n";
  ExperimentConfig with_delete = experiment_from(base_text);
  ExperimentConfig ttl_only = experiment_from(base_text);
  ttl_only.base.policy = DeliveryPolicy::TtlOnly;

  const ContactTrace trace = load_experiment_trace(with_delete);
  const auto rows_del = run_experiment(trace, with_delete);
  const auto rows_ttl = run_experiment(trace, ttl_only);

  auto increase = [&](const char* label) {
    const double a = row_labeled(rows_del, label).transmissions;
    const double b = row_labeled(rows_ttl, label).transmissions;
    return 100.0 * (b / a - 1.0);
  };
  const double df_up = increase("c2br-df");
  const double coord_up = increase("c2br-coord");
  const double cnr_up = increase("cnr");
  detail = fmt("c2br-df +%.1f%%, c2br-coord +%.1f%%", df_up, coord_up) +
           fmt(", cnr +%.1f%%", cnr_up);
  return df_up < 25.0 && coord_up < 25.0 && cnr_up > 50.0;
}

// ---------------------------------------------------------------- criterion 9

bool update_method_parity(std::string& detail) {
  const ExperimentConfig std_exp = experiment_from("");  // standard community trace
  const ContactTrace trace = load_experiment_trace(std_exp);

  RunConfig cfg = std_exp.base;
  cfg.traffic.n_packets = 4000;
  cfg.utility = UtilityKind::Prophet;
  const int reps = 5;

  auto mean_cost = [&](RunConfig c) {
    std::vector<RunResult> results;
    for (int r = 0; r < reps; ++r) {
      c.traffic.seed = rep_seed(7, r);
      results.push_back(run(trace, c));
    }
    return aggregate("x", results).cost;
  };

  cfg.strategy = Strategy::Df;
  const double base_cost = mean_cost(cfg);

  cfg.strategy = Strategy::CbrDf;
  std::vector<double> gains;
  for (UpdateMethod m : {UpdateMethod::Lvq, UpdateMethod::Periodic, UpdateMethod::Weighted}) {
    cfg.clustering.update = m;
    cfg.clustering.t_p = 50;
    cfg.clustering.window = 50;
    cfg.clustering.decay = 400.0;
    gains.push_back(routing_gain(base_cost, mean_cost(cfg)));
  }
  const double spread = *std::max_element(gains.begin(), gains.end()) -
                        *std::min_element(gains.begin(), gains.end());
  detail = fmt("lvq %.1f%%, periodic %.1f%%", gains[0], gains[1]) +
           fmt(", weighted %.1f%%, spread %.1f points", gains[2], spread);
  return spread <= 5.0;
}

// --------------------------------------------------------------- criterion 10

bool determinism(std::string& detail) {
  const char* text =
      "strategy = epidemic,cbr-df,c2br-coord,simbet-spray\n"
      "utility = prophet\n"
      "repetitions = 3\n"
      "seed = 11\n";
  const ExperimentConfig exp = experiment_from(text);
  const ContactTrace trace = load_experiment_trace(exp);
  const std::string a = to_csv(run_experiment(trace, exp, 1));
  const std::string b = to_csv(run_experiment(trace, exp, 4));
  if (a != b) {
    detail = "csv output differs between repeated runs";
    return false;
  }
  detail = std::to_string(a.size()) + " identical bytes";
  return true;
}

}  // namespace

int main() {
  criterion(1, "hand-derived decision tables", golden_tables);
  criterion(2, "clustering matches exhaustive and DP oracles", clustering_oracle);
  criterion(3, "lvq update matches the closed form", lvq_closed_form);
  criterion(4, "epidemic equals the path oracle and dominates", epidemic_dominance);
  criterion(5, "never-trained gating reproduces the baselines", untrained_equivalence);
  criterion(6, "cluster gating cuts cost >10% at stable delivery", gated_gain);

  const char* real = std::getenv("CBRSIM_REAL_TRACE");
  if (real == nullptr || !std::ifstream(real).good()) {
    report_skip(7, "real-trace gating check", "set CBRSIM_REAL_TRACE to a trace file to enable");
  } else {
    const std::string path = real;
    criterion(7, "real-trace gating check",
              [&](std::string& d) { return real_trace_check(d, path); });
  }

  criterion(8, "two-utility stopping keeps ttl-only overhead low", stopping_overhead);
  criterion(9, "cluster update methods perform alike", update_method_parity);
  criterion(10, "repeated runs are byte-identical", determinism);

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
