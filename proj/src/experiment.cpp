#include "cbrsim/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

#include "cbrsim/rng.hpp"

namespace cbrsim {

namespace {

TraceFormat format_from_name(const std::string& name) {
  if (name == "auto") return TraceFormat::Auto;
  if (name == "pair-interval") return TraceFormat::PairInterval;
  if (name == "pair-start-duration") return TraceFormat::PairStartDuration;
  throw ConfigError("unknown trace format: " + name);
}

long parse_buffer(const std::string& s) {
  if (s == "inf" || s == "unlimited") return -1;
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos != s.size() || v < 0) throw ConfigError("");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid buffer capacity: " + s);
  }
}

}  // namespace

ExperimentConfig parse_experiment(const ConfigDoc& doc) {
  ExperimentConfig exp;
  exp.trace = doc.get_string("trace", "synthetic");
  exp.trace_format = format_from_name(doc.get_string("trace.format", "auto"));

  exp.synthetic.n_nodes = static_cast<int>(doc.get_int("trace.nodes", 30));
  exp.synthetic.n_communities = static_cast<int>(doc.get_int("trace.communities", 3));
  exp.synthetic.duration = static_cast<Seconds>(
      std::llround(doc.get_double("trace.days", 18.0) * 86400.0));
  exp.synthetic.intra_rate = doc.get_double("trace.intra", 10.0);
  exp.synthetic.inter_rate = doc.get_double("trace.inter", 0.5);
  exp.synthetic.mean_contact_len = doc.get_double("trace.contact_len", 120.0);
  const auto activity = doc.get_list("trace.activity");
  if (!activity.empty()) {
    exp.synthetic.activity.clear();
    for (const auto& s : activity) {
      try {
        exp.synthetic.activity.push_back(std::stod(s));
      } catch (const std::exception&) {
        throw ConfigError("invalid activity multiplier: " + s);
      }
    }
  } else {
    exp.synthetic.activity = {0.6, 1.0, 2.0, 6.0};
  }
  exp.synthetic.seed = static_cast<std::uint64_t>(doc.get_int("trace.seed", 1));

  for (const auto& name : doc.get_list("strategy")) {
    exp.strategies.push_back(strategy_from_name(name));
  }
  if (exp.strategies.empty()) exp.strategies.push_back(Strategy::Epidemic);
  for (const auto& name : doc.get_list("utility")) {
    exp.utilities.push_back(utility_from_name(name));
  }
  if (exp.utilities.empty()) exp.utilities.push_back(UtilityKind::Prophet);
  for (const auto& s : doc.get_list("buffer")) exp.buffers.push_back(parse_buffer(s));
  if (exp.buffers.empty()) exp.buffers.push_back(-1);
  for (const auto& s : doc.get_list("ttl")) {
    try {
      exp.ttl_fracs.push_back(std::stod(s));
    } catch (const std::exception&) {
      throw ConfigError("invalid ttl fraction: " + s);
    }
  }
  if (exp.ttl_fracs.empty()) exp.ttl_fracs.push_back(0.2);

  RunConfig& base = exp.base;
  base.u_th = doc.get_double("u_th", 0.0);
  base.simbet_weight = doc.get_double("simbet.weight", 0.5);
  base.spray_copies = static_cast<int>(doc.get_int("spray.copies", 8));
  base.hop_limit = static_cast<int>(doc.get_int("hop_limit", 0));
  base.prophet.p_init = doc.get_double("prophet.p_init", 0.75);
  base.prophet.beta = doc.get_double("prophet.beta", 0.25);
  base.prophet.gamma = doc.get_double("prophet.gamma", 0.98);
  base.clustering.update = update_method_from_name(doc.get_string("clustering.update", "lvq"));
  base.clustering.alpha = doc.get_double("clustering.alpha", 0.05);
  base.clustering.n_tr = static_cast<int>(doc.get_int("clustering.n_tr", 50));
  base.clustering.k_max = static_cast<int>(doc.get_int("clustering.k_max", 4));
  base.clustering.t_p = static_cast<int>(doc.get_int("clustering.t_p", 50));
  base.clustering.window = static_cast<int>(doc.get_int("clustering.w", 50));
  base.clustering.decay = doc.get_double("clustering.r", 400.0);
  base.traffic.n_packets = static_cast<int>(doc.get_int("traffic.packets", 1000));
  base.traffic.warmup_frac = doc.get_double("traffic.warmup", 0.2);
  base.traffic.cooldown_frac = doc.get_double("traffic.cooldown", 0.2);
  const std::string policy = doc.get_string("policy", "oracle-delete");
  if (policy == "oracle-delete") {
    base.policy = DeliveryPolicy::OracleDelete;
  } else if (policy == "ttl-only") {
    base.policy = DeliveryPolicy::TtlOnly;
  } else {
    throw ConfigError("unknown delivery policy: " + policy);
  }

  exp.repetitions = static_cast<int>(doc.get_int("repetitions", 1));
  if (exp.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  exp.seed = static_cast<std::uint64_t>(doc.get_int("seed", 1));
  if (const auto b = doc.get("baseline")) exp.baseline = *b;
  exp.out = doc.get_string("out", "");
  exp.output_format = doc.get_string("format", "table");
  if (exp.output_format != "table" && exp.output_format != "csv") {
    throw ConfigError("unknown output format: " + exp.output_format);
  }
  return exp;
}

std::vector<ExperimentCell> expand_cells(const ExperimentConfig& exp) {
  std::vector<ExperimentCell> cells;
  for (Strategy s : exp.strategies) {
    // simbet-coupled strategies pin the utility; epidemic ignores it entirely
    std::vector<UtilityKind> utils;
    if (needs_simbet(s)) {
      utils = {UtilityKind::SimBet};
    } else if (s == Strategy::Epidemic) {
      utils = {exp.base.utility};
    } else {
      utils = exp.utilities;
    }
    for (UtilityKind u : utils) {
      for (long buf : exp.buffers) {
        for (double ttl : exp.ttl_fracs) {
          ExperimentCell cell;
          cell.cfg = exp.base;
          cell.cfg.strategy = s;
          cell.cfg.utility = u;
          cell.cfg.buffer_capacity = buf;
          cell.cfg.traffic.ttl_frac = ttl;
          cell.label = to_name(s);
          if (exp.utilities.size() > 1 && !needs_simbet(s) && s != Strategy::Epidemic) {
            cell.label += std::string("/") + to_name(u);
          }
          if (exp.buffers.size() > 1) {
            cell.label += "/buf=" + (buf < 0 ? std::string("inf") : std::to_string(buf));
          }
          if (exp.ttl_fracs.size() > 1) {
            char tbuf[32];
            std::snprintf(tbuf, sizeof(tbuf), "/ttl=%g", ttl);
            cell.label += tbuf;
          }
          cells.push_back(std::move(cell));
        }
      }
    }
  }
  return cells;
}

ContactTrace load_experiment_trace(const ExperimentConfig& exp) {
  if (exp.trace == "synthetic") return generate_synthetic(exp.synthetic);
  return load_trace(exp.trace, exp.trace_format);
}

std::uint64_t rep_seed(std::uint64_t master, int rep) {
  return mix_seed(master, static_cast<std::uint64_t>(rep) + 1);
}

std::vector<std::vector<RunResult>> run_cells(const ContactTrace& trace,
                                              const std::vector<ExperimentCell>& cells,
                                              std::uint64_t seed, int repetitions, int jobs) {
  std::vector<std::vector<RunResult>> results(cells.size());
  for (auto& reps : results) reps.resize(repetitions);

  struct Job {
    std::size_t cell;
    int rep;
  };
  std::vector<Job> queue;
  queue.reserve(cells.size() * repetitions);
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (int r = 0; r < repetitions; ++r) queue.push_back({c, r});
  }

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= queue.size() || failed.load()) break;
      const Job job = queue[i];
      RunConfig cfg = cells[job.cell].cfg;
      cfg.traffic.seed = rep_seed(seed, job.rep);
      try {
        results[job.cell][job.rep] = run(trace, cfg);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!failed.exchange(true)) error = e.what();
      }
    }
  };

  const int n_threads = std::max(1, jobs);
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw EngineError(error);
  return results;
}

std::vector<AggRow> run_experiment(const ContactTrace& trace, const ExperimentConfig& exp,
                                   int jobs) {
  const auto cells = expand_cells(exp);
  const auto results = run_cells(trace, cells, exp.seed, exp.repetitions, jobs);
  std::vector<AggRow> rows;
  rows.reserve(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    rows.push_back(aggregate(cells[i].label, results[i]));
  }
  if (exp.baseline) {
    const bool found = std::any_of(rows.begin(), rows.end(), [&](const AggRow& r) {
      return r.label == *exp.baseline;
    });
    if (found) {
      add_baseline_comparisons(rows, *exp.baseline);
    } else {
      std::fprintf(stderr, "warning: baseline '%s' not among result rows; gain columns left empty\n",
                   exp.baseline->c_str());
    }
  }
  return rows;
}

}  // namespace cbrsim
