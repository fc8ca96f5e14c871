#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cbrsim/clustering.hpp"
#include "cbrsim/config.hpp"
#include "cbrsim/experiment.hpp"
#include "cbrsim/metrics.hpp"
#include "cbrsim/trace.hpp"

namespace {

using namespace cbrsim;

std::string resolve_config(const std::string& path) {
  if (path.empty()) return "";
  if (std::filesystem::exists(path)) return path;
  if (!std::filesystem::path(path).is_absolute()) {
    if (const char* dir = std::getenv("CBRSIM_CONFIG_DIR")) {
      const auto candidate = std::filesystem::path(dir) / path;
      if (std::filesystem::exists(candidate)) return candidate.string();
    }
  }
  throw ConfigError("config file not found: " + path);
}

struct GlobalOpts {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value pairs
  std::string out;
  std::string format;
  long long seed = -1;
  int jobs = 1;
  bool dry_run = false;
  bool print_config = false;
};

ConfigDoc build_doc(const GlobalOpts& g) {
  ConfigDoc doc;
  const std::string resolved = resolve_config(g.config_path);
  if (!resolved.empty()) doc = ConfigDoc::load(resolved);
  for (const std::string& kv : g.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override needs key=value: " + kv);
    doc.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (g.seed >= 0) doc.set("seed", std::to_string(g.seed));
  if (!g.format.empty()) doc.set("format", g.format);
  if (!g.out.empty()) doc.set("out", g.out);
  return doc;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + out_path);
  out << text;
}

void print_effective(const ConfigDoc& doc) {
  for (const auto& [key, value] : doc.entries()) {
    std::cout << key << " = " << value << "\n";
  }
}

int do_run(const GlobalOpts& g) {
  const ConfigDoc doc = build_doc(g);
  if (g.print_config) print_effective(doc);
  const ExperimentConfig exp = parse_experiment(doc);
  for (const std::string& key : doc.unread_keys()) {
    std::cerr << "warning: unknown config key: " << key << "\n";
  }
  const auto cells = expand_cells(exp);
  if (g.dry_run) {
    for (const auto& cell : cells) {
      std::cout << cell.label << " x" << exp.repetitions << "\n";
    }
    return 0;
  }
  const ContactTrace trace = load_experiment_trace(exp);
  const auto rows = run_experiment(trace, exp, g.jobs);
  emit(exp.output_format == "csv" ? to_csv(rows) : to_table(rows), exp.out);
  return 0;
}

int do_sweep(const GlobalOpts& g, const std::string& axis, const std::string& values) {
  GlobalOpts local = g;
  std::string key;
  if (axis == "buffer") {
    key = "buffer";
  } else if (axis == "ttl") {
    key = "ttl";
  } else if (axis == "strategy") {
    key = "strategy";
  } else if (axis == "utility") {
    key = "utility";
  } else {
    throw ConfigError("unknown sweep axis: " + axis);
  }
  local.overrides.insert(local.overrides.begin(), key + "=" + values);
  return do_run(local);
}

int do_inspect_clusters(const GlobalOpts& g, int node, int dest, int samples) {
  const ConfigDoc doc = build_doc(g);
  if (g.print_config) print_effective(doc);
  ExperimentConfig exp = parse_experiment(doc);
  const ContactTrace trace = load_experiment_trace(exp);
  if (node < 0 || node >= trace.node_count) throw ConfigError("observer node outside the trace");

  // Replay with plain utility replication, recording samples as the
  // cluster-based flavors would see them.
  RunConfig cfg = exp.base;
  cfg.strategy = Strategy::Cnr;
  cfg.utility = exp.utilities.front();
  cfg.buffer_capacity = exp.buffers.front();
  cfg.traffic.ttl_frac = exp.ttl_fracs.front();
  cfg.force_sample_recording = true;
  cfg.traffic.seed = rep_seed(exp.seed, 0);
  if (g.dry_run) {
    std::cout << "would replay " << to_name(cfg.strategy) << "/" << to_name(cfg.utility)
              << " and inspect node " << node << "\n";
    return 0;
  }

  Simulator sim(trace, cfg);
  sim.run();
  const NodeId d = dest_dependent(cfg.utility) ? dest : UtilityState::kNoDest;
  if (d != UtilityState::kNoDest && (d < 0 || d >= trace.node_count)) {
    throw ConfigError("destination outside the trace");
  }
  const ClusterTracker* tracker = sim.tracker(node, d);
  if (!tracker || tracker->sample_count() == 0) {
    std::cerr << "no samples recorded for this node/destination\n";
    return 1;
  }
  std::vector<double> values = tracker->values();
  if (samples > 0 && static_cast<std::size_t>(samples) < values.size()) {
    values.resize(samples);
  }
  std::ostringstream out;
  out << "samples: " << values.size() << " (of " << tracker->sample_count() << " recorded)\n";
  if (values.size() < 2) {
    out << "not enough samples to fit a model\n";
    emit(out.str(), exp.out);
    return 0;
  }
  const ClusterModel model = fit_model(values, cfg.clustering.k_max);
  out << "k: " << model.k << (model.degenerate ? " (degenerate)" : "") << "\n";
  out << "silhouette: " << model.silhouette << "\n";
  out << "centers:";
  for (double c : model.centers) out << " " << c;
  out << "\n";
  out << "index\tvalue\trank\n";
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << i << "\t" << values[i] << "\t" << rank_of(model, values[i]) << "\n";
  }
  emit(out.str(), exp.out);
  return 0;
}

int do_gen_trace(const SyntheticParams& params, double days, const std::string& out_path) {
  SyntheticParams p = params;
  p.duration = static_cast<Seconds>(std::llround(days * 86400.0));
  const ContactTrace trace = generate_synthetic(p);
  std::ostringstream buf;
  write_trace(trace, buf);
  emit(buf.str(), out_path);
  std::cerr << "nodes: " << trace.node_count << ", events: " << trace.events.size()
            << ", duration: " << trace.duration << "s\n";
  return 0;
}

int do_validate_trace(const std::string& path, const std::string& format_name) {
  TraceFormat fmt = TraceFormat::Auto;
  if (format_name == "pair-interval") fmt = TraceFormat::PairInterval;
  else if (format_name == "pair-start-duration") fmt = TraceFormat::PairStartDuration;
  else if (!format_name.empty() && format_name != "auto") {
    throw ConfigError("unknown trace format: " + format_name);
  }
  const ContactTrace trace = load_trace(path, fmt);
  std::cout << "ok: " << trace.node_count << " nodes, " << trace.events.size() << " contacts, "
            << trace.duration << "s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Contact-trace simulator for utility-based replication protocols"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config,-c", g.config_path,
                 "Config file (also searched in $CBRSIM_CONFIG_DIR)");
  app.add_option("--set", g.overrides, "Override a config key (key=value)");
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--jobs,-j", g.jobs, "Worker threads (results are identical for any value)")
      ->check(CLI::PositiveNumber);
  app.add_option("--format", g.format, "Output format: table or csv");
  app.add_option("--out,-o", g.out, "Output file (default stdout)");
  app.add_flag("--dry-run", g.dry_run, "Show what would run, without running");
  app.add_flag("--print-effective-config", g.print_config, "Print the merged config");

  app.add_subcommand("run", "Run the experiment described by the config")->fallthrough();

  auto* sweep = app.add_subcommand("sweep", "Sweep one axis over a list of values");
  sweep->fallthrough();
  std::string axis, values;
  sweep->add_option("--axis", axis, "buffer, ttl, strategy or utility")->required();
  sweep->add_option("--values", values, "Comma-separated values for the axis")->required();

  auto* inspect = app.add_subcommand("inspect-clusters",
                                     "Replay a run and show one node's utility cluster model");
  inspect->fallthrough();
  int node = 0, dest = -1, samples = 0;
  inspect->add_option("--node", node, "Observer node id")->required();
  inspect->add_option("--dest", dest, "Destination (required for per-destination utilities)");
  inspect->add_option("--samples", samples, "Fit on the first N samples only");

  auto* gen = app.add_subcommand("gen-trace", "Generate a synthetic community-structured trace");
  gen->fallthrough();
  SyntheticParams sp;
  double days = 18.0;
  long long gen_seed = 1;
  gen->add_option("--nodes", sp.n_nodes, "Node count");
  gen->add_option("--communities", sp.n_communities, "Community count");
  gen->add_option("--days", days, "Trace length in days");
  gen->add_option("--intra", sp.intra_rate, "Contacts per intra-community pair per day");
  gen->add_option("--inter", sp.inter_rate, "Contacts per inter-community pair per day");
  gen->add_option("--contact-len", sp.mean_contact_len, "Mean contact length, seconds");
  gen->add_option("--trace-seed", gen_seed, "Trace generation seed");

  auto* validate = app.add_subcommand("validate-trace", "Parse a trace file and report summary");
  validate->fallthrough();
  std::string trace_path, trace_format;
  validate->add_option("file", trace_path, "Trace file")->required();
  validate->add_option("--trace-format", trace_format, "auto, pair-interval or pair-start-duration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("run")) return do_run(g);
    if (app.got_subcommand("sweep")) return do_sweep(g, axis, values);
    if (app.got_subcommand("inspect-clusters")) return do_inspect_clusters(g, node, dest, samples);
    if (app.got_subcommand("gen-trace")) {
      sp.seed = static_cast<std::uint64_t>(gen_seed);
      if (g.seed >= 0) sp.seed = static_cast<std::uint64_t>(g.seed);
      return do_gen_trace(sp, days, g.out);
    }
    if (app.got_subcommand("validate-trace")) return do_validate_trace(trace_path, trace_format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
