#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cbrsim/config.hpp"
#include "cbrsim/engine.hpp"
#include "cbrsim/metrics.hpp"

namespace cbrsim {

// A comparison grid: every strategy x utility x buffer x ttl combination
// becomes one row, repeated `repetitions` times with derived seeds.
struct ExperimentConfig {
  std::string trace;  // path, or "synthetic" to generate one
  TraceFormat trace_format = TraceFormat::Auto;
  SyntheticParams synthetic;
  RunConfig base;
  std::vector<Strategy> strategies;
  std::vector<UtilityKind> utilities;
  std::vector<long> buffers;      // -1 = unlimited
  std::vector<double> ttl_fracs;
  int repetitions = 1;
  std::uint64_t seed = 1;
  std::optional<std::string> baseline;  // row label to compare against
  std::string out;                      // output path, empty = stdout
  std::string output_format = "table";  // "table" or "csv"
};

ExperimentConfig parse_experiment(const ConfigDoc& doc);

struct ExperimentCell {
  std::string label;
  RunConfig cfg;
};

// Cartesian expansion; strategies built on the pairwise simbet value always
// run with that utility regardless of the utility axis.
std::vector<ExperimentCell> expand_cells(const ExperimentConfig& exp);

ContactTrace load_experiment_trace(const ExperimentConfig& exp);

std::uint64_t rep_seed(std::uint64_t master, int rep);

// Runs every cell for every repetition (optionally across threads; results
// are identical for any jobs value) and aggregates per cell.
std::vector<AggRow> run_experiment(const ContactTrace& trace, const ExperimentConfig& exp,
                                   int jobs = 1);

// Raw per-cell results in cell-major order, reps within a cell in rep order.
std::vector<std::vector<RunResult>> run_cells(const ContactTrace& trace,
                                              const std::vector<ExperimentCell>& cells,
                                              std::uint64_t seed, int repetitions, int jobs);

}  // namespace cbrsim
