#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cbrsim {

using NodeId = int;
using Seconds = std::int64_t;

struct TraceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Undirected contact; canonical form has a < b.
struct ContactEvent {
  NodeId a = 0;
  NodeId b = 0;
  Seconds start = 0;
  Seconds end = 0;
  friend bool operator==(const ContactEvent&, const ContactEvent&) = default;
};

enum class TraceFormat { Auto, PairInterval, PairStartDuration };

struct Presence {
  Seconds first_seen = 0;
  Seconds last_seen = 0;
  friend bool operator==(const Presence&, const Presence&) = default;
};

// Normalized contact trace: events sorted by (start, a, b), per-pair overlaps
// merged, node ids remapped to a dense 0..N-1 range.
struct ContactTrace {
  std::vector<ContactEvent> events;
  int node_count = 0;
  Seconds duration = 0;                       // max event end
  std::vector<long long> original_ids;        // dense id -> original id
  std::vector<std::optional<Presence>> presence;
  friend bool operator==(const ContactTrace&, const ContactTrace&) = default;
};

ContactTrace parse_trace(std::istream& in, TraceFormat format = TraceFormat::Auto);
ContactTrace load_trace(const std::string& path, TraceFormat format = TraceFormat::Auto);

// One event per line, original ids, pair-interval layout.
void write_trace(const ContactTrace& trace, std::ostream& out);

// (first_seen, last_seen) for v; throws TraceError for nodes without events.
std::pair<Seconds, Seconds> presence_window(const ContactTrace& trace, NodeId v);

struct SyntheticParams {
  int n_nodes = 30;
  int n_communities = 3;
  Seconds duration = 0;
  double intra_rate = 10.0;  // contacts per node pair per day
  double inter_rate = 0.5;   // contacts per node pair per day
  double mean_contact_len = 120.0;  // seconds
  // Per-node activity multipliers assigned round-robin by node id; a pair's
  // contact rate is scaled by the product of the two nodes' multipliers.
  // {1.0} keeps every node equally active.
  std::vector<double> activity = {1.0};
  std::uint64_t seed = 1;
};

// Poisson-scheduled pairwise contacts, exponential contact lengths.
// Deterministic for a fixed seed.
ContactTrace generate_synthetic(const SyntheticParams& params);

int community_of(int node, int n_nodes, int n_communities);

}  // namespace cbrsim
