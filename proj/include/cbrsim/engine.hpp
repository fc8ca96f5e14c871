#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "cbrsim/clustering.hpp"
#include "cbrsim/strategy.hpp"
#include "cbrsim/trace.hpp"
#include "cbrsim/utility.hpp"

namespace cbrsim {

struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrafficModel {
  int n_packets = 1000;
  std::uint64_t seed = 1;
  double warmup_frac = 0.2;
  double cooldown_frac = 0.2;
  double ttl_frac = 0.2;  // fraction of trace duration
};

struct GeneratedPacket {
  NodeId src = 0;
  NodeId dst = 0;
  Seconds t_gen = 0;
  friend bool operator==(const GeneratedPacket&, const GeneratedPacket&) = default;
};

// Uniform src/dst pairs with generation time uniform over the overlap of
// both presence windows and the steady-state period. Deterministic per seed.
std::vector<GeneratedPacket> schedule_traffic(const ContactTrace& trace, const TrafficModel& tm);

enum class DeliveryPolicy { OracleDelete, TtlOnly };

struct RunConfig {
  Strategy strategy = Strategy::Epidemic;
  UtilityKind utility = UtilityKind::Prophet;
  double u_th = 0.0;
  double simbet_weight = 0.5;
  int spray_copies = 8;
  int hop_limit = 0;  // 0 = unlimited; applies to simbet-spray
  ProphetParams prophet;
  ClusteringConfig clustering;
  TrafficModel traffic;
  long buffer_capacity = -1;  // relay copies per node, -1 = unlimited
  DeliveryPolicy policy = DeliveryPolicy::OracleDelete;
  bool force_sample_recording = false;  // record utility samples for any strategy
  std::vector<GeneratedPacket> explicit_packets;  // overrides the traffic model if non-empty
};

struct PacketOutcome {
  NodeId src = 0;
  NodeId dst = 0;
  Seconds t_gen = 0;
  bool delivered = false;
  Seconds delay = 0;
  int replicas = 0;  // copies created beyond the source copy
  friend bool operator==(const PacketOutcome&, const PacketOutcome&) = default;
};

struct RunResult {
  long generated = 0;
  long delivered = 0;
  long transmissions = 0;
  long drops = 0;
  long replications = 0;
  long direct_deliveries = 0;
  long spray_transfers = 0;
  long forwards_during_training = 0;
  double total_delay = 0.0;
  std::vector<PacketOutcome> packets;
  friend bool operator==(const RunResult&, const RunResult&) = default;

  double delivery_ratio() const {
    return generated > 0 ? static_cast<double>(delivered) / static_cast<double>(generated) : 0.0;
  }
  bool cost_defined() const { return delivered > 0; }
  double cost() const { return static_cast<double>(transmissions) / static_cast<double>(delivered); }
  double mean_delay() const { return total_delay / static_cast<double>(delivered); }
};

// Single deterministic simulation run over one contact trace.
class Simulator {
 public:
  Simulator(const ContactTrace& trace, RunConfig cfg);
  RunResult run();

  // Post-run introspection.
  const ClusterTracker* tracker(NodeId v, NodeId dest = UtilityState::kNoDest) const;
  std::size_t sample_count(NodeId v, NodeId dest = UtilityState::kNoDest) const;
  bool holds_delivered_copies() const;
  const UtilityState& utility_state(NodeId v) const { return states_[v]; }

 private:
  struct Copy {
    Seconds received = 0;
    bool rep = false;
    double tau = 0.0;
    double tau_s = 0.0;
    double tau_b = 0.0;
    int copies_left = 0;
    int hops = 0;
    bool sourced = false;
  };

  struct PacketInfo {
    NodeId src = 0;
    NodeId dst = 0;
    Seconds t_gen = 0;
    bool delivered = false;
    Seconds delivered_at = 0;
    int replicas = 0;
    std::vector<char> at;  // per node: copy present (or delivered, at dst)
  };

  void inject(int id, const GeneratedPacket& g);
  void expire(int id);
  void remove_all_copies(int id);
  void deliver_to_peer(NodeId carrier, NodeId peer, Seconds t);
  void record_samples(NodeId observer, NodeId peer, Seconds t);
  void decide_and_transfer(NodeId carrier, NodeId peer, Seconds t);
  bool admit_copy(NodeId node, int id, const Copy& copy);
  ClusterTracker& primary_tracker(NodeId v, NodeId dest);
  const ClusterModel* trained_model(NodeId v, NodeId dest) const;
  const ClusterModel* trained_di_model(NodeId v) const;

  const ContactTrace& trace_;
  RunConfig cfg_;
  Seconds ttl_ = 0;
  bool recording_ = false;
  bool social_ = false;  // strategy consumes similarity/betweenness pair
  std::vector<UtilityState> states_;
  std::vector<std::map<int, Copy>> held_;
  std::vector<long> relay_count_;
  std::vector<PacketInfo> packets_;
  std::vector<std::map<NodeId, ClusterTracker>> dd_trackers_;
  std::vector<ClusterTracker> di_trackers_;
  RunResult result_;
  bool ran_ = false;
};

RunResult run(const ContactTrace& trace, const RunConfig& cfg);

}  // namespace cbrsim
