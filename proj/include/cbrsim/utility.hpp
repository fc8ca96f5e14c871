#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cbrsim/trace.hpp"

namespace cbrsim {

enum class UtilityKind {
  DestEnc,
  Enc,
  Lts,
  Prophet,
  Spm,
  LastContact,
  Similarity,
  EgoBetweenness,
  SimBet,
};

bool dest_dependent(UtilityKind kind);
UtilityKind utility_from_name(const std::string& name);
const char* to_name(UtilityKind kind);

struct ProphetParams {
  double p_init = 0.75;
  double beta = 0.25;
  double gamma = 0.98;
  Seconds quantum = 1;  // aging time quantum, seconds
};

// Per-node contact-history state. Mutated only through on_contact; all value
// reads are pure (aging is applied on read).
class UtilityState {
 public:
  static constexpr NodeId kNoDest = -1;

  UtilityState() = default;
  explicit UtilityState(NodeId owner, ProphetParams prophet = {})
      : owner_(owner), prophet_params_(prophet) {}

  // Records a contact with u at time t. neighbors_of_u and peer_prophet are
  // the neighbor list and delivery-probability vector announced by u.
  void on_contact(NodeId u, Seconds t, const std::vector<NodeId>& neighbors_of_u,
                  const std::map<NodeId, double>& peer_prophet);

  double value(UtilityKind kind, Seconds now, NodeId dest = kNoDest) const;

  double similarity(NodeId dest) const;
  double ego_betweenness() const;

  std::vector<NodeId> neighbor_list() const;
  std::map<NodeId, double> prophet_snapshot(Seconds now) const;
  long total_contacts() const { return total_; }
  long contact_count(NodeId u) const;

 private:
  double prophet_value(NodeId dest, Seconds now) const;
  bool has_edge(NodeId x, NodeId y) const;

  NodeId owner_ = -1;
  ProphetParams prophet_params_;
  std::map<NodeId, long> contact_counts_;
  long total_ = 0;
  std::map<NodeId, Seconds> last_contact_;
  Seconds last_any_ = -1;
  std::map<NodeId, double> prophet_;
  Seconds prophet_age_time_ = 0;
  std::map<NodeId, double> spm_integral_;  // integrated wait up to last encounter
  std::set<std::pair<NodeId, NodeId>> edges_;  // canonical (min,max), owner's ego knowledge
  Seconds last_event_ = -1;
  mutable bool bet_dirty_ = true;
  mutable double bet_cache_ = 0.0;
};

// Pairwise-normalized weighted sum of similarity and betweenness.
// A 0/0 normalization term counts as 0.5. Returns (simbet_v, simbet_u).
std::pair<double, double> simbet_combine(double sim_v, double bet_v, double sim_u, double bet_u,
                                         double w);

}  // namespace cbrsim
