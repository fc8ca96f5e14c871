#pragma once

#include <optional>
#include <string>

namespace cbrsim {

enum class Strategy {
  Epidemic,
  Cnr,
  Abs,
  Df,
  Coord,
  CbrCnr,
  CbrDf,
  CbrCoord,
  C2brCnr,
  C2brDf,
  C2brCoord,
  SimbetSpray,
};

Strategy strategy_from_name(const std::string& name);
const char* to_name(Strategy s);
bool uses_clustering(Strategy s);   // any cbr/c2br flavor
bool is_c2br(Strategy s);
bool needs_simbet(Strategy s);      // c2br flavors and simbet-spray

// Everything a per-contact replication decision can look at. Rank fields are
// set only when the corresponding cluster model is trained; decision
// functions fall back to their base criterion when they are absent.
struct DecisionInput {
  double u_v = 0.0;  // carrier utility for the packet's destination
  double u_u = 0.0;  // encountered node's utility
  double u_th = 0.0;
  std::optional<int> r_v, r_u, r_t;
  std::optional<double> tau;                 // carrier's delegation threshold
  // Smallest threshold value ranking strictly better than u_u's cluster
  // (the boundary toward the next-ranked cluster); absent when u_u is top.
  // A same-cluster relaxed forward raises tau to this value so the
  // relaxation switches off once per cluster level.
  std::optional<double> bump_tau;
  bool rep = false;                          // carrier already replicated this packet
  bool peer_has_packet = false;
  std::optional<double> peer_tau;

  // Two-utility (similarity/betweenness) fields.
  double s_v = 0.0, s_u = 0.0, b_v = 0.0, b_u = 0.0;
  std::optional<int> r_v_s, r_u_s, r_t_s, r_v_b, r_u_b, r_t_b;
  std::optional<double> bump_tau_b;  // bump_tau analogue for the betweenness model
  std::optional<double> tau_s, tau_b;
  std::optional<double> peer_tau_s, peer_tau_b;
};

struct Decision {
  bool forward = false;
  bool set_rep = false;  // carrier's rep flag transitions to true
  std::optional<double> new_tau, new_tau_s, new_tau_b;  // carrier threshold updates
  int copies_given = 0;  // spray transfer size
  friend bool operator==(const Decision&, const Decision&) = default;
};

Decision epidemic_decide(bool peer_has_packet);
Decision cnr_decide(const DecisionInput& in);
Decision abs_threshold_decide(const DecisionInput& in);
Decision df_decide(const DecisionInput& in);
Decision coord_decide(const DecisionInput& in);
Decision cbr_cnr_decide(const DecisionInput& in);
Decision cbr_df_decide(const DecisionInput& in);
Decision cbr_coord_decide(const DecisionInput& in);
Decision c2br_cnr_decide(const DecisionInput& in);
Decision c2br_df_decide(const DecisionInput& in);
Decision c2br_coord_decide(const DecisionInput& in);
// u_v/u_u carry the pairwise-normalized simbet values of carrier and peer.
Decision simbet_spray_decide(const DecisionInput& in, int copies_left);

Decision decide(Strategy s, const DecisionInput& in, int copies_left = 0);

}  // namespace cbrsim
