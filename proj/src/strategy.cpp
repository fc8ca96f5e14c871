#include "cbrsim/strategy.hpp"

#include <cmath>
#include <stdexcept>

namespace cbrsim {

Strategy strategy_from_name(const std::string& name) {
  if (name == "epidemic") return Strategy::Epidemic;
  if (name == "cnr") return Strategy::Cnr;
  if (name == "abs") return Strategy::Abs;
  if (name == "df") return Strategy::Df;
  if (name == "coord") return Strategy::Coord;
  if (name == "cbr-cnr") return Strategy::CbrCnr;
  if (name == "cbr-df") return Strategy::CbrDf;
  if (name == "cbr-coord") return Strategy::CbrCoord;
  if (name == "c2br-cnr") return Strategy::C2brCnr;
  if (name == "c2br-df") return Strategy::C2brDf;
  if (name == "c2br-coord") return Strategy::C2brCoord;
  if (name == "simbet-spray") return Strategy::SimbetSpray;
  throw std::invalid_argument("unknown strategy: " + name);
}

const char* to_name(Strategy s) {
  switch (s) {
    case Strategy::Epidemic: return "epidemic";
    case Strategy::Cnr: return "cnr";
    case Strategy::Abs: return "abs";
    case Strategy::Df: return "df";
    case Strategy::Coord: return "coord";
    case Strategy::CbrCnr: return "cbr-cnr";
    case Strategy::CbrDf: return "cbr-df";
    case Strategy::CbrCoord: return "cbr-coord";
    case Strategy::C2brCnr: return "c2br-cnr";
    case Strategy::C2brDf: return "c2br-df";
    case Strategy::C2brCoord: return "c2br-coord";
    case Strategy::SimbetSpray: return "simbet-spray";
  }
  return "?";
}

bool uses_clustering(Strategy s) {
  switch (s) {
    case Strategy::CbrCnr:
    case Strategy::CbrDf:
    case Strategy::CbrCoord:
    case Strategy::C2brCnr:
    case Strategy::C2brDf:
    case Strategy::C2brCoord:
      return true;
    default:
      return false;
  }
}

bool is_c2br(Strategy s) {
  return s == Strategy::C2brCnr || s == Strategy::C2brDf || s == Strategy::C2brCoord;
}

bool needs_simbet(Strategy s) { return is_c2br(s) || s == Strategy::SimbetSpray; }

Decision epidemic_decide(bool peer_has_packet) {
  Decision d;
  d.forward = !peer_has_packet;
  return d;
}

Decision cnr_decide(const DecisionInput& in) {
  Decision d;
  d.forward = !in.peer_has_packet && in.u_u > in.u_v + in.u_th;
  return d;
}

Decision abs_threshold_decide(const DecisionInput& in) {
  Decision d;
  d.forward = !in.peer_has_packet && in.u_u > in.u_th;
  return d;
}

Decision df_decide(const DecisionInput& in) {
  if (!in.tau) throw std::invalid_argument("df_decide requires tau");
  Decision d;
  if (in.u_u > *in.tau) {
    d.new_tau = in.u_u;  // threshold learns even when the peer already carries p
    d.forward = !in.peer_has_packet;
  }
  return d;
}

Decision coord_decide(const DecisionInput& in) {
  if (!in.tau) throw std::invalid_argument("coord_decide requires tau");
  if (in.peer_has_packet && in.peer_tau && *in.peer_tau > *in.tau) {
    Decision d;
    d.new_tau = *in.peer_tau;
    return d;
  }
  return df_decide(in);
}

Decision cbr_cnr_decide(const DecisionInput& in) {
  if (!in.r_v || !in.r_u) return cnr_decide(in);  // training period
  Decision d;
  if (in.peer_has_packet) return d;
  const bool gate = *in.r_u < *in.r_v || (*in.r_u == *in.r_v && !in.rep);
  if (gate && in.u_u > in.u_v + in.u_th) {
    d.forward = true;
    d.set_rep = true;
  }
  return d;
}

Decision cbr_df_decide(const DecisionInput& in) {
  if (!in.r_v || !in.r_u || !in.r_t) return df_decide(in);  // training period
  if (!in.tau) throw std::invalid_argument("cbr_df_decide requires tau");
  // Threshold maintenance is untouched delegation forwarding; the cluster
  // rank gate only decides whether the replica actually gets created. A
  // relaxed same-cluster forward additionally pushes the threshold past the
  // cluster boundary so the relaxation switches off once per cluster level.
  Decision d = df_decide(in);
  if (d.forward) {
    if (*in.r_u < *in.r_t) {
      // strictly better cluster: plain delegation update
    } else if (*in.r_u == *in.r_t && *in.r_v == *in.r_t) {
      if (in.bump_tau && *in.bump_tau > *d.new_tau) d.new_tau = *in.bump_tau;
    } else {
      d.forward = false;
    }
  }
  return d;
}

Decision cbr_coord_decide(const DecisionInput& in) {
  if (!in.r_v || !in.r_u || !in.r_t) return coord_decide(in);  // training period
  if (!in.tau) throw std::invalid_argument("cbr_coord_decide requires tau");
  if (in.peer_has_packet && in.peer_tau && *in.peer_tau > *in.tau) {
    Decision d;
    d.new_tau = *in.peer_tau;
    return d;
  }
  return cbr_df_decide(in);
}

namespace {

bool social_trained(const DecisionInput& in, bool with_thresholds) {
  const bool base = in.r_v_s && in.r_u_s && in.r_v_b && in.r_u_b;
  if (!with_thresholds) return base;
  return base && in.r_t_s && in.r_t_b;
}

DecisionInput betweenness_sub_input(const DecisionInput& in) {
  DecisionInput s;
  s.u_v = in.b_v;
  s.u_u = in.b_u;
  s.u_th = in.u_th;
  s.r_v = in.r_v_b;
  s.r_u = in.r_u_b;
  s.r_t = in.r_t_b;
  s.tau = in.tau_b;
  s.bump_tau = in.bump_tau_b;
  s.rep = in.rep;
  s.peer_has_packet = false;  // carrier branch only; the peer lacks the packet
  return s;
}

}  // namespace

Decision c2br_cnr_decide(const DecisionInput& in) {
  if (!social_trained(in, false)) return cnr_decide(in);  // simbet fallback
  Decision d;
  if (in.peer_has_packet) return d;
  if (*in.r_v_s != 1 || *in.r_u_s == 1) {
    Decision sub = cbr_cnr_decide(betweenness_sub_input(in));
    d.forward = sub.forward;
    d.set_rep = sub.set_rep;
  }
  return d;
}

Decision c2br_df_decide(const DecisionInput& in) {
  if (!social_trained(in, true)) return df_decide(in);  // simbet fallback
  Decision d;
  if (in.peer_has_packet) return d;
  const bool gate = (*in.r_t_s == *in.r_v_s && *in.r_t_s != 1) ||
                    (*in.r_v_s == 1 && *in.r_u_s == 1);
  if (gate) {
    Decision sub = cbr_df_decide(betweenness_sub_input(in));
    d.forward = sub.forward;
    d.new_tau_b = sub.new_tau;
  }
  if (in.tau_s && in.s_u > *in.tau_s) d.new_tau_s = in.s_u;
  return d;
}

Decision c2br_coord_decide(const DecisionInput& in) {
  if (!social_trained(in, true)) return coord_decide(in);  // simbet fallback
  Decision d;
  if (in.peer_has_packet) {
    if (in.peer_tau_s && in.tau_s && *in.peer_tau_s > *in.tau_s) d.new_tau_s = *in.peer_tau_s;
    if (in.peer_tau_b && in.tau_b && *in.peer_tau_b > *in.tau_b) d.new_tau_b = *in.peer_tau_b;
    return d;
  }
  const bool gate = (*in.r_t_s == *in.r_v_s && *in.r_t_s != 1) ||
                    (*in.r_v_s == 1 && *in.r_u_s == 1);
  if (gate) {
    Decision sub = cbr_coord_decide(betweenness_sub_input(in));
    d.forward = sub.forward;
    d.new_tau_b = sub.new_tau;
  }
  if (in.tau_s && in.s_u > *in.tau_s) d.new_tau_s = in.s_u;
  return d;
}

Decision simbet_spray_decide(const DecisionInput& in, int copies_left) {
  if (copies_left < 1) throw std::invalid_argument("spray requires copies_left >= 1");
  Decision d;
  if (in.peer_has_packet) return d;
  if (copies_left > 1 && in.u_u > in.u_v) {
    const double fraction = in.u_u / (in.u_u + in.u_v);
    int give = static_cast<int>(std::ceil(copies_left * fraction));
    give = std::min(give, copies_left - 1);  // carrier always keeps one
    if (give >= 1) {
      d.forward = true;
      d.copies_given = give;
    }
  }
  return d;  // single copy: wait mode, no focus forwarding
}

Decision decide(Strategy s, const DecisionInput& in, int copies_left) {
  switch (s) {
    case Strategy::Epidemic: return epidemic_decide(in.peer_has_packet);
    case Strategy::Cnr: return cnr_decide(in);
    case Strategy::Abs: return abs_threshold_decide(in);
    case Strategy::Df: return df_decide(in);
    case Strategy::Coord: return coord_decide(in);
    case Strategy::CbrCnr: return cbr_cnr_decide(in);
    case Strategy::CbrDf: return cbr_df_decide(in);
    case Strategy::CbrCoord: return cbr_coord_decide(in);
    case Strategy::C2brCnr: return c2br_cnr_decide(in);
    case Strategy::C2brDf: return c2br_df_decide(in);
    case Strategy::C2brCoord: return c2br_coord_decide(in);
    case Strategy::SimbetSpray: return simbet_spray_decide(in, copies_left);
  }
  throw std::invalid_argument("unknown strategy");
}

}  // namespace cbrsim
