#include "cbrsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "cbrsim/rng.hpp"

namespace cbrsim {

std::vector<GeneratedPacket> schedule_traffic(const ContactTrace& trace, const TrafficModel& tm) {
  if (tm.n_packets < 0) throw EngineError("negative packet count");
  if (tm.warmup_frac < 0.0 || tm.cooldown_frac < 0.0 || tm.warmup_frac + tm.cooldown_frac >= 1.0) {
    throw EngineError("warmup/cooldown fractions leave no steady-state window");
  }
  const auto warmup_end =
      static_cast<Seconds>(std::llround(static_cast<double>(trace.duration) * tm.warmup_frac));
  const auto cooldown_start =
      trace.duration -
      static_cast<Seconds>(std::llround(static_cast<double>(trace.duration) * tm.cooldown_frac));

  Rng rng(tm.seed);
  std::vector<GeneratedPacket> out;
  out.reserve(tm.n_packets);
  const long long max_attempts = 100LL * std::max(tm.n_packets, 1);
  long long attempts = 0;
  while (static_cast<int>(out.size()) < tm.n_packets) {
    if (++attempts > max_attempts) {
      throw EngineError("could not place traffic inside the steady-state window");
    }
    const auto src = static_cast<NodeId>(rng.uniform_int(0, trace.node_count - 1));
    const auto dst = static_cast<NodeId>(rng.uniform_int(0, trace.node_count - 1));
    if (src == dst) continue;
    if (!trace.presence[src] || !trace.presence[dst]) continue;
    const Seconds lo = std::max({trace.presence[src]->first_seen,
                                 trace.presence[dst]->first_seen, warmup_end});
    const Seconds hi = std::min({trace.presence[src]->last_seen,
                                 trace.presence[dst]->last_seen, cooldown_start});
    if (lo > hi) continue;
    out.push_back({src, dst, rng.uniform_int(lo, hi)});
  }
  return out;
}

Simulator::Simulator(const ContactTrace& trace, RunConfig cfg) : trace_(trace), cfg_(cfg) {
  if (trace_.node_count < 2) throw EngineError("trace needs at least two nodes");
  if (needs_simbet(cfg_.strategy) && cfg_.utility != UtilityKind::SimBet) {
    throw EngineError("strategy requires the simbet utility");
  }
  if (cfg_.spray_copies < 1) throw EngineError("spray copies must be >= 1");
  if (cfg_.buffer_capacity < -1) throw EngineError("invalid buffer capacity");
  if (cfg_.traffic.ttl_frac < 0.0) throw EngineError("negative ttl fraction");
  if (cfg_.hop_limit < 0) throw EngineError("negative hop limit");
  if (cfg_.simbet_weight < 0.0 || cfg_.simbet_weight > 1.0) {
    throw EngineError("simbet weight outside [0,1]");
  }

  ttl_ = static_cast<Seconds>(
      std::llround(static_cast<double>(trace_.duration) * cfg_.traffic.ttl_frac));
  recording_ = uses_clustering(cfg_.strategy) || cfg_.force_sample_recording;
  social_ = is_c2br(cfg_.strategy);

  const int n = trace_.node_count;
  states_.reserve(n);
  for (NodeId v = 0; v < n; ++v) states_.emplace_back(v, cfg_.prophet);
  held_.resize(n);
  relay_count_.assign(n, 0);
  dd_trackers_.resize(n);
  di_trackers_.assign(n, ClusterTracker(cfg_.clustering));
}

ClusterTracker& Simulator::primary_tracker(NodeId v, NodeId dest) {
  if (dest == UtilityState::kNoDest) return di_trackers_[v];
  auto [it, inserted] = dd_trackers_[v].try_emplace(dest, cfg_.clustering);
  return it->second;
}

const ClusterTracker* Simulator::tracker(NodeId v, NodeId dest) const {
  if (dest == UtilityState::kNoDest) return &di_trackers_[v];
  const auto it = dd_trackers_[v].find(dest);
  return it == dd_trackers_[v].end() ? nullptr : &it->second;
}

std::size_t Simulator::sample_count(NodeId v, NodeId dest) const {
  const ClusterTracker* t = tracker(v, dest);
  return t ? t->sample_count() : 0;
}

bool Simulator::holds_delivered_copies() const {
  for (const auto& copies : held_) {
    for (const auto& [id, copy] : copies) {
      if (packets_[id].delivered) return true;
    }
  }
  return false;
}

const ClusterModel* Simulator::trained_model(NodeId v, NodeId dest) const {
  const ClusterTracker* t = tracker(v, dest);
  return t && t->trained() ? &t->model() : nullptr;
}

const ClusterModel* Simulator::trained_di_model(NodeId v) const {
  return di_trackers_[v].trained() ? &di_trackers_[v].model() : nullptr;
}

void Simulator::inject(int id, const GeneratedPacket& g) {
  Copy copy;
  copy.received = g.t_gen;
  copy.sourced = true;
  copy.copies_left = cfg_.spray_copies;
  if (social_) {
    copy.tau = 0.5;
    copy.tau_s = states_[g.src].similarity(g.dst);
    copy.tau_b = states_[g.src].ego_betweenness();
  } else if (cfg_.utility == UtilityKind::SimBet) {
    copy.tau = 0.5;  // pairwise value against an unknown peer
  } else {
    const NodeId dest = dest_dependent(cfg_.utility) ? g.dst : UtilityState::kNoDest;
    copy.tau = states_[g.src].value(cfg_.utility, g.t_gen, dest);
  }
  held_[g.src].emplace(id, copy);
  packets_[id].at[g.src] = 1;
}

void Simulator::remove_all_copies(int id) {
  for (NodeId v = 0; v < trace_.node_count; ++v) {
    const auto it = held_[v].find(id);
    if (it == held_[v].end()) continue;
    if (!it->second.sourced) --relay_count_[v];
    held_[v].erase(it);
  }
  std::fill(packets_[id].at.begin(), packets_[id].at.end(), 0);
}

void Simulator::expire(int id) { remove_all_copies(id); }

void Simulator::deliver_to_peer(NodeId carrier, NodeId peer, Seconds t) {
  std::vector<int> ready;
  for (const auto& [id, copy] : held_[carrier]) {
    if (packets_[id].dst == peer && !packets_[id].delivered) ready.push_back(id);
  }
  for (int id : ready) {
    PacketInfo& pk = packets_[id];
    pk.delivered = true;
    pk.delivered_at = t;
    ++result_.delivered;
    ++result_.direct_deliveries;
    ++result_.transmissions;
    result_.total_delay += static_cast<double>(t - pk.t_gen);
    if (cfg_.policy == DeliveryPolicy::OracleDelete) {
      remove_all_copies(id);
    } else {
      pk.at[peer] = 1;  // destination got it; carriers keep their copies
    }
  }
}

void Simulator::record_samples(NodeId observer, NodeId peer, Seconds t) {
  if (held_[peer].empty()) return;
  std::set<NodeId> dests;
  for (const auto& [id, copy] : held_[peer]) dests.insert(packets_[id].dst);

  if (social_) {
    for (NodeId d : dests) {
      primary_tracker(observer, d).record(states_[peer].similarity(d), t);
    }
    di_trackers_[observer].record(states_[peer].ego_betweenness(), t);
    return;
  }
  if (cfg_.utility == UtilityKind::SimBet) {
    const double b_o = states_[observer].ego_betweenness();
    const double b_p = states_[peer].ego_betweenness();
    for (NodeId d : dests) {
      const auto [sb_o, sb_p] =
          simbet_combine(states_[observer].similarity(d), b_o, states_[peer].similarity(d), b_p,
                         cfg_.simbet_weight);
      primary_tracker(observer, d).record(sb_p, t);
    }
    return;
  }
  if (dest_dependent(cfg_.utility)) {
    for (NodeId d : dests) {
      primary_tracker(observer, d).record(states_[peer].value(cfg_.utility, t, d), t);
    }
  } else {
    di_trackers_[observer].record(states_[peer].value(cfg_.utility, t), t);
  }
}

bool Simulator::admit_copy(NodeId node, int id, const Copy& copy) {
  if (cfg_.buffer_capacity < 0) return true;
  if (relay_count_[node] < cfg_.buffer_capacity) return true;
  // Over capacity: the oldest relay copy by packet creation time (ties to the
  // smaller id) is evicted; if that would be the incoming copy, reject it.
  int oldest = id;
  for (const auto& [held_id, held_copy] : held_[node]) {
    if (held_copy.sourced) continue;
    if (packets_[held_id].t_gen < packets_[oldest].t_gen ||
        (packets_[held_id].t_gen == packets_[oldest].t_gen && held_id < oldest)) {
      oldest = held_id;
    }
  }
  ++result_.drops;
  if (oldest == id) return false;
  held_[node].erase(oldest);
  --relay_count_[node];
  packets_[oldest].at[node] = 0;
  return true;
}

void Simulator::decide_and_transfer(NodeId carrier, NodeId peer, Seconds t) {
  struct Pending {
    int id = 0;
    Decision d;
    double u_u = 0.0;  // peer utility (pairwise for simbet) seeding the new tau
    double s_u = 0.0;
    double b_u = 0.0;
    bool model_trained = false;
  };
  std::vector<Pending> pending;

  for (const auto& [id, copy] : held_[carrier]) {
    const PacketInfo& pk = packets_[id];
    const NodeId dst = pk.dst;
    if (dst == peer) continue;  // direct delivery already handled
    if (cfg_.hop_limit > 0 && copy.hops >= cfg_.hop_limit) continue;

    DecisionInput in;
    in.u_th = cfg_.u_th;
    in.rep = copy.rep;
    in.peer_has_packet = pk.at[peer] != 0;
    const auto peer_copy = held_[peer].find(id);

    Pending p;
    p.id = id;

    if (social_) {
      in.s_v = states_[carrier].similarity(dst);
      in.s_u = states_[peer].similarity(dst);
      in.b_v = states_[carrier].ego_betweenness();
      in.b_u = states_[peer].ego_betweenness();
      in.tau = copy.tau;
      in.tau_s = copy.tau_s;
      in.tau_b = copy.tau_b;
      std::tie(in.u_v, in.u_u) =
          simbet_combine(in.s_v, in.b_v, in.s_u, in.b_u, cfg_.simbet_weight);
      if (const ClusterModel* sm = trained_model(carrier, dst)) {
        in.r_v_s = rank_of(*sm, in.s_v);
        in.r_u_s = rank_of(*sm, in.s_u);
        in.r_t_s = rank_of(*sm, copy.tau_s);
      }
      if (const ClusterModel* bm = trained_di_model(carrier)) {
        in.r_v_b = rank_of(*bm, in.b_v);
        in.r_u_b = rank_of(*bm, in.b_u);
        in.r_t_b = rank_of(*bm, copy.tau_b);
        if (*in.r_u_b >= 2) in.bump_tau_b = boundary_above(*bm, *in.r_u_b);
      }
      p.model_trained = in.r_v_s && in.r_v_b;
      if (peer_copy != held_[peer].end()) {
        in.peer_tau = peer_copy->second.tau;
        in.peer_tau_s = peer_copy->second.tau_s;
        in.peer_tau_b = peer_copy->second.tau_b;
      }
      p.s_u = in.s_u;
      p.b_u = in.b_u;
    } else {
      if (cfg_.utility == UtilityKind::SimBet) {
        std::tie(in.u_v, in.u_u) = simbet_combine(
            states_[carrier].similarity(dst), states_[carrier].ego_betweenness(),
            states_[peer].similarity(dst), states_[peer].ego_betweenness(), cfg_.simbet_weight);
      } else {
        const NodeId d = dest_dependent(cfg_.utility) ? dst : UtilityState::kNoDest;
        in.u_v = states_[carrier].value(cfg_.utility, t, d);
        in.u_u = states_[peer].value(cfg_.utility, t, d);
      }
      in.tau = copy.tau;
      if (uses_clustering(cfg_.strategy)) {
        const NodeId d = dest_dependent(cfg_.utility) ? dst : UtilityState::kNoDest;
        if (const ClusterModel* m = trained_model(carrier, d)) {
          in.r_v = rank_of(*m, in.u_v);
          in.r_u = rank_of(*m, in.u_u);
          in.r_t = rank_of(*m, copy.tau);
          if (*in.r_u >= 2) in.bump_tau = boundary_above(*m, *in.r_u);
          p.model_trained = true;
        }
      }
      if (peer_copy != held_[peer].end()) in.peer_tau = peer_copy->second.tau;
    }
    p.u_u = in.u_u;
    p.d = decide(cfg_.strategy, in, copy.copies_left);
    pending.push_back(p);
  }

  for (const Pending& p : pending) {
    Copy& copy = held_[carrier].at(p.id);
    if (p.d.set_rep) copy.rep = true;
    if (p.d.new_tau) copy.tau = *p.d.new_tau;
    if (p.d.new_tau_s) copy.tau_s = *p.d.new_tau_s;
    if (p.d.new_tau_b) copy.tau_b = *p.d.new_tau_b;
    if (!p.d.forward) continue;

    // Forwards made without a trained cluster model. Strategies that never
    // train count every forward here, so a gated strategy whose model never
    // trains reproduces its baseline exactly, diagnostics included.
    if (!p.model_trained) ++result_.forwards_during_training;

    Copy fresh;
    fresh.received = t;
    fresh.hops = copy.hops + 1;
    // Delegation thresholds travel with the copy: the recipient inherits the
    // sender's updated threshold with its own utility as a floor.
    fresh.tau = std::max(p.u_u, copy.tau);
    fresh.tau_s = std::max(p.s_u, copy.tau_s);
    fresh.tau_b = std::max(p.b_u, copy.tau_b);
    if (cfg_.strategy == Strategy::SimbetSpray) {
      fresh.copies_left = p.d.copies_given;
    }

    ++result_.transmissions;
    if (!admit_copy(peer, p.id, fresh)) continue;
    held_[peer].emplace(p.id, fresh);
    ++relay_count_[peer];
    packets_[p.id].at[peer] = 1;
    ++packets_[p.id].replicas;
    ++result_.replications;
    if (cfg_.strategy == Strategy::SimbetSpray) {
      copy.copies_left -= p.d.copies_given;
      ++result_.spray_transfers;
    }
  }
}

RunResult Simulator::run() {
  if (ran_) throw EngineError("simulator already ran");
  ran_ = true;

  const auto schedule =
      cfg_.explicit_packets.empty() ? schedule_traffic(trace_, cfg_.traffic) : cfg_.explicit_packets;
  for (const GeneratedPacket& g : schedule) {
    if (g.src == g.dst || g.src < 0 || g.dst < 0 || g.src >= trace_.node_count ||
        g.dst >= trace_.node_count || g.t_gen < 0) {
      throw EngineError("invalid packet in explicit schedule");
    }
  }
  result_.generated = static_cast<long>(schedule.size());
  packets_.resize(schedule.size());
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    packets_[i].src = schedule[i].src;
    packets_[i].dst = schedule[i].dst;
    packets_[i].t_gen = schedule[i].t_gen;
    packets_[i].at.assign(trace_.node_count, 0);
  }

  // Packet ids follow generation draw order; injection and expiry both walk
  // the schedule in (t_gen, id) order (the ttl is constant, so expiry order
  // matches generation-time order).
  std::vector<int> by_time(schedule.size());
  for (std::size_t i = 0; i < by_time.size(); ++i) by_time[i] = static_cast<int>(i);
  std::stable_sort(by_time.begin(), by_time.end(), [&](int a, int b) {
    return schedule[a].t_gen < schedule[b].t_gen;
  });

  std::size_t inj = 0, exp = 0;
  for (const ContactEvent& ev : trace_.events) {
    const Seconds s = ev.start;
    while (inj < by_time.size() && schedule[by_time[inj]].t_gen <= s) {
      inject(by_time[inj], schedule[by_time[inj]]);
      ++inj;
    }
    while (exp < by_time.size() && schedule[by_time[exp]].t_gen + ttl_ < s) {
      if (exp >= inj) break;  // not injected yet (ttl can be zero)
      expire(by_time[exp]);
      ++exp;
    }

    const NodeId v = ev.a;
    const NodeId u = ev.b;

    deliver_to_peer(v, u, s);
    deliver_to_peer(u, v, s);

    const auto nb_v = states_[v].neighbor_list();
    const auto nb_u = states_[u].neighbor_list();
    const auto pp_v = states_[v].prophet_snapshot(s);
    const auto pp_u = states_[u].prophet_snapshot(s);
    states_[v].on_contact(u, s, nb_u, pp_u);
    states_[u].on_contact(v, s, nb_v, pp_v);

    if (recording_) {
      record_samples(v, u, s);
      record_samples(u, v, s);
    }

    decide_and_transfer(v, u, s);
    decide_and_transfer(u, v, s);
  }

  result_.packets.reserve(packets_.size());
  for (const PacketInfo& pk : packets_) {
    PacketOutcome o;
    o.src = pk.src;
    o.dst = pk.dst;
    o.t_gen = pk.t_gen;
    o.delivered = pk.delivered;
    o.delay = pk.delivered ? pk.delivered_at - pk.t_gen : 0;
    o.replicas = pk.replicas;
    result_.packets.push_back(o);
  }
  return result_;
}

RunResult run(const ContactTrace& trace, const RunConfig& cfg) {
  Simulator sim(trace, cfg);
  return sim.run();
}

}  // namespace cbrsim
