#include "cbrsim/utility.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cbrsim {

bool dest_dependent(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::DestEnc:
    case UtilityKind::Lts:
    case UtilityKind::Prophet:
    case UtilityKind::Spm:
    case UtilityKind::Similarity:
    case UtilityKind::SimBet:
      return true;
    case UtilityKind::Enc:
    case UtilityKind::LastContact:
    case UtilityKind::EgoBetweenness:
      return false;
  }
  return false;
}

UtilityKind utility_from_name(const std::string& name) {
  if (name == "destenc") return UtilityKind::DestEnc;
  if (name == "enc") return UtilityKind::Enc;
  if (name == "lts") return UtilityKind::Lts;
  if (name == "prophet") return UtilityKind::Prophet;
  if (name == "spm") return UtilityKind::Spm;
  if (name == "lastcontact") return UtilityKind::LastContact;
  if (name == "similarity") return UtilityKind::Similarity;
  if (name == "egobet") return UtilityKind::EgoBetweenness;
  if (name == "simbet") return UtilityKind::SimBet;
  throw std::invalid_argument("unknown utility: " + name);
}

const char* to_name(UtilityKind kind) {
  switch (kind) {
    case UtilityKind::DestEnc: return "destenc";
    case UtilityKind::Enc: return "enc";
    case UtilityKind::Lts: return "lts";
    case UtilityKind::Prophet: return "prophet";
    case UtilityKind::Spm: return "spm";
    case UtilityKind::LastContact: return "lastcontact";
    case UtilityKind::Similarity: return "similarity";
    case UtilityKind::EgoBetweenness: return "egobet";
    case UtilityKind::SimBet: return "simbet";
  }
  return "?";
}

void UtilityState::on_contact(NodeId u, Seconds t, const std::vector<NodeId>& neighbors_of_u,
                              const std::map<NodeId, double>& peer_prophet) {
  if (t < last_event_) throw std::invalid_argument("contact time regression");
  last_event_ = t;

  // SPM: close the open waiting interval for u before updating last_contact_.
  const auto prev_it = last_contact_.find(u);
  const Seconds wait_from = prev_it != last_contact_.end() ? prev_it->second : 0;
  const auto wait = static_cast<double>(t - wait_from);
  spm_integral_[u] += wait * wait / 2.0;

  ++contact_counts_[u];
  ++total_;
  last_contact_[u] = t;
  last_any_ = t;

  // Prophet: age the whole vector to t, then direct + transitive updates.
  if (t > prophet_age_time_) {
    const auto quanta = static_cast<double>((t - prophet_age_time_) / prophet_params_.quantum);
    const double factor = std::pow(prophet_params_.gamma, quanta);
    for (auto& [d, p] : prophet_) p *= factor;
    prophet_age_time_ = t;
  }
  double& p_u = prophet_[u];
  p_u += (1.0 - p_u) * prophet_params_.p_init;
  for (const auto& [d, p_ud] : peer_prophet) {
    if (d == owner_ || d == u) continue;
    double& p_d = prophet_[d];
    p_d = std::max(p_d, p_u * p_ud * prophet_params_.beta);
  }

  // Ego knowledge: the contact edge plus u's reported neighbor edges.
  auto add_edge = [&](NodeId x, NodeId y) {
    if (x == y) return;
    if (x > y) std::swap(x, y);
    if (edges_.insert({x, y}).second) bet_dirty_ = true;
  };
  add_edge(owner_, u);
  for (NodeId w : neighbors_of_u) add_edge(u, w);
}

bool UtilityState::has_edge(NodeId x, NodeId y) const {
  if (x > y) std::swap(x, y);
  return edges_.count({x, y}) > 0;
}

double UtilityState::prophet_value(NodeId dest, Seconds now) const {
  const auto it = prophet_.find(dest);
  if (it == prophet_.end()) return 0.0;
  const auto quanta = static_cast<double>((now - prophet_age_time_) / prophet_params_.quantum);
  return it->second * std::pow(prophet_params_.gamma, quanta);
}

double UtilityState::value(UtilityKind kind, Seconds now, NodeId dest) const {
  if (dest_dependent(kind) && dest == kNoDest) {
    throw std::invalid_argument("destination required for utility");
  }
  if (now < last_event_) throw std::invalid_argument("utility read before last event");
  switch (kind) {
    case UtilityKind::DestEnc: {
      const auto it = contact_counts_.find(dest);
      return it == contact_counts_.end() ? 0.0 : static_cast<double>(it->second);
    }
    case UtilityKind::Enc:
      return static_cast<double>(total_);
    case UtilityKind::Lts: {
      const auto it = last_contact_.find(dest);
      if (it == last_contact_.end()) return 0.0;
      return 1.0 / (1.0 + static_cast<double>(now - it->second));
    }
    case UtilityKind::Prophet:
      return prophet_value(dest, now);
    case UtilityKind::Spm: {
      const auto it = last_contact_.find(dest);
      if (it == last_contact_.end()) return 0.0;
      const auto open = static_cast<double>(now - it->second);
      const double integral = spm_integral_.at(dest) + open * open / 2.0;
      if (integral <= 0.0) return 0.0;
      return static_cast<double>(now) / integral;  // reciprocal mean waiting time
    }
    case UtilityKind::LastContact:
      if (last_any_ < 0) return 0.0;
      return 1.0 / (1.0 + static_cast<double>(now - last_any_));
    case UtilityKind::Similarity:
      return similarity(dest);
    case UtilityKind::EgoBetweenness:
      return ego_betweenness();
    case UtilityKind::SimBet:
      throw std::invalid_argument("simbet requires pairwise combination");
  }
  return 0.0;
}

double UtilityState::similarity(NodeId dest) const {
  long common = 0;
  for (const auto& [w, count] : contact_counts_) {
    if (w == dest) continue;
    if (has_edge(w, dest)) ++common;
  }
  return static_cast<double>(common);
}

double UtilityState::ego_betweenness() const {
  if (!bet_dirty_) return bet_cache_;
  std::vector<NodeId> nbrs;
  nbrs.reserve(contact_counts_.size());
  for (const auto& [w, count] : contact_counts_) nbrs.push_back(w);
  double total = 0.0;
  for (std::size_t i = 0; i < nbrs.size(); ++i) {
    for (std::size_t j = i + 1; j < nbrs.size(); ++j) {
      if (has_edge(nbrs[i], nbrs[j])) continue;
      long paths = 1;  // the owner itself
      for (NodeId w : nbrs) {
        if (w == nbrs[i] || w == nbrs[j]) continue;
        if (has_edge(w, nbrs[i]) && has_edge(w, nbrs[j])) ++paths;
      }
      total += 1.0 / static_cast<double>(paths);
    }
  }
  bet_cache_ = total;
  bet_dirty_ = false;
  return total;
}

std::vector<NodeId> UtilityState::neighbor_list() const {
  std::vector<NodeId> out;
  out.reserve(contact_counts_.size());
  for (const auto& [w, count] : contact_counts_) out.push_back(w);
  return out;
}

std::map<NodeId, double> UtilityState::prophet_snapshot(Seconds now) const {
  std::map<NodeId, double> out;
  for (const auto& [d, p] : prophet_) out[d] = prophet_value(d, now);
  return out;
}

long UtilityState::contact_count(NodeId u) const {
  const auto it = contact_counts_.find(u);
  return it == contact_counts_.end() ? 0 : it->second;
}

std::pair<double, double> simbet_combine(double sim_v, double bet_v, double sim_u, double bet_u,
                                         double w) {
  auto term = [](double mine, double theirs) {
    const double denom = mine + theirs;
    return denom > 0.0 ? mine / denom : 0.5;
  };
  const double v = w * term(sim_v, sim_u) + (1.0 - w) * term(bet_v, bet_u);
  return {v, 1.0 - v};
}

}  // namespace cbrsim
