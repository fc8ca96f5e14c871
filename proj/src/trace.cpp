#include "cbrsim/trace.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

#include "cbrsim/rng.hpp"

namespace cbrsim {

namespace {

struct RawEvent {
  long long a = 0;
  long long b = 0;
  Seconds start = 0;
  Seconds end = 0;
};

long long parse_ll(const std::string& token, int line_no, const char* what) {
  long long out = 0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc{} || ptr != last) {
    throw TraceError("line " + std::to_string(line_no) + ": malformed " + what + " '" + token +
                     "'");
  }
  return out;
}

// Canonicalize, merge per-pair overlaps, sort, build presence.
ContactTrace normalize(std::vector<RawEvent> raw, const std::vector<long long>* id_universe) {
  std::vector<long long> ids;
  if (id_universe != nullptr) {
    ids = *id_universe;
  } else {
    for (const auto& e : raw) {
      ids.push_back(e.a);
      ids.push_back(e.b);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }
  std::map<long long, NodeId> dense;
  for (std::size_t i = 0; i < ids.size(); ++i) dense[ids[i]] = static_cast<NodeId>(i);

  std::map<std::pair<NodeId, NodeId>, std::vector<std::pair<Seconds, Seconds>>> per_pair;
  for (const auto& e : raw) {
    NodeId a = dense.at(e.a);
    NodeId b = dense.at(e.b);
    if (a > b) std::swap(a, b);
    per_pair[{a, b}].emplace_back(e.start, e.end);
  }

  ContactTrace trace;
  trace.node_count = static_cast<int>(ids.size());
  trace.original_ids = std::move(ids);
  for (auto& [pair, spans] : per_pair) {
    std::sort(spans.begin(), spans.end());
    ContactEvent cur{pair.first, pair.second, spans.front().first, spans.front().second};
    for (std::size_t i = 1; i < spans.size(); ++i) {
      if (spans[i].first <= cur.end) {
        cur.end = std::max(cur.end, spans[i].second);
      } else {
        trace.events.push_back(cur);
        cur.start = spans[i].first;
        cur.end = spans[i].second;
      }
    }
    trace.events.push_back(cur);
  }
  std::sort(trace.events.begin(), trace.events.end(), [](const auto& x, const auto& y) {
    return std::tie(x.start, x.a, x.b) < std::tie(y.start, y.a, y.b);
  });

  trace.presence.assign(trace.node_count, std::nullopt);
  for (const auto& e : trace.events) {
    trace.duration = std::max(trace.duration, e.end);
    for (NodeId v : {e.a, e.b}) {
      auto& p = trace.presence[v];
      if (!p) {
        p = Presence{e.start, e.end};
      } else {
        p->first_seen = std::min(p->first_seen, e.start);
        p->last_seen = std::max(p->last_seen, e.end);
      }
    }
  }
  return trace;
}

}  // namespace

ContactTrace parse_trace(std::istream& in, TraceFormat format) {
  if (format == TraceFormat::Auto) format = TraceFormat::PairInterval;
  std::vector<RawEvent> raw;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    std::string tok;
    while (fields >> tok) tokens.push_back(tok);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() != 4) {
      throw TraceError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                       std::to_string(tokens.size()));
    }
    RawEvent e;
    e.a = parse_ll(tokens[0], line_no, "node id");
    e.b = parse_ll(tokens[1], line_no, "node id");
    e.start = parse_ll(tokens[2], line_no, "time");
    const Seconds t3 = parse_ll(tokens[3], line_no, "time");
    e.end = (format == TraceFormat::PairStartDuration) ? e.start + t3 : t3;
    if (e.start < 0 || t3 < 0) {
      throw TraceError("line " + std::to_string(line_no) + ": negative time");
    }
    if (e.start >= e.end) {
      throw TraceError("line " + std::to_string(line_no) + ": start >= end");
    }
    if (e.a == e.b) {
      throw TraceError("line " + std::to_string(line_no) + ": self-contact");
    }
    raw.push_back(e);
  }
  if (raw.empty()) throw TraceError("empty trace");
  return normalize(std::move(raw), nullptr);
}

ContactTrace load_trace(const std::string& path, TraceFormat format) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace file: " + path);
  return parse_trace(in, format);
}

void write_trace(const ContactTrace& trace, std::ostream& out) {
  for (const auto& e : trace.events) {
    out << trace.original_ids[e.a] << ' ' << trace.original_ids[e.b] << ' ' << e.start << ' '
        << e.end << '\n';
  }
}

std::pair<Seconds, Seconds> presence_window(const ContactTrace& trace, NodeId v) {
  if (v < 0 || v >= trace.node_count || !trace.presence[v]) {
    throw TraceError("unknown node " + std::to_string(v));
  }
  return {trace.presence[v]->first_seen, trace.presence[v]->last_seen};
}

int community_of(int node, int n_nodes, int n_communities) {
  return static_cast<int>(static_cast<long long>(node) * n_communities / n_nodes);
}

ContactTrace generate_synthetic(const SyntheticParams& p) {
  if (p.n_nodes < 2) throw TraceError("n_nodes must be >= 2");
  if (p.n_communities < 1 || p.n_communities > p.n_nodes) {
    throw TraceError("invalid community count");
  }
  if (p.duration <= 0) throw TraceError("duration must be positive");
  if (!(p.intra_rate > p.inter_rate) || p.inter_rate < 0) {
    throw TraceError("require intra_rate > inter_rate >= 0");
  }
  if (p.mean_contact_len <= 0) throw TraceError("mean contact length must be positive");
  if (p.activity.empty()) throw TraceError("activity multipliers must not be empty");
  for (double a : p.activity) {
    if (!(a > 0)) throw TraceError("activity multipliers must be positive");
  }

  std::vector<RawEvent> raw;
  for (int i = 0; i < p.n_nodes; ++i) {
    for (int j = i + 1; j < p.n_nodes; ++j) {
      const bool intra = community_of(i, p.n_nodes, p.n_communities) ==
                         community_of(j, p.n_nodes, p.n_communities);
      const double scale = p.activity[i % p.activity.size()] * p.activity[j % p.activity.size()];
      const double per_day = (intra ? p.intra_rate : p.inter_rate) * scale;
      if (per_day <= 0) continue;
      const double mean_gap = 86400.0 / per_day;
      Rng rng(mix_seed(p.seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)));
      double t = 0.0;
      while (true) {
        t += rng.exponential(mean_gap);
        const auto start = static_cast<Seconds>(std::llround(t));
        if (start >= p.duration) break;
        auto len = static_cast<Seconds>(std::llround(rng.exponential(p.mean_contact_len)));
        len = std::max<Seconds>(len, 1);
        const Seconds end = std::min<Seconds>(start + len, p.duration);
        if (end > start) raw.push_back({i, j, start, end});
      }
    }
  }
  if (raw.empty()) throw TraceError("synthetic parameters produced an empty trace");
  std::vector<long long> universe(p.n_nodes);
  for (int i = 0; i < p.n_nodes; ++i) universe[i] = i;
  return normalize(std::move(raw), &universe);
}

}  // namespace cbrsim
