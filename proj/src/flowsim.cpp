#include "kpath/flowsim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <queue>

#include "kpath/error.hpp"
#include "kpath/rng.hpp"
#include "kpath/shortest.hpp"

namespace kpath {

namespace {

std::string fmt_double(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

// Resolves a pinned path for each arriving flow.
class PathPicker {
 public:
  PathPicker(const Topology& t, const RoutingPolicy& policy, Rng& rng)
      : topo_(t), policy_(policy), rng_(rng) {}

  std::vector<LinkId> pick(NodeId src, NodeId dst) {
    if (policy_.kind == RoutingPolicy::Kind::plan) {
      const MultipathPlan::FlowPaths* fp = policy_.plan->find(src, dst);
      if (fp == nullptr || fp->paths.empty()) {
        fail("plan has no paths for flow " + topo_.node_name(src) + " -> " +
             topo_.node_name(dst));
      }
      return fp->paths[rng_.bounded(fp->paths.size())].links;
    }
    // Per-flow ECMP: independent uniform next-hop choice at every node of the
    // shortest-path DAG toward dst.
    const auto& dag = dag_for(dst);
    std::vector<LinkId> links;
    NodeId v = src;
    while (v != dst) {
      const auto& outs = dag[v];
      if (outs.empty()) {
        fail("no route from " + topo_.node_name(src) + " to " + topo_.node_name(dst));
      }
      const LinkId e = outs[rng_.bounded(outs.size())];
      links.push_back(e);
      v = topo_.link(e).dst;
    }
    return links;
  }

 private:
  const std::vector<std::vector<LinkId>>& dag_for(NodeId dst) {
    auto it = dags_.find(dst);
    if (it == dags_.end()) {
      const ShortestPathTree tree = shortest_tree(topo_, dst);
      it = dags_.emplace(dst, ecmp_dag(topo_, tree)).first;
    }
    return it->second;
  }

  const Topology& topo_;
  const RoutingPolicy& policy_;
  Rng& rng_;
  std::map<NodeId, std::vector<std::vector<LinkId>>> dags_;
};

}  // namespace

std::vector<FlowEvent> generate_flows(const TrafficMatrix& m, double mean_holding,
                                      double flow_rate, double horizon,
                                      uint64_t seed) {
  if (mean_holding <= 0) fail("mean_holding must be positive");
  if (flow_rate <= 0) fail("flow_rate must be positive");
  if (horizon <= 0) fail("horizon must be positive");

  std::vector<FlowEvent> flows;
  for (const auto& e : m.entries()) {
    // Keyed substream so the result does not depend on entry order.
    Rng rng(Rng::mix(seed, (static_cast<uint64_t>(e.src) << 32) | e.dst));
    const double arrival_rate = e.demand / (flow_rate * mean_holding);
    double at = rng.exponential(1.0 / arrival_rate);
    while (at <= horizon) {
      flows.push_back({e.src, e.dst, flow_rate, at, rng.exponential(mean_holding)});
      at += rng.exponential(1.0 / arrival_rate);
    }
  }
  std::sort(flows.begin(), flows.end(), [](const FlowEvent& a, const FlowEvent& b) {
    return std::tie(a.arrival, a.src, a.dst, a.holding) <
           std::tie(b.arrival, b.src, b.dst, b.holding);
  });
  return flows;
}

SimTrace simulate(const Topology& t, const RoutingPolicy& policy,
                  const std::vector<FlowEvent>& flows, uint64_t seed,
                  double window_begin, double window_end) {
  if (window_end < window_begin) fail("measurement window out of order");
  Rng rng(seed);
  PathPicker picker(t, policy, rng);

  struct Departure {
    double time;
    size_t flow;
    bool operator>(const Departure& o) const {
      return std::tie(time, flow) > std::tie(o.time, o.flow);
    }
  };
  std::priority_queue<Departure, std::vector<Departure>, std::greater<>> departures;
  std::vector<std::vector<LinkId>> pinned(flows.size());

  std::vector<double> load(t.link_count(), 0.0);
  SimTrace trace;
  trace.window_begin = window_begin;
  trace.window_end = window_end;
  trace.link_time_avg.assign(t.link_count(), 0.0);
  trace.max_load_series.reserve(2 * flows.size());

  double prev_time = 0;
  double prev_max = 0;
  double avg_acc = 0;

  auto current_max = [&]() {
    double mu = 0;
    for (LinkId e = 0; e < t.link_count(); ++e) {
      mu = std::max(mu, load[e] / t.link(e).capacity);
    }
    return mu;
  };
  auto advance_to = [&](double now) {
    const double lo = std::max(prev_time, window_begin);
    const double hi = std::min(now, window_end);
    if (hi > lo) {
      avg_acc += prev_max * (hi - lo);
      for (LinkId e = 0; e < t.link_count(); ++e) {
        trace.link_time_avg[e] += load[e] * (hi - lo);
      }
    }
    prev_time = now;
  };

  size_t next_arrival = 0;
  while (next_arrival < flows.size() || !departures.empty()) {
    const bool take_departure =
        !departures.empty() &&
        (next_arrival >= flows.size() ||
         departures.top().time <= flows[next_arrival].arrival);
    if (take_departure) {
      const Departure dep = departures.top();
      departures.pop();
      advance_to(dep.time);
      for (LinkId e : pinned[dep.flow]) load[e] -= flows[dep.flow].rate;
      prev_max = current_max();
      trace.max_load_series.emplace_back(dep.time, prev_max);
    } else {
      const size_t i = next_arrival++;
      const FlowEvent& f = flows[i];
      advance_to(f.arrival);
      pinned[i] = picker.pick(f.src, f.dst);
      for (LinkId e : pinned[i]) load[e] += f.rate;
      departures.push({f.arrival + f.holding, i});
      prev_max = current_max();
      trace.max_load_series.emplace_back(f.arrival, prev_max);
    }
  }
  advance_to(std::max(prev_time, window_end));

  const double span = window_end - window_begin;
  if (span > 0) {
    trace.window_avg_max = avg_acc / span;
    for (double& v : trace.link_time_avg) v /= span;
  }
  return trace;
}

std::string trace_csv(const SimTrace& trace) {
  std::string out = "time,max_link_load\n";
  for (const auto& [time, mu] : trace.max_load_series) {
    out += fmt_double(time) + "," + fmt_double(mu) + "\n";
  }
  out += "# window," + fmt_double(trace.window_begin) + "," +
         fmt_double(trace.window_end) + "\n";
  out += "# window_avg_max," + fmt_double(trace.window_avg_max) + "\n";
  return out;
}

}  // namespace kpath
