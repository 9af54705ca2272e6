#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kpath/plan.hpp"
#include "kpath/topology.hpp"
#include "kpath/traffic.hpp"

namespace kpath {

/// One CBR flow: arrives, holds a fixed rate on one pinned path, departs.
struct FlowEvent {
  NodeId src;
  NodeId dst;
  double rate;
  double arrival;
  double holding;
};

/// Event-timestamped maximum-link-load trace plus windowed steady-state
/// summaries. The max-load series changes only at arrival/departure instants.
struct SimTrace {
  std::vector<std::pair<double, double>> max_load_series;  // (time, max util)
  double window_begin = 0;
  double window_end = 0;
  double window_avg_max = 0;          // time average of the max series
  std::vector<double> link_time_avg;  // per-link time-averaged load in window
};

/// Poisson arrivals per pair at rate demand / (flow_rate * mean_holding), so
/// the expected instantaneous offered load per pair equals its matrix entry.
/// Holding times are i.i.d. exponential(mean_holding); every flow carries
/// flow_rate. Arrivals span [0, horizon].
std::vector<FlowEvent> generate_flows(const TrafficMatrix& m, double mean_holding,
                                      double flow_rate, double horizon,
                                      uint64_t seed);

/// How arriving flows are pinned to a path: uniformly over the flow's planned
/// path set, or by an independent uniform next-hop choice at every node of the
/// shortest-path DAG (per-flow ECMP).
struct RoutingPolicy {
  enum class Kind { plan, ecmp };
  Kind kind = Kind::ecmp;
  const MultipathPlan* plan = nullptr;

  static RoutingPolicy ecmp_policy() { return {Kind::ecmp, nullptr}; }
  static RoutingPolicy plan_policy(const MultipathPlan& p) {
    return {Kind::plan, &p};
  }
};

/// Discrete-event simulation: at each arrival pick a path per the policy and
/// add the flow's rate along it; subtract at departure. Records the maximum
/// link utilization after every event and time-averages over
/// [window_begin, window_end].
SimTrace simulate(const Topology& t, const RoutingPolicy& policy,
                  const std::vector<FlowEvent>& flows, uint64_t seed,
                  double window_begin, double window_end);

/// CSV `time,max_link_load` rows followed by a `# window_avg_max,<v>` summary.
std::string trace_csv(const SimTrace& trace);

}  // namespace kpath
