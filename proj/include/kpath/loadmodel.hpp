#pragma once

#include <string>
#include <vector>

#include "kpath/kpaths.hpp"
#include "kpath/topology.hpp"
#include "kpath/traffic.hpp"

namespace kpath {

struct MultipathPlan;

/// Per-link assigned load. Single writer during construction; read-only after.
class LoadLedger {
 public:
  explicit LoadLedger(const Topology& t) : topo_(&t), load_(t.link_count(), 0.0) {}

  const Topology& topology() const { return *topo_; }
  double load(LinkId e) const { return load_[e]; }
  double utilization(LinkId e) const { return load_[e] / topo_->link(e).capacity; }
  const std::vector<double>& loads() const { return load_; }

  void add(LinkId e, double delta) { load_[e] += delta; }
  void add_path(const Path& p, double amount);

  double max_utilization() const;

 private:
  const Topology* topo_;
  std::vector<double> load_;
};

struct LoadReport {
  struct Row {
    LinkId link;
    double load;
    double capacity;
    double utilization;
  };
  std::vector<Row> rows;  // ascending utilization
  std::vector<double> sorted_utilizations;
  double max_utilization = 0;
};

/// Fluid ECMP: per destination, propagate demands down the shortest-path DAG,
/// splitting evenly across next hops at every node. The default build runs
/// destinations in parallel with a fixed block reduction, so results are
/// identical for any thread count; the serial variant is the reference
/// implementation kept for testing.
LoadLedger ecmp_loads(const Topology& t, const TrafficMatrix& m);
LoadLedger ecmp_loads_serial(const Topology& t, const TrafficMatrix& m);

/// Even-split plan evaluation: each flow spreads its demand equally over its
/// planned paths. Parallel over flows (same determinism scheme) + serial
/// reference.
LoadLedger plan_loads(const Topology& t, const TrafficMatrix& m,
                      const MultipathPlan& plan);
LoadLedger plan_loads_serial(const Topology& t, const TrafficMatrix& m,
                             const MultipathPlan& plan);

LoadReport report(const LoadLedger& ledger);

/// CSV columns: rank,link_src,link_dst,load,capacity,utilization.
std::string report_csv(const LoadReport& r, const Topology& t);

/// gnuplot-friendly sorted-load curve: "<rank> <utilization>" per line.
std::string report_curve(const LoadReport& r);

}  // namespace kpath
