#include "kpath/loadmodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "kpath/error.hpp"
#include "kpath/plan.hpp"
#include "kpath/shortest.hpp"

namespace kpath {

namespace {

// Upper bound on reduction blocks; a pure function of the problem size so
// results do not depend on the thread count.
constexpr size_t kMaxReduceBlocks = 64;

std::string fmt_double(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

// Demands grouped per destination, in ascending destination order.
struct PerDestination {
  NodeId dst;
  std::vector<std::pair<NodeId, double>> sources;
};

std::vector<PerDestination> group_by_destination(const TrafficMatrix& m) {
  std::vector<TrafficMatrix::Entry> entries = m.entries();
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.dst < b.dst; });
  std::vector<PerDestination> groups;
  for (const auto& e : entries) {
    if (groups.empty() || groups.back().dst != e.dst) {
      groups.push_back({e.dst, {}});
    }
    groups.back().sources.emplace_back(e.src, e.demand);
  }
  return groups;
}

// Adds the fluid ECMP loads of every flow toward one destination.
void propagate_destination(const Topology& t, const PerDestination& group,
                           std::vector<double>& loads) {
  const ShortestPathTree tree = shortest_tree(t, group.dst);
  const std::vector<std::vector<LinkId>> dag = ecmp_dag(t, tree);

  std::vector<double> amount(t.node_count(), 0.0);
  for (auto [src, demand] : group.sources) amount[src] = demand;

  // Nodes in decreasing distance: every DAG edge goes strictly downhill.
  std::vector<NodeId> order(t.node_count());
  std::iota(order.begin(), order.end(), NodeId{0});
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    return tree.dist[a] > tree.dist[b];
  });

  for (NodeId v : order) {
    if (amount[v] <= 0 || v == group.dst) continue;
    const auto& outs = dag[v];
    const double share = amount[v] / static_cast<double>(outs.size());
    for (LinkId e : outs) {
      loads[e] += share;
      amount[t.link(e).dst] += share;
    }
  }
}

// Deterministic blocked reduction: groups are processed in fixed blocks that
// are summed in block order, so the result does not depend on thread count.
template <class Fn>
std::vector<double> blocked_sum(size_t link_count, size_t n_items, Fn per_item,
                                bool parallel) {
  std::vector<double> total(link_count, 0.0);
  if (n_items == 0) return total;
  if (!parallel) {
    for (size_t i = 0; i < n_items; ++i) per_item(i, total);
    return total;
  }
  const size_t n_blocks = std::min(n_items, kMaxReduceBlocks);
  const size_t block_size = (n_items + n_blocks - 1) / n_blocks;
  std::vector<std::vector<double>> block(n_blocks);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < static_cast<long>(n_blocks); ++b) {
    try {
      block[b].assign(link_count, 0.0);
      const size_t lo = static_cast<size_t>(b) * block_size;
      const size_t hi = std::min(lo + block_size, n_items);
      for (size_t i = lo; i < hi; ++i) per_item(i, block[b]);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
  for (const auto& part : block) {
    for (size_t e = 0; e < link_count; ++e) total[e] += part[e];
  }
  return total;
}

LoadLedger ecmp_impl(const Topology& t, const TrafficMatrix& m, bool parallel) {
  const auto groups = group_by_destination(m);
  auto loads = blocked_sum(
      t.link_count(), groups.size(),
      [&](size_t i, std::vector<double>& acc) {
        propagate_destination(t, groups[i], acc);
      },
      parallel);
  LoadLedger ledger(t);
  for (LinkId e = 0; e < t.link_count(); ++e) ledger.add(e, loads[e]);
  return ledger;
}

LoadLedger plan_loads_impl(const Topology& t, const TrafficMatrix& m,
                           const MultipathPlan& plan, bool parallel) {
  const auto& entries = m.entries();
  auto loads = blocked_sum(
      t.link_count(), entries.size(),
      [&](size_t i, std::vector<double>& acc) {
        const auto& e = entries[i];
        const MultipathPlan::FlowPaths* fp = plan.find(e.src, e.dst);
        if (fp == nullptr || fp->paths.empty()) {
          fail("plan has no paths for flow " + t.node_name(e.src) + " -> " +
               t.node_name(e.dst));
        }
        const double share = e.demand / static_cast<double>(fp->paths.size());
        for (const Path& p : fp->paths) {
          for (LinkId l : p.links) acc[l] += share;
        }
      },
      parallel);
  LoadLedger ledger(t);
  for (LinkId e = 0; e < t.link_count(); ++e) ledger.add(e, loads[e]);
  return ledger;
}

}  // namespace

void LoadLedger::add_path(const Path& p, double amount) {
  for (LinkId e : p.links) load_[e] += amount;
}

double LoadLedger::max_utilization() const {
  double m = 0;
  for (LinkId e = 0; e < load_.size(); ++e) m = std::max(m, utilization(e));
  return m;
}

LoadLedger ecmp_loads(const Topology& t, const TrafficMatrix& m) {
  return ecmp_impl(t, m, true);
}

LoadLedger ecmp_loads_serial(const Topology& t, const TrafficMatrix& m) {
  return ecmp_impl(t, m, false);
}

LoadLedger plan_loads(const Topology& t, const TrafficMatrix& m,
                      const MultipathPlan& plan) {
  return plan_loads_impl(t, m, plan, true);
}

LoadLedger plan_loads_serial(const Topology& t, const TrafficMatrix& m,
                             const MultipathPlan& plan) {
  return plan_loads_impl(t, m, plan, false);
}

LoadReport report(const LoadLedger& ledger) {
  const Topology& t = ledger.topology();
  LoadReport r;
  r.rows.reserve(t.link_count());
  for (LinkId e = 0; e < t.link_count(); ++e) {
    const Link& l = t.link(e);
    r.rows.push_back({e, ledger.load(e), l.capacity, ledger.utilization(e)});
  }
  std::stable_sort(r.rows.begin(), r.rows.end(), [](const auto& a, const auto& b) {
    return a.utilization < b.utilization;
  });
  r.sorted_utilizations.reserve(r.rows.size());
  for (const auto& row : r.rows) r.sorted_utilizations.push_back(row.utilization);
  r.max_utilization = r.rows.empty() ? 0.0 : r.sorted_utilizations.back();
  return r;
}

std::string report_csv(const LoadReport& r, const Topology& t) {
  std::string out = "rank,link_src,link_dst,load,capacity,utilization\n";
  size_t rank = 1;
  for (const auto& row : r.rows) {
    const Link& l = t.link(row.link);
    out += std::to_string(rank++) + "," + t.node_name(l.src) + "," +
           t.node_name(l.dst) + "," + fmt_double(row.load) + "," +
           fmt_double(row.capacity) + "," + fmt_double(row.utilization) + "\n";
  }
  return out;
}

std::string report_curve(const LoadReport& r) {
  std::string out;
  size_t rank = 1;
  for (double u : r.sorted_utilizations) {
    out += std::to_string(rank++) + " " + fmt_double(u) + "\n";
  }
  return out;
}

}  // namespace kpath
