// Compares the OpenMP kernels against their serial reference implementations:
// batch shortest-path trees, fluid ECMP, per-flow candidate enumeration and
// plan evaluation.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kpath/kpaths.hpp"
#include "kpath/loadmodel.hpp"
#include "kpath/plan.hpp"
#include "kpath/shortest.hpp"
#include "kpath/topology.hpp"
#include "kpath/traffic.hpp"

using namespace kpath;

namespace {

double now_ms() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch())
      .count();
}

template <class Fn>
double time_best_of(int reps, Fn&& fn) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const double t0 = now_ms();
    fn();
    best = std::min(best, now_ms() - t0);
  }
  return best;
}

void row(const char* name, double serial_ms, double parallel_ms) {
  printf("%-24s %10.1f ms %10.1f ms %8.2fx\n", name, serial_ms, parallel_ms,
         serial_ms / parallel_ms);
}

}  // namespace

int main(int argc, char** argv) {
  int leaves_children = 8, leaves_width = 16;
  int reps = 3;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--small") {
      leaves_children = 5;
      leaves_width = 10;
    } else if (arg == "--reps" && i + 1 < argc) {
      reps = std::atoi(argv[++i]);
    } else {
      fprintf(stderr, "usage: %s [--small] [--reps N]\n", argv[0]);
      return 1;
    }
  }

  const Topology topo =
      make_xgft(2, {leaves_children, leaves_width}, {leaves_children, leaves_children});
  const TrafficMatrix tm = random_matrix(topo, 1);
  std::vector<std::pair<NodeId, NodeId>> flows;
  for (const auto& e : tm.entries()) flows.emplace_back(e.src, e.dst);
  std::vector<NodeId> targets(topo.endpoints());

#ifdef _OPENMP
  printf("threads: %d\n", omp_get_max_threads());
#else
  printf("threads: 1 (built without OpenMP)\n");
#endif
  printf("topology: %zu nodes, %zu links, %zu flows\n\n", topo.node_count(),
         topo.link_count(), flows.size());
  printf("%-24s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

  row("shortest_trees",
      time_best_of(reps, [&] { shortest_trees_serial(topo, targets); }),
      time_best_of(reps, [&] { shortest_trees(topo, targets); }));

  row("ecmp_loads", time_best_of(reps, [&] { ecmp_loads_serial(topo, tm); }),
      time_best_of(reps, [&] { ecmp_loads(topo, tm); }));

  row("candidate_paths",
      time_best_of(reps, [&] { candidate_paths_serial(topo, flows, 0.0, 100); }),
      time_best_of(reps, [&] { candidate_paths(topo, flows, 0.0, 100); }));

  const MultipathPlan plan = plan_fixed_k(topo, tm, 4, 0.0, CostFunction{}, 1);
  row("plan_loads",
      time_best_of(reps, [&] { plan_loads_serial(topo, tm, plan); }),
      time_best_of(reps, [&] { plan_loads(topo, tm, plan); }));

  return 0;
}
