#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kpath/kpaths.hpp"
#include "kpath/loadmodel.hpp"
#include "kpath/topology.hpp"
#include "kpath/traffic.hpp"

namespace kpath {

/// Candidate cap handed to the enumerator by the planners. Never binding at
/// theta = 0 on the topologies used here.
inline constexpr size_t kPlannerCandidateCap = 100;

enum class CostKind { max_util, sum_util, convex_util };

struct CostFunction {
  CostKind kind = CostKind::max_util;
  double exponent = 2.0;  // convex_util only, must be > 1
};

CostKind cost_kind_from_string(const std::string& s);
std::string cost_kind_to_string(CostKind k);

struct PlanParams {
  int k = 1;
  double theta = 0;
  CostFunction cost;
  uint64_t seed = 0;
  std::string algorithm = "fixed";  // fixed | adaptive | oracle
  bool finetuned = false;
};

/// Selected paths per flow, even split across them.
struct MultipathPlan {
  struct FlowPaths {
    NodeId src;
    NodeId dst;
    std::vector<Path> paths;  // in selection order
  };
  std::vector<FlowPaths> flows;  // sorted by (src, dst)
  PlanParams params;

  const FlowPaths* find(NodeId src, NodeId dst) const;
};

/// Resulting utilization of path p if `increment` more traffic were assigned
/// to it, aggregated per the cost kind (max / sum / convex power sum).
double path_cost(const CostFunction& cost, const LoadLedger& ledger, const Path& p,
                 double increment);

/// Greedy placement: flows in seeded random order; per flow, k distinct
/// minimum-cost candidates, each pick seeing the previous picks' load. Ties on
/// cost break by shorter length, then by a seeded uniform choice. When fewer
/// than k candidates exist, all of them are used and the per-path share is
/// demand / |candidates|.
MultipathPlan plan_fixed_k(const Topology& t, const TrafficMatrix& m, int k,
                           double theta, const CostFunction& cost, uint64_t seed);

/// Round-robin variant that grows each flow's path set only while the extra
/// path does not raise the maximum utilization among the flow's own links
/// (ties accept; strict_accept switches the comparison to strictly-lower).
MultipathPlan plan_adaptive_k(const Topology& t, const TrafficMatrix& m, int k_max,
                              double theta, const CostFunction& cost, uint64_t seed,
                              bool strict_accept = false);

/// Hot-link substitution passes: per round, recompute the hot links and apply
/// the first substitution that lowers a hot link without pushing any increased
/// link to the old maximum. Stops at a fixpoint or after max_rounds. Never
/// increases the maximum utilization.
MultipathPlan finetune(const Topology& t, const TrafficMatrix& m,
                       const MultipathPlan& plan, double theta,
                       int max_rounds = 100);

/// Exhaustive even-split optimum over per-flow candidate subsets of size <= k.
/// Only for tiny instances; throws when the combination count exceeds the
/// guard.
MultipathPlan oracle_best_plan(const Topology& t, const TrafficMatrix& m, int k,
                               double theta, size_t max_combinations = 2000000);

std::string plan_to_json(const MultipathPlan& plan, const Topology& t);
MultipathPlan plan_from_json(const std::string& text, const Topology& t);
MultipathPlan plan_from_json_file(const std::string& path, const Topology& t);

}  // namespace kpath
