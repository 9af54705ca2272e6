#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kpath/plan.hpp"
#include "kpath/topology.hpp"
#include "kpath/traffic.hpp"

namespace kpath {

/// Fully resolved description of one experiment run. A run writes its
/// resolved config (with hash) next to its outputs so results are
/// reproducible; all randomness flows from the seeds recorded here.
struct ExperimentConfig {
  struct TopoSpec {
    std::string kind;  // xgft | irregular | file
    int levels = 0;
    std::vector<int> children;
    std::vector<int> parents;
    int nodes = 0;
    double degree = 0;
    uint64_t seed = 0;
    std::string file;  // resolved to an absolute-ish path at parse time
  };
  struct TrafficSpec {
    std::string kind;  // uniform | random | skewed | file
    uint64_t seed = 0;
    double hot_fraction = 0.2;
    double hot_share = 0.8;
    std::string file;
  };
  struct PlannerSpec {
    bool adaptive = false;
    int k = 4;
    double theta = 0.25;
    CostFunction cost;
    bool finetune = false;
    int finetune_rounds = 100;
  };
  struct SimSpec {
    double mean_holding = 10;
    double flow_rate = 0;  // 0: default to max demand / 20
    double horizon = 100;
  };

  TopoSpec topology;
  TrafficSpec traffic;
  PlannerSpec planner;
  std::vector<uint64_t> seeds{1};
  std::vector<int> sweep_k;       // empty: no sweep
  std::optional<SimSpec> simulate;
  std::string out_dir;            // may be overridden on the command line
};

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& base_dir);
ExperimentConfig load_experiment_config(const std::string& path);

/// Canonical JSON for the resolved config; its FNV-1a hash stamps every
/// output file.
std::string experiment_config_json(const ExperimentConfig& cfg);
std::string experiment_config_hash(const ExperimentConfig& cfg);

/// Runs the full pipeline: topology, traffic, ECMP baseline, one plan (and
/// report) per seed, optional k sweep and flow simulation. All artifacts are
/// computed first and written only when every step has succeeded, so a failed
/// run leaves no partial outputs.
void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace kpath
