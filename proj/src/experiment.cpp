#include "kpath/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kpath/error.hpp"
#include "kpath/flowsim.hpp"
#include "kpath/loadmodel.hpp"

namespace kpath {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

double theta_from_json(const ordered_json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kThetaInf;
    fail("theta must be a number or \"inf\"");
  }
  return j.get<double>();
}

ordered_json theta_to_json(double theta) {
  if (std::isfinite(theta)) return theta;
  return "inf";
}

std::string resolve(const std::string& base_dir, const std::string& path) {
  fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (fs::path(base_dir) / p).string();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text,
                                         const std::string& base_dir) {
  ordered_json j;
  try {
    j = ordered_json::parse(json_text);
  } catch (const std::exception& e) {
    fail(std::string("config parse error: ") + e.what());
  }
  ExperimentConfig cfg;
  try {
    const auto& jt = j.at("topology");
    cfg.topology.kind = jt.at("kind").get<std::string>();
    if (cfg.topology.kind == "xgft") {
      cfg.topology.levels = jt.at("levels").get<int>();
      cfg.topology.children = jt.at("children").get<std::vector<int>>();
      cfg.topology.parents = jt.at("parents").get<std::vector<int>>();
    } else if (cfg.topology.kind == "irregular") {
      cfg.topology.nodes = jt.at("nodes").get<int>();
      cfg.topology.degree = jt.at("degree").get<double>();
      cfg.topology.seed = jt.value("seed", uint64_t{0});
    } else if (cfg.topology.kind == "file") {
      cfg.topology.file = resolve(base_dir, jt.at("file").get<std::string>());
    } else {
      fail("unknown topology kind '" + cfg.topology.kind + "'");
    }

    const auto& jm = j.at("traffic");
    cfg.traffic.kind = jm.at("kind").get<std::string>();
    if (cfg.traffic.kind == "random" || cfg.traffic.kind == "skewed") {
      cfg.traffic.seed = jm.value("seed", uint64_t{0});
    }
    if (cfg.traffic.kind == "skewed") {
      cfg.traffic.hot_fraction = jm.value("hot_fraction", 0.2);
      cfg.traffic.hot_share = jm.value("hot_share", 0.8);
    } else if (cfg.traffic.kind == "file") {
      cfg.traffic.file = resolve(base_dir, jm.at("file").get<std::string>());
    } else if (cfg.traffic.kind != "uniform" && cfg.traffic.kind != "random") {
      fail("unknown traffic kind '" + cfg.traffic.kind + "'");
    }

    const auto& jp = j.at("planner");
    cfg.planner.adaptive = jp.value("adaptive", false);
    cfg.planner.k = jp.at("k").get<int>();
    cfg.planner.theta = theta_from_json(jp.at("theta"));
    cfg.planner.cost.kind =
        cost_kind_from_string(jp.value("cost", std::string("max")));
    cfg.planner.cost.exponent = jp.value("convex_exponent", 2.0);
    cfg.planner.finetune = jp.value("finetune", false);
    cfg.planner.finetune_rounds = jp.value("finetune_rounds", 100);

    if (j.contains("seeds")) {
      cfg.seeds = j.at("seeds").get<std::vector<uint64_t>>();
      if (cfg.seeds.empty()) fail("seeds must not be empty");
    }
    if (j.contains("sweep_k")) {
      cfg.sweep_k = j.at("sweep_k").get<std::vector<int>>();
    }
    if (j.contains("simulate") && !j.at("simulate").is_null()) {
      const auto& js = j.at("simulate");
      ExperimentConfig::SimSpec sim;
      sim.mean_holding = js.value("mean_holding", 10.0);
      sim.flow_rate = js.value("flow_rate", 0.0);
      sim.horizon = js.value("horizon", 100.0);
      cfg.simulate = sim;
    }
    cfg.out_dir = j.value("out_dir", std::string());
    if (!cfg.out_dir.empty()) cfg.out_dir = resolve(base_dir, cfg.out_dir);
  } catch (const ordered_json::exception& e) {
    fail(std::string("config structure error: ") + e.what());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), fs::path(path).parent_path().string());
}

std::string experiment_config_json(const ExperimentConfig& cfg) {
  ordered_json j;
  ordered_json jt;
  jt["kind"] = cfg.topology.kind;
  if (cfg.topology.kind == "xgft") {
    jt["levels"] = cfg.topology.levels;
    jt["children"] = cfg.topology.children;
    jt["parents"] = cfg.topology.parents;
  } else if (cfg.topology.kind == "irregular") {
    jt["nodes"] = cfg.topology.nodes;
    jt["degree"] = cfg.topology.degree;
    jt["seed"] = cfg.topology.seed;
  } else {
    jt["file"] = cfg.topology.file;
  }
  j["topology"] = std::move(jt);

  ordered_json jm;
  jm["kind"] = cfg.traffic.kind;
  if (cfg.traffic.kind == "random" || cfg.traffic.kind == "skewed") {
    jm["seed"] = cfg.traffic.seed;
  }
  if (cfg.traffic.kind == "skewed") {
    jm["hot_fraction"] = cfg.traffic.hot_fraction;
    jm["hot_share"] = cfg.traffic.hot_share;
  }
  if (cfg.traffic.kind == "file") jm["file"] = cfg.traffic.file;
  j["traffic"] = std::move(jm);

  ordered_json jp;
  jp["adaptive"] = cfg.planner.adaptive;
  jp["k"] = cfg.planner.k;
  jp["theta"] = theta_to_json(cfg.planner.theta);
  jp["cost"] = cost_kind_to_string(cfg.planner.cost.kind);
  if (cfg.planner.cost.kind == CostKind::convex_util) {
    jp["convex_exponent"] = cfg.planner.cost.exponent;
  }
  jp["finetune"] = cfg.planner.finetune;
  jp["finetune_rounds"] = cfg.planner.finetune_rounds;
  j["planner"] = std::move(jp);

  j["seeds"] = cfg.seeds;
  if (!cfg.sweep_k.empty()) j["sweep_k"] = cfg.sweep_k;
  if (cfg.simulate) {
    ordered_json js;
    js["mean_holding"] = cfg.simulate->mean_holding;
    js["flow_rate"] = cfg.simulate->flow_rate;
    js["horizon"] = cfg.simulate->horizon;
    j["simulate"] = std::move(js);
  }
  return j.dump(2) + "\n";
}

std::string experiment_config_hash(const ExperimentConfig& cfg) {
  // FNV-1a over the canonical config dump (out_dir excluded by construction).
  const std::string text = experiment_config_json(cfg);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  if (out_dir.empty()) fail("experiment needs an output directory");

  // Resolve inputs.
  Topology topo;
  if (cfg.topology.kind == "xgft") {
    topo = make_xgft(cfg.topology.levels, cfg.topology.children, cfg.topology.parents);
  } else if (cfg.topology.kind == "irregular") {
    topo = make_irregular(cfg.topology.nodes, cfg.topology.degree, cfg.topology.seed);
  } else {
    topo = load_topology_file(cfg.topology.file);
  }

  TrafficMatrix tm;
  if (cfg.traffic.kind == "uniform") {
    tm = uniform_matrix(topo);
  } else if (cfg.traffic.kind == "random") {
    tm = random_matrix(topo, cfg.traffic.seed);
  } else if (cfg.traffic.kind == "skewed") {
    tm = skewed_matrix(topo, cfg.traffic.hot_fraction, cfg.traffic.hot_share,
                       cfg.traffic.seed);
  } else {
    tm = load_traffic_file(cfg.traffic.file, topo);
  }

  const std::string hash = experiment_config_hash(cfg);
  const std::string stamp = "# config " + hash + "\n";

  // Compute everything before writing anything.
  std::vector<std::pair<std::string, std::string>> outputs;
  outputs.emplace_back("config.json", experiment_config_json(cfg));
  outputs.emplace_back("topo.txt", stamp + save_topology(topo));
  outputs.emplace_back("traffic.csv", stamp + save_traffic(tm, topo));

  const LoadLedger ecmp = ecmp_loads(topo, tm);
  outputs.emplace_back("ecmp_loads.csv", stamp + report_csv(report(ecmp), topo));
  outputs.emplace_back("ecmp_loads.curve", stamp + report_curve(report(ecmp)));

  for (uint64_t seed : cfg.seeds) {
    const std::string prefix = "seed" + std::to_string(seed) + "_";

    MultipathPlan plan =
        cfg.planner.adaptive
            ? plan_adaptive_k(topo, tm, cfg.planner.k, cfg.planner.theta,
                              cfg.planner.cost, seed)
            : plan_fixed_k(topo, tm, cfg.planner.k, cfg.planner.theta,
                           cfg.planner.cost, seed);
    if (cfg.planner.finetune) {
      plan = finetune(topo, tm, plan, cfg.planner.theta, cfg.planner.finetune_rounds);
    }

    {
      ordered_json pj = ordered_json::parse(plan_to_json(plan, topo));
      pj["config_hash"] = hash;
      outputs.emplace_back(prefix + "plan.json", pj.dump(2) + "\n");
    }
    const LoadReport plan_report = report(plan_loads(topo, tm, plan));
    outputs.emplace_back(prefix + "plan_loads.csv",
                         stamp + report_csv(plan_report, topo));
    outputs.emplace_back(prefix + "plan_loads.curve",
                         stamp + report_curve(plan_report));

    if (!cfg.sweep_k.empty()) {
      std::string csv = stamp + "k,max_utilization\n";
      for (int k : cfg.sweep_k) {
        MultipathPlan pk =
            cfg.planner.adaptive
                ? plan_adaptive_k(topo, tm, k, cfg.planner.theta, cfg.planner.cost,
                                  seed)
                : plan_fixed_k(topo, tm, k, cfg.planner.theta, cfg.planner.cost,
                               seed);
        if (cfg.planner.finetune) {
          pk = finetune(topo, tm, pk, cfg.planner.theta, cfg.planner.finetune_rounds);
        }
        char buf[64];
        snprintf(buf, sizeof buf, "%d,%.12g\n", k,
                 plan_loads(topo, tm, pk).max_utilization());
        csv += buf;
      }
      outputs.emplace_back(prefix + "sweep_k.csv", csv);
    }

    if (cfg.simulate) {
      const double flow_rate = cfg.simulate->flow_rate > 0
                                   ? cfg.simulate->flow_rate
                                   : tm.max_demand() / 20.0;
      const auto flows = generate_flows(tm, cfg.simulate->mean_holding, flow_rate,
                                        cfg.simulate->horizon, seed);
      const SimTrace trace =
          simulate(topo, RoutingPolicy::plan_policy(plan), flows, seed,
                   0.2 * cfg.simulate->horizon, 0.8 * cfg.simulate->horizon);
      outputs.emplace_back(prefix + "trace.csv", stamp + trace_csv(trace));
    }
  }

  // All computation succeeded; write the artifact set.
  fs::create_directories(out_dir);
  for (const auto& [name, content] : outputs) {
    const fs::path path = fs::path(out_dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot write '" + path.string() + "'");
    out << content;
  }
}

}  // namespace kpath
