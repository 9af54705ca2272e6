// kpath: multipath traffic-engineering planner and evaluation harness.

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kpath/error.hpp"
#include "kpath/experiment.hpp"
#include "kpath/flowsim.hpp"
#include "kpath/kpaths.hpp"
#include "kpath/loadmodel.hpp"
#include "kpath/plan.hpp"
#include "kpath/rng.hpp"
#include "kpath/topology.hpp"
#include "kpath/traffic.hpp"

namespace {

namespace fs = std::filesystem;
using namespace kpath;

struct GlobalOpts {
  uint64_t seed = 1;
  bool seed_set = false;
  std::string out_dir;
  bool quiet = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const GlobalOpts& g, const std::string& out,
                  const std::string& content) {
  if (out.empty() || out == "-") {
    std::cout << content;
    return;
  }
  fs::path path(out);
  if (!g.out_dir.empty() && path.is_relative()) path = fs::path(g.out_dir) / path;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail("cannot write '" + path.string() + "'");
  f << content;
  if (!g.quiet) std::cerr << "wrote " << path.string() << "\n";
}

double parse_theta(const std::string& s) {
  if (s == "inf" || s == "INF" || s == "Inf") return kThetaInf;
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || v < 0) {
    throw CLI::ValidationError("--theta", "expected a non-negative number or 'inf'");
  }
  return v;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    int v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) {
      throw CLI::ValidationError(what, "expected a comma-separated integer list");
    }
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError(what, "empty list");
  return out;
}

TrafficMatrix load_matrix(const std::string& path, const Topology& t) {
  return load_traffic(read_file(path), t);
}

struct PlannerCliOpts {
  int k = 4;
  std::string theta = "0.25";
  std::string cost = "max";
  double convex_exponent = 2.0;
  bool adaptive = false;
  bool do_finetune = false;
  int finetune_rounds = 100;

  void attach(CLI::App* cmd) {
    cmd->add_option("--k", k, "Maximum number of paths per flow")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--theta", theta, "Stretch threshold (number or 'inf')");
    cmd->add_option("--cost", cost, "Path cost function")
        ->check(CLI::IsMember({"max", "sum", "convex"}));
    cmd->add_option("--convex-exponent", convex_exponent,
                    "Exponent for the convex cost");
    cmd->add_flag("--adaptive-k", adaptive, "Grow path sets only while helpful");
    cmd->add_flag("--finetune", do_finetune, "Apply hot-link substitution passes");
    cmd->add_option("--finetune-rounds", finetune_rounds,
                    "Maximum fine-tuning rounds");
  }

  MultipathPlan build(const Topology& t, const TrafficMatrix& m,
                      uint64_t seed) const {
    const double th = parse_theta(theta);
    const CostFunction cf{cost_kind_from_string(cost), convex_exponent};
    MultipathPlan plan = adaptive ? plan_adaptive_k(t, m, k, th, cf, seed)
                                  : plan_fixed_k(t, m, k, th, cf, seed);
    if (do_finetune) plan = finetune(t, m, plan, th, finetune_rounds);
    return plan;
  }
};

// Standalone CSV transform: scales every demand by U(lo, hi) in file order,
// no topology needed.
std::string perturb_csv(const std::string& text, double lo, double hi,
                        uint64_t seed) {
  if (lo < 0 || lo > hi) fail("perturbation bounds out of order");
  Rng rng(seed);
  std::string out = "src,dst,demand\n";
  std::istringstream ss(text);
  std::string line;
  size_t line_no = 0;
  bool saw_header = false;
  while (std::getline(ss, line)) {
    ++line_no;
    if (const size_t hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
      line.pop_back();
    }
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != "src,dst,demand") {
        fail("line " + std::to_string(line_no) + ": expected header src,dst,demand");
      }
      saw_header = true;
      continue;
    }
    const size_t c1 = line.find(',');
    const size_t c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      fail("line " + std::to_string(line_no) + ": expected src,dst,demand");
    }
    const std::string dem = line.substr(c2 + 1);
    double demand = 0;
    auto [p, ec] = std::from_chars(dem.data(), dem.data() + dem.size(), demand);
    if (ec != std::errc() || p != dem.data() + dem.size() || demand < 0) {
      fail("line " + std::to_string(line_no) + ": bad demand '" + dem + "'");
    }
    char buf[32];
    auto [q, ec2] = std::to_chars(buf, buf + sizeof buf,
                                  demand * rng.uniform(lo, hi));
    (void)ec2;
    out += line.substr(0, c2 + 1) + std::string(buf, q) + "\n";
  }
  if (!saw_header) fail("traffic file has no header line");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multipath traffic-engineering planner and evaluation harness"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--seed", g.seed, "Default seed for seeded subcommands")
      ->each([&](const std::string&) { g.seed_set = true; });
  app.add_option("--out-dir", g.out_dir, "Directory for relative output paths");
  app.add_flag("--quiet", g.quiet, "Suppress informational messages");

  // gen-topo
  auto* gen_topo = app.add_subcommand("gen-topo", "Generate a topology file");
  std::string gt_kind, gt_children = "3,6", gt_parents = "3,3", gt_out;
  int gt_levels = 2, gt_nodes = 25;
  double gt_degree = 3.5;
  uint64_t gt_seed = 0;
  bool gt_seed_set = false;
  gen_topo->add_option("--kind", gt_kind, "xgft or irregular")
      ->required()
      ->check(CLI::IsMember({"xgft", "irregular"}));
  gen_topo->add_option("--levels", gt_levels, "XGFT levels");
  gen_topo->add_option("--children", gt_children, "XGFT children per level (CSV)");
  gen_topo->add_option("--parents", gt_parents, "XGFT parents per level (CSV)");
  gen_topo->add_option("--nodes", gt_nodes, "Irregular node count");
  gen_topo->add_option("--degree", gt_degree, "Irregular average degree");
  gen_topo->add_option("--seed", gt_seed, "Irregular generator seed")
      ->each([&](const std::string&) { gt_seed_set = true; });
  gen_topo->add_option("-o,--out", gt_out, "Output file (default stdout)");

  // gen-traffic
  auto* gen_traffic = app.add_subcommand("gen-traffic", "Generate a traffic matrix");
  std::string tr_kind, tr_topo, tr_out;
  double tr_hot_fraction = 0.2, tr_hot_share = 0.8;
  uint64_t tr_seed = 0;
  bool tr_seed_set = false;
  gen_traffic->add_option("--kind", tr_kind, "uniform, random or skewed")
      ->required()
      ->check(CLI::IsMember({"uniform", "random", "skewed"}));
  gen_traffic->add_option("--topo", tr_topo, "Topology file")->required();
  gen_traffic->add_option("--seed", tr_seed, "Generator seed")
      ->each([&](const std::string&) { tr_seed_set = true; });
  gen_traffic->add_option("--hot-fraction", tr_hot_fraction,
                          "Skewed: fraction of hot senders/receivers");
  gen_traffic->add_option("--hot-share", tr_hot_share,
                          "Skewed: share of traffic in the hot block");
  gen_traffic->add_option("-o,--out", tr_out, "Output file (default stdout)");

  // perturb
  auto* perturb_cmd = app.add_subcommand("perturb", "Scale each demand by U(lo,hi)");
  std::string pe_in, pe_out;
  double pe_lo = 0.5, pe_hi = 1.5;
  uint64_t pe_seed = 0;
  bool pe_seed_set = false;
  perturb_cmd->add_option("--in", pe_in, "Input traffic CSV")->required();
  perturb_cmd->add_option("--lo", pe_lo, "Lower factor bound");
  perturb_cmd->add_option("--hi", pe_hi, "Upper factor bound");
  perturb_cmd->add_option("--seed", pe_seed, "Seed")
      ->each([&](const std::string&) { pe_seed_set = true; });
  perturb_cmd->add_option("-o,--out", pe_out, "Output file (default stdout)");

  // paths
  auto* paths_cmd = app.add_subcommand("paths", "Enumerate paths for one pair");
  std::string pa_topo, pa_src, pa_dst, pa_theta = "0.25";
  size_t pa_max = 50;
  paths_cmd->add_option("--topo", pa_topo, "Topology file")->required();
  paths_cmd->add_option("--src", pa_src, "Source node name")->required();
  paths_cmd->add_option("--dst", pa_dst, "Destination node name")->required();
  paths_cmd->add_option("--theta", pa_theta, "Stretch threshold (number or 'inf')");
  paths_cmd->add_option("--max", pa_max, "Maximum paths to print");

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "Select multipaths for every flow");
  std::string pl_topo, pl_tm, pl_out;
  uint64_t pl_seed = 0;
  bool pl_seed_set = false;
  PlannerCliOpts pl_opts;
  plan_cmd->add_option("--topo", pl_topo, "Topology file")->required();
  plan_cmd->add_option("--tm", pl_tm, "Traffic matrix CSV")->required();
  pl_opts.attach(plan_cmd);
  plan_cmd->add_option("--seed", pl_seed, "Planner seed")
      ->each([&](const std::string&) { pl_seed_set = true; });
  plan_cmd->add_option("-o,--out", pl_out, "Output plan JSON (default stdout)");

  // ecmp
  auto* ecmp_cmd = app.add_subcommand("ecmp", "Fluid ECMP load report");
  std::string ec_topo, ec_tm, ec_out;
  ecmp_cmd->add_option("--topo", ec_topo, "Topology file")->required();
  ecmp_cmd->add_option("--tm", ec_tm, "Traffic matrix CSV")->required();
  ecmp_cmd->add_option("-o,--out", ec_out, "Output CSV (default stdout)");

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Load report for a stored plan");
  std::string ev_topo, ev_tm, ev_plan, ev_out;
  eval_cmd->add_option("--topo", ev_topo, "Topology file")->required();
  eval_cmd->add_option("--tm", ev_tm, "Traffic matrix CSV")->required();
  eval_cmd->add_option("--plan", ev_plan, "Plan JSON")->required();
  eval_cmd->add_option("-o,--out", ev_out, "Output CSV (default stdout)");

  // sweep-k
  auto* sweep_cmd = app.add_subcommand("sweep-k", "Max utilization across k values");
  std::string sw_topo, sw_tm, sw_kvalues = "1,2,4,8", sw_out;
  uint64_t sw_seed = 0;
  bool sw_seed_set = false;
  PlannerCliOpts sw_opts;
  sweep_cmd->add_option("--topo", sw_topo, "Topology file")->required();
  sweep_cmd->add_option("--tm", sw_tm, "Traffic matrix CSV")->required();
  sweep_cmd->add_option("--k-values", sw_kvalues, "Comma-separated k values");
  sw_opts.attach(sweep_cmd);
  sweep_cmd->add_option("--seed", sw_seed, "Planner seed")
      ->each([&](const std::string&) { sw_seed_set = true; });
  sweep_cmd->add_option("-o,--out", sw_out, "Output CSV (default stdout)");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Discrete-event flow simulation");
  std::string si_topo, si_tm, si_plan, si_policy = "plan", si_out;
  double si_holding = 10.0, si_rate = 0.0, si_horizon = 100.0;
  uint64_t si_seed = 0;
  bool si_seed_set = false;
  sim_cmd->add_option("--topo", si_topo, "Topology file")->required();
  sim_cmd->add_option("--tm", si_tm, "Traffic matrix CSV")->required();
  sim_cmd->add_option("--plan", si_plan, "Plan JSON (for --policy plan)");
  sim_cmd->add_option("--policy", si_policy, "plan or ecmp")
      ->check(CLI::IsMember({"plan", "ecmp"}));
  sim_cmd->add_option("--mean-holding", si_holding, "Mean flow holding time");
  sim_cmd->add_option("--flow-rate", si_rate,
                      "Per-flow rate (default: max demand / 20)");
  sim_cmd->add_option("--horizon", si_horizon, "Arrivals span [0, horizon]");
  sim_cmd->add_option("--seed", si_seed, "Simulation seed")
      ->each([&](const std::string&) { si_seed_set = true; });
  sim_cmd->add_option("-o,--out", si_out, "Output trace CSV (default stdout)");

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "Run a full experiment config");
  std::string ex_config;
  exp_cmd->add_option("--config", ex_config, "Experiment config JSON")->required();

  // Let global options (--seed, --out-dir, --quiet) appear after a subcommand.
  for (CLI::App* sub : app.get_subcommands([](const CLI::App*) { return true; })) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  auto seed_or_global = [&](bool set, uint64_t value) {
    return set ? value : g.seed;
  };

  try {
    if (*gen_topo) {
      Topology t;
      if (gt_kind == "xgft") {
        t = make_xgft(gt_levels, parse_int_list(gt_children, "--children"),
                      parse_int_list(gt_parents, "--parents"));
      } else {
        t = make_irregular(gt_nodes, gt_degree,
                           seed_or_global(gt_seed_set, gt_seed));
      }
      write_output(g, gt_out, save_topology(t));
    } else if (*gen_traffic) {
      const Topology t = load_topology_file(tr_topo);
      TrafficMatrix m;
      const uint64_t seed = seed_or_global(tr_seed_set, tr_seed);
      if (tr_kind == "uniform") {
        m = uniform_matrix(t);
      } else if (tr_kind == "random") {
        m = random_matrix(t, seed);
      } else {
        m = skewed_matrix(t, tr_hot_fraction, tr_hot_share, seed);
      }
      write_output(g, tr_out, save_traffic(m, t));
    } else if (*perturb_cmd) {
      write_output(g, pe_out,
                   perturb_csv(read_file(pe_in), pe_lo, pe_hi,
                               seed_or_global(pe_seed_set, pe_seed)));
    } else if (*paths_cmd) {
      const Topology t = load_topology_file(pa_topo);
      const auto found =
          enumerate_paths(t, t.node_by_name(pa_src), t.node_by_name(pa_dst),
                          parse_theta(pa_theta), pa_max);
      std::string out;
      for (const Path& p : found) {
        for (NodeId v : p.nodes(t)) out += t.node_name(v) + " ";
        char buf[32];
        auto [q, ec] = std::to_chars(buf, buf + sizeof buf, p.length);
        (void)ec;
        out += " " + std::string(buf, q) + "\n";
      }
      std::cout << out;
    } else if (*plan_cmd) {
      const Topology t = load_topology_file(pl_topo);
      const TrafficMatrix m = load_matrix(pl_tm, t);
      const MultipathPlan plan =
          pl_opts.build(t, m, seed_or_global(pl_seed_set, pl_seed));
      write_output(g, pl_out, plan_to_json(plan, t));
    } else if (*ecmp_cmd) {
      const Topology t = load_topology_file(ec_topo);
      const TrafficMatrix m = load_matrix(ec_tm, t);
      write_output(g, ec_out, report_csv(report(ecmp_loads(t, m)), t));
    } else if (*eval_cmd) {
      const Topology t = load_topology_file(ev_topo);
      const TrafficMatrix m = load_matrix(ev_tm, t);
      const MultipathPlan plan = plan_from_json_file(ev_plan, t);
      const LoadReport r = report(plan_loads(t, m, plan));
      write_output(g, ev_out, report_csv(r, t));
      if (!ev_out.empty() && ev_out != "-") {
        write_output(g, fs::path(ev_out).replace_extension(".curve").string(),
                     report_curve(r));
      }
    } else if (*sweep_cmd) {
      const Topology t = load_topology_file(sw_topo);
      const TrafficMatrix m = load_matrix(sw_tm, t);
      const uint64_t seed = seed_or_global(sw_seed_set, sw_seed);
      std::string csv = "k,max_utilization\n";
      for (int k : parse_int_list(sw_kvalues, "--k-values")) {
        PlannerCliOpts opts = sw_opts;
        opts.k = k;
        const MultipathPlan plan = opts.build(t, m, seed);
        char buf[64];
        snprintf(buf, sizeof buf, "%d,%.12g\n", k,
                 plan_loads(t, m, plan).max_utilization());
        csv += buf;
      }
      write_output(g, sw_out, csv);
    } else if (*sim_cmd) {
      const Topology t = load_topology_file(si_topo);
      const TrafficMatrix m = load_matrix(si_tm, t);
      const double rate = si_rate > 0 ? si_rate : m.max_demand() / 20.0;
      const uint64_t seed = seed_or_global(si_seed_set, si_seed);
      const auto flows = generate_flows(m, si_holding, rate, si_horizon, seed);
      MultipathPlan plan;
      RoutingPolicy policy = RoutingPolicy::ecmp_policy();
      if (si_policy == "plan") {
        if (si_plan.empty()) {
          throw CLI::ValidationError("--plan", "required with --policy plan");
        }
        plan = plan_from_json_file(si_plan, t);
        policy = RoutingPolicy::plan_policy(plan);
      }
      const SimTrace trace = simulate(t, policy, flows, seed, 0.2 * si_horizon,
                                      0.8 * si_horizon);
      write_output(g, si_out, trace_csv(trace));
    } else if (*exp_cmd) {
      const ExperimentConfig cfg = load_experiment_config(ex_config);
      std::string out_dir = !g.out_dir.empty() ? g.out_dir : cfg.out_dir;
      if (out_dir.empty()) fail("set out_dir in the config or pass --out-dir");
      run_experiment(cfg, out_dir);
      if (!g.quiet) std::cerr << "experiment written to " << out_dir << "\n";
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
