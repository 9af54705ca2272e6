#include "kpath/plan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "kpath/error.hpp"
#include "kpath/rng.hpp"

namespace kpath {

namespace {

constexpr double kUtilTol = 1e-12;

using ordered_json = nlohmann::ordered_json;

// Sparse load delta over links, accumulated per occurrence.
class Delta {
 public:
  void add(LinkId e, double d) {
    auto [it, fresh] = index_.try_emplace(e, touched_.size());
    if (fresh) touched_.push_back({e, 0.0});
    touched_[it->second].second += d;
  }
  const std::vector<std::pair<LinkId, double>>& entries() const { return touched_; }
  double at(LinkId e) const {
    auto it = index_.find(e);
    return it == index_.end() ? 0.0 : touched_[it->second].second;
  }

 private:
  std::unordered_map<LinkId, size_t> index_;
  std::vector<std::pair<LinkId, double>> touched_;
};

// Minimum-cost candidate; ties break by shorter length, then by a seeded
// uniform choice among the remaining ties.
size_t pick_best(const std::vector<Path>& cands, const std::vector<char>& used,
                 const CostFunction& cost, const LoadLedger& ledger,
                 double increment, Rng& rng) {
  double best_cost = std::numeric_limits<double>::infinity();
  double best_len = std::numeric_limits<double>::infinity();
  std::vector<size_t> ties;
  for (size_t i = 0; i < cands.size(); ++i) {
    if (used[i]) continue;
    const double c = path_cost(cost, ledger, cands[i], increment);
    const double len = cands[i].length;
    if (c < best_cost || (c == best_cost && len < best_len)) {
      best_cost = c;
      best_len = len;
      ties.assign(1, i);
    } else if (c == best_cost && len == best_len) {
      ties.push_back(i);
    }
  }
  if (ties.empty()) fail("pick_best: no unused candidate");
  return ties.size() == 1 ? ties[0] : ties[rng.bounded(ties.size())];
}

std::vector<std::pair<NodeId, NodeId>> flow_pairs(const TrafficMatrix& m) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(m.flow_count());
  for (const auto& e : m.entries()) pairs.emplace_back(e.src, e.dst);
  return pairs;
}

std::vector<size_t> shuffled_indices(size_t n, Rng& rng) {
  std::vector<size_t> idx(n);
  for (size_t i = 0; i < n; ++i) idx[i] = i;
  rng.shuffle(idx);
  return idx;
}

double max_util_over_paths(const LoadLedger& ledger,
                           const std::vector<const Path*>& paths) {
  double m = -std::numeric_limits<double>::infinity();
  for (const Path* p : paths) {
    for (LinkId e : p->links) m = std::max(m, ledger.utilization(e));
  }
  return m;
}

void validate_planner_args(int k, double theta) {
  if (k < 1) fail("k must be at least 1");
  if (theta < 0) fail("theta must be non-negative");
}

// The incrementally maintained ledger must equal a from-scratch recomputation.
void check_ledger_consistency(const Topology& t, const TrafficMatrix& m,
                              const MultipathPlan& plan,
                              const LoadLedger& internal) {
  const LoadLedger fresh = plan_loads_serial(t, m, plan);
  for (LinkId e = 0; e < t.link_count(); ++e) {
    if (std::abs(fresh.load(e) - internal.load(e)) > 1e-9) {
      fail("internal load ledger drifted from recomputation (internal error)");
    }
  }
}

}  // namespace

CostKind cost_kind_from_string(const std::string& s) {
  if (s == "max") return CostKind::max_util;
  if (s == "sum") return CostKind::sum_util;
  if (s == "convex") return CostKind::convex_util;
  fail("unknown cost function '" + s + "' (expected max, sum or convex)");
}

std::string cost_kind_to_string(CostKind k) {
  switch (k) {
    case CostKind::max_util: return "max";
    case CostKind::sum_util: return "sum";
    case CostKind::convex_util: return "convex";
  }
  return "max";
}

const MultipathPlan::FlowPaths* MultipathPlan::find(NodeId src, NodeId dst) const {
  auto it = std::lower_bound(flows.begin(), flows.end(), std::make_pair(src, dst),
                             [](const FlowPaths& f, const std::pair<NodeId, NodeId>& key) {
                               return std::make_pair(f.src, f.dst) < key;
                             });
  if (it == flows.end() || it->src != src || it->dst != dst) return nullptr;
  return &*it;
}

double path_cost(const CostFunction& cost, const LoadLedger& ledger, const Path& p,
                 double increment) {
  if (p.links.empty()) fail("path_cost: empty path");
  if (increment < 0) fail("path_cost: negative increment");
  const Topology& t = ledger.topology();
  double acc = 0.0;
  for (LinkId e : p.links) {
    const double u = (ledger.load(e) + increment) / t.link(e).capacity;
    switch (cost.kind) {
      case CostKind::max_util: acc = std::max(acc, u); break;
      case CostKind::sum_util: acc += u; break;
      case CostKind::convex_util: acc += std::pow(u, cost.exponent); break;
    }
  }
  return acc;
}

MultipathPlan plan_fixed_k(const Topology& t, const TrafficMatrix& m, int k,
                           double theta, const CostFunction& cost, uint64_t seed) {
  validate_planner_args(k, theta);
  const auto pairs = flow_pairs(m);
  const auto cands = candidate_paths(t, pairs, theta, kPlannerCandidateCap);

  MultipathPlan plan;
  plan.params = {k, theta, cost, seed, "fixed", false};
  plan.flows.reserve(pairs.size());
  for (const auto& [s, d] : pairs) plan.flows.push_back({s, d, {}});

  Rng rng(seed);
  LoadLedger ledger(t);
  for (size_t idx : shuffled_indices(pairs.size(), rng)) {
    const auto& entry = m.entries()[idx];
    const std::vector<Path>& candidates = cands[idx];
    if (candidates.empty()) {
      fail("no candidate path for flow " + t.node_name(entry.src) + " -> " +
           t.node_name(entry.dst));
    }
    const size_t k_eff = std::min<size_t>(static_cast<size_t>(k), candidates.size());
    const double increment = entry.demand / static_cast<double>(k_eff);
    std::vector<char> used(candidates.size(), 0);
    for (size_t pick = 0; pick < k_eff; ++pick) {
      const size_t best = pick_best(candidates, used, cost, ledger, increment, rng);
      used[best] = 1;
      ledger.add_path(candidates[best], increment);
      plan.flows[idx].paths.push_back(candidates[best]);
    }
  }
  check_ledger_consistency(t, m, plan, ledger);
  return plan;
}

MultipathPlan plan_adaptive_k(const Topology& t, const TrafficMatrix& m, int k_max,
                              double theta, const CostFunction& cost, uint64_t seed,
                              bool strict_accept) {
  validate_planner_args(k_max, theta);
  const auto pairs = flow_pairs(m);
  const auto cands = candidate_paths(t, pairs, theta, kPlannerCandidateCap);

  MultipathPlan plan;
  plan.params = {k_max, theta, cost, seed, "adaptive", false};
  plan.flows.reserve(pairs.size());
  for (const auto& [s, d] : pairs) plan.flows.push_back({s, d, {}});

  Rng rng(seed);
  LoadLedger ledger(t);
  std::vector<std::vector<char>> used(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) used[i].assign(cands[i].size(), 0);

  for (int round = 0; round < k_max; ++round) {
    for (size_t idx : shuffled_indices(pairs.size(), rng)) {
      const auto& entry = m.entries()[idx];
      const std::vector<Path>& candidates = cands[idx];
      auto& paths = plan.flows[idx].paths;
      if (candidates.empty()) {
        fail("no candidate path for flow " + t.node_name(entry.src) + " -> " +
             t.node_name(entry.dst));
      }
      if (paths.size() == candidates.size()) continue;  // flow exhausted
      const size_t n = paths.size();
      const double increment = entry.demand / static_cast<double>(n + 1);
      const size_t best =
          pick_best(candidates, used[idx], cost, ledger, increment, rng);
      const Path& p = candidates[best];

      bool accept;
      Delta delta;
      if (n == 0) {
        accept = true;  // max over the empty path set counts as +inf
        for (LinkId e : p.links) delta.add(e, entry.demand);
      } else {
        const double respread =
            entry.demand * (1.0 / static_cast<double>(n + 1) -
                            1.0 / static_cast<double>(n));
        for (const Path& q : paths) {
          for (LinkId e : q.links) delta.add(e, respread);
        }
        for (LinkId e : p.links) {
          delta.add(e, entry.demand / static_cast<double>(n + 1));
        }
        std::vector<const Path*> current;
        for (const Path& q : paths) current.push_back(&q);
        const double old_max = max_util_over_paths(ledger, current);
        double new_max = -std::numeric_limits<double>::infinity();
        auto scan = [&](const Path& q) {
          for (LinkId e : q.links) {
            const double u =
                (ledger.load(e) + delta.at(e)) / t.link(e).capacity;
            new_max = std::max(new_max, u);
          }
        };
        for (const Path& q : paths) scan(q);
        scan(p);
        accept = strict_accept ? new_max < old_max - kUtilTol
                               : new_max <= old_max + kUtilTol;
      }
      if (accept) {
        for (auto [e, d] : delta.entries()) ledger.add(e, d);
        used[idx][best] = 1;
        paths.push_back(p);
      }
    }
  }
  check_ledger_consistency(t, m, plan, ledger);
  return plan;
}

MultipathPlan finetune(const Topology& t, const TrafficMatrix& m,
                       const MultipathPlan& plan, double theta, int max_rounds) {
  if (max_rounds < 1) fail("max_rounds must be at least 1");
  if (theta < 0) fail("theta must be non-negative");

  MultipathPlan out = plan;
  out.params.finetuned = true;

  std::vector<std::pair<NodeId, NodeId>> pairs;
  pairs.reserve(out.flows.size());
  std::vector<double> demand(out.flows.size(), 0.0);
  for (size_t i = 0; i < out.flows.size(); ++i) {
    const auto& f = out.flows[i];
    if (f.paths.empty()) fail("finetune: plan flow with empty path set");
    const TrafficMatrix::Entry* e = m.find(f.src, f.dst);
    if (e == nullptr) {
      fail("finetune: plan flow " + t.node_name(f.src) + " -> " +
           t.node_name(f.dst) + " missing from traffic matrix");
    }
    pairs.emplace_back(f.src, f.dst);
    demand[i] = e->demand;
  }
  const auto cands = candidate_paths(t, pairs, theta, kPlannerCandidateCap);

  LoadLedger ledger = plan_loads(t, m, out);
  const double initial_max = ledger.max_utilization();
  Rng rng(Rng::mix(plan.params.seed, 0x66696e65ULL));

  for (int round = 0; round < max_rounds; ++round) {
    const double max_util = ledger.max_utilization();
    if (max_util <= 0) break;
    std::vector<char> hot(t.link_count(), 0);
    for (LinkId e = 0; e < t.link_count(); ++e) {
      if (ledger.utilization(e) >= max_util - kUtilTol) hot[e] = 1;
    }
    auto touches_hot = [&](const Path& p) {
      for (LinkId e : p.links) {
        if (hot[e]) return true;
      }
      return false;
    };

    bool substituted = false;
    for (size_t idx : shuffled_indices(out.flows.size(), rng)) {
      auto& fp = out.flows[idx];
      const double share = demand[idx] / static_cast<double>(fp.paths.size());
      for (size_t pi = 0; pi < fp.paths.size() && !substituted; ++pi) {
        if (!touches_hot(fp.paths[pi])) continue;
        for (const Path& cand : cands[idx]) {
          if (touches_hot(cand)) continue;
          const bool in_plan =
              std::any_of(fp.paths.begin(), fp.paths.end(),
                          [&](const Path& q) { return q == cand; });
          if (in_plan) continue;
          Delta delta;
          for (LinkId e : fp.paths[pi].links) delta.add(e, -share);
          for (LinkId e : cand.links) delta.add(e, share);
          bool ok = true;
          for (auto [e, d] : delta.entries()) {
            if (d <= kUtilTol) continue;
            if ((ledger.load(e) + d) / t.link(e).capacity >= max_util - kUtilTol) {
              ok = false;
              break;
            }
          }
          if (!ok) continue;
          for (auto [e, d] : delta.entries()) ledger.add(e, d);
          fp.paths[pi] = cand;
          substituted = true;
          break;
        }
      }
      if (substituted) break;
    }
    if (!substituted) break;
    if (ledger.max_utilization() > initial_max + 1e-9) {
      fail("finetune raised the maximum utilization (internal error)");
    }
  }
  check_ledger_consistency(t, m, out, ledger);
  return out;
}

MultipathPlan oracle_best_plan(const Topology& t, const TrafficMatrix& m, int k,
                               double theta, size_t max_combinations) {
  validate_planner_args(k, theta);
  if (m.empty()) fail("oracle: empty traffic matrix");
  const auto pairs = flow_pairs(m);
  const auto cands = candidate_paths(t, pairs, theta, kPlannerCandidateCap);

  // All per-flow subsets of size 1..min(k, |candidates|), in deterministic
  // order (by size, then lexicographic index tuple).
  std::vector<std::vector<std::vector<size_t>>> subsets(pairs.size());
  double combo_count = 1;
  for (size_t i = 0; i < pairs.size(); ++i) {
    const size_t n = cands[i].size();
    if (n == 0) {
      fail("no candidate path for flow " + t.node_name(pairs[i].first) + " -> " +
           t.node_name(pairs[i].second));
    }
    const size_t kk = std::min<size_t>(static_cast<size_t>(k), n);
    for (size_t size = 1; size <= kk; ++size) {
      std::vector<size_t> combo(size);
      std::iota(combo.begin(), combo.end(), size_t{0});
      bool more = true;
      while (more) {
        subsets[i].push_back(combo);
        more = false;
        for (size_t j = size; j-- > 0;) {
          if (combo[j] + (size - j) < n) {
            ++combo[j];
            for (size_t l = j + 1; l < size; ++l) combo[l] = combo[l - 1] + 1;
            more = true;
            break;
          }
        }
      }
    }
    combo_count *= static_cast<double>(subsets[i].size());
    if (combo_count > static_cast<double>(max_combinations)) {
      fail("oracle: instance too large (combination count exceeds guard)");
    }
  }

  std::vector<double> loads(t.link_count(), 0.0);
  std::vector<size_t> choice(pairs.size(), 0);
  std::vector<size_t> best_choice;
  double best_max = std::numeric_limits<double>::infinity();

  auto apply = [&](size_t flow, const std::vector<size_t>& subset, double sign) {
    const double share =
        sign * m.entries()[flow].demand / static_cast<double>(subset.size());
    for (size_t ci : subset) {
      for (LinkId e : cands[flow][ci].links) loads[e] += share;
    }
  };

  std::function<void(size_t)> search = [&](size_t flow) {
    if (flow == pairs.size()) {
      double mu = 0;
      for (LinkId e = 0; e < t.link_count(); ++e) {
        mu = std::max(mu, loads[e] / t.link(e).capacity);
      }
      if (mu < best_max - 1e-15) {
        best_max = mu;
        best_choice = choice;
      }
      return;
    }
    for (size_t si = 0; si < subsets[flow].size(); ++si) {
      choice[flow] = si;
      apply(flow, subsets[flow][si], 1.0);
      search(flow + 1);
      apply(flow, subsets[flow][si], -1.0);
    }
  };
  search(0);

  MultipathPlan plan;
  plan.params = {k, theta, CostFunction{}, 0, "oracle", false};
  plan.flows.reserve(pairs.size());
  for (size_t i = 0; i < pairs.size(); ++i) {
    MultipathPlan::FlowPaths fp{pairs[i].first, pairs[i].second, {}};
    for (size_t ci : subsets[i][best_choice[i]]) fp.paths.push_back(cands[i][ci]);
    plan.flows.push_back(std::move(fp));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

std::string plan_to_json(const MultipathPlan& plan, const Topology& t) {
  ordered_json j;
  ordered_json params;
  params["algorithm"] = plan.params.algorithm;
  params["k"] = plan.params.k;
  if (std::isfinite(plan.params.theta)) {
    params["theta"] = plan.params.theta;
  } else {
    params["theta"] = "inf";
  }
  params["cost"] = cost_kind_to_string(plan.params.cost.kind);
  if (plan.params.cost.kind == CostKind::convex_util) {
    params["convex_exponent"] = plan.params.cost.exponent;
  }
  params["seed"] = plan.params.seed;
  params["finetuned"] = plan.params.finetuned;
  j["parameters"] = std::move(params);

  ordered_json flows = ordered_json::array();
  for (const auto& f : plan.flows) {
    ordered_json jf;
    jf["src"] = t.node_name(f.src);
    jf["dst"] = t.node_name(f.dst);
    jf["split"] = 1.0 / static_cast<double>(f.paths.size());
    ordered_json paths = ordered_json::array();
    for (const Path& p : f.paths) {
      ordered_json seq = ordered_json::array();
      for (NodeId v : p.nodes(t)) seq.push_back(t.node_name(v));
      paths.push_back(std::move(seq));
    }
    jf["paths"] = std::move(paths);
    flows.push_back(std::move(jf));
  }
  j["flows"] = std::move(flows);
  return j.dump(2) + "\n";
}

namespace {

LinkId find_link(const Topology& t, NodeId u, NodeId v) {
  for (LinkId e : t.out_links(u)) {
    if (t.link(e).dst == v) return e;
  }
  return kNoLink;
}

}  // namespace

MultipathPlan plan_from_json(const std::string& text, const Topology& t) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const std::exception& e) {
    fail(std::string("plan JSON parse error: ") + e.what());
  }
  MultipathPlan plan;
  try {
    const auto& params = j.at("parameters");
    plan.params.algorithm = params.at("algorithm").get<std::string>();
    plan.params.k = params.at("k").get<int>();
    if (params.at("theta").is_string()) {
      plan.params.theta = kThetaInf;
    } else {
      plan.params.theta = params.at("theta").get<double>();
    }
    plan.params.cost.kind = cost_kind_from_string(params.at("cost").get<std::string>());
    if (params.contains("convex_exponent")) {
      plan.params.cost.exponent = params.at("convex_exponent").get<double>();
    }
    plan.params.seed = params.at("seed").get<uint64_t>();
    plan.params.finetuned = params.at("finetuned").get<bool>();

    for (const auto& jf : j.at("flows")) {
      MultipathPlan::FlowPaths fp;
      fp.src = t.node_by_name(jf.at("src").get<std::string>());
      fp.dst = t.node_by_name(jf.at("dst").get<std::string>());
      for (const auto& seq : jf.at("paths")) {
        Path p;
        p.src = fp.src;
        p.dst = fp.dst;
        std::vector<std::string> names = seq.get<std::vector<std::string>>();
        if (names.size() < 2) fail("plan path with fewer than 2 nodes");
        NodeId prev = t.node_by_name(names.front());
        if (prev != fp.src) fail("plan path does not start at its flow source");
        for (size_t i = 1; i < names.size(); ++i) {
          const NodeId next = t.node_by_name(names[i]);
          const LinkId e = find_link(t, prev, next);
          if (e == kNoLink) {
            fail("plan path uses missing link " + names[i - 1] + " -> " + names[i]);
          }
          p.links.push_back(e);
          p.length += t.link(e).weight;
          prev = next;
        }
        if (prev != fp.dst) fail("plan path does not end at its flow destination");
        fp.paths.push_back(std::move(p));
      }
      if (fp.paths.empty()) fail("plan flow with empty path list");
      plan.flows.push_back(std::move(fp));
    }
  } catch (const ordered_json::exception& e) {
    fail(std::string("plan JSON structure error: ") + e.what());
  }
  std::sort(plan.flows.begin(), plan.flows.end(), [](const auto& a, const auto& b) {
    return std::make_pair(a.src, a.dst) < std::make_pair(b.src, b.dst);
  });
  for (size_t i = 1; i < plan.flows.size(); ++i) {
    if (plan.flows[i - 1].src == plan.flows[i].src &&
        plan.flows[i - 1].dst == plan.flows[i].dst) {
      fail("plan contains the flow " + t.node_name(plan.flows[i].src) + " -> " +
           t.node_name(plan.flows[i].dst) + " twice");
    }
  }
  return plan;
}

MultipathPlan plan_from_json_file(const std::string& path, const Topology& t) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open plan file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return plan_from_json(ss.str(), t);
}

}  // namespace kpath
