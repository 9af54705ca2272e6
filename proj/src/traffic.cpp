#include "kpath/traffic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "kpath/error.hpp"
#include "kpath/rng.hpp"

namespace kpath {

namespace {

std::string fmt_double(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, p);
}

void require_two_endpoints(const Topology& t) {
  if (t.endpoints().size() < 2) fail("topology has fewer than 2 endpoints");
}

}  // namespace

void TrafficMatrix::set(NodeId src, NodeId dst, double demand) {
  if (src == dst) fail("traffic entry with identical source and destination");
  if (demand < 0) fail("negative traffic demand");
  if (demand == 0) return;
  entries_.push_back({src, dst, demand});
  dirty_ = true;
}

double TrafficMatrix::total() const {
  double s = 0;
  for (const Entry& e : entries_) s += e.demand;
  return s;
}

double TrafficMatrix::max_demand() const {
  double m = 0;
  for (const Entry& e : entries_) m = std::max(m, e.demand);
  return m;
}

const TrafficMatrix::Entry* TrafficMatrix::find(NodeId src, NodeId dst) const {
  auto it = std::lower_bound(
      entries_.begin(), entries_.end(), std::make_pair(src, dst),
      [](const Entry& e, const std::pair<NodeId, NodeId>& key) {
        return std::make_pair(e.src, e.dst) < key;
      });
  if (it == entries_.end() || it->src != src || it->dst != dst) return nullptr;
  return &*it;
}

void TrafficMatrix::finalize() {
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return std::make_pair(a.src, a.dst) < std::make_pair(b.src, b.dst);
  });
  for (size_t i = 1; i < entries_.size(); ++i) {
    if (entries_[i - 1].src == entries_[i].src &&
        entries_[i - 1].dst == entries_[i].dst) {
      fail("duplicate traffic entry");
    }
  }
  dirty_ = false;
}

TrafficMatrix uniform_matrix(const Topology& t) {
  require_two_endpoints(t);
  TrafficMatrix m;
  for (NodeId s : t.endpoints()) {
    for (NodeId d : t.endpoints()) {
      if (s != d) m.set(s, d, 1.0);
    }
  }
  m.finalize();
  return m;
}

TrafficMatrix random_matrix(const Topology& t, uint64_t seed) {
  require_two_endpoints(t);
  Rng rng(seed);
  TrafficMatrix m;
  for (NodeId s : t.endpoints()) {
    for (NodeId d : t.endpoints()) {
      if (s != d) m.set(s, d, rng.u01());
    }
  }
  m.finalize();
  return m;
}

TrafficMatrix skewed_matrix(const Topology& t, double hot_fraction,
                            double hot_share, uint64_t seed) {
  require_two_endpoints(t);
  if (!(hot_fraction > 0 && hot_fraction < 1)) fail("hot_fraction must be in (0,1)");
  if (!(hot_share > 0 && hot_share < 1)) fail("hot_share must be in (0,1)");

  const std::vector<NodeId>& eps = t.endpoints();
  const size_t h =
      static_cast<size_t>(std::ceil(hot_fraction * static_cast<double>(eps.size())));
  if (h == 0) fail("hot set empty after rounding");

  Rng rng(seed);
  auto draw_hot = [&]() {
    std::vector<NodeId> pool = eps;
    rng.shuffle(pool);
    pool.resize(h);
    return std::unordered_set<NodeId>(pool.begin(), pool.end());
  };
  const auto hot_senders = draw_hot();
  const auto hot_receivers = draw_hot();

  TrafficMatrix m;
  double hot_sum = 0, cold_sum = 0;
  for (NodeId s : eps) {
    for (NodeId d : eps) {
      if (s == d) continue;
      const double x = rng.u01();
      m.set(s, d, x);
      if (hot_senders.count(s) && hot_receivers.count(d)) {
        hot_sum += x;
      } else {
        cold_sum += x;
      }
    }
  }
  if (hot_sum == 0) fail("hot set empty after rounding");

  if (cold_sum > 0) {
    const double total = hot_sum + cold_sum;
    const double hot_scale = hot_share * total / hot_sum;
    const double cold_scale = (1.0 - hot_share) * total / cold_sum;
    TrafficMatrix scaled;
    for (const auto& e : m.entries()) {
      const bool hot = hot_senders.count(e.src) && hot_receivers.count(e.dst);
      scaled.set(e.src, e.dst, e.demand * (hot ? hot_scale : cold_scale));
    }
    scaled.finalize();
    return scaled;
  }
  // Hot block covers every pair; nothing to rescale.
  m.finalize();
  return m;
}

TrafficMatrix perturb_matrix(const TrafficMatrix& m, double lo, double hi,
                             uint64_t seed) {
  if (lo < 0) fail("perturbation lower bound must be non-negative");
  if (lo > hi) fail("perturbation bounds out of order");
  Rng rng(seed);
  TrafficMatrix out;
  for (const auto& e : m.entries()) {
    out.set(e.src, e.dst, e.demand * rng.uniform(lo, hi));
  }
  out.finalize();
  return out;
}

std::string save_traffic(const TrafficMatrix& m, const Topology& t) {
  std::string out = "src,dst,demand\n";
  for (const auto& e : m.entries()) {
    out += t.node_name(e.src) + "," + t.node_name(e.dst) + "," +
           fmt_double(e.demand) + "\n";
  }
  return out;
}

TrafficMatrix load_traffic(const std::string& text, const Topology& t) {
  TrafficMatrix m;
  size_t line_no = 0;
  size_t pos = 0;
  bool saw_header = false;
  while (pos <= text.size()) {
    const size_t eol = text.find('\n', pos);
    std::string line = text.substr(pos, eol == std::string::npos ? std::string::npos
                                                                 : eol - pos);
    pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != "src,dst,demand") {
        fail("line " + std::to_string(line_no) + ": expected header src,dst,demand");
      }
      saw_header = true;
      continue;
    }
    std::istringstream ls(line);
    std::string src, dst, dem;
    if (!std::getline(ls, src, ',') || !std::getline(ls, dst, ',') ||
        !std::getline(ls, dem)) {
      fail("line " + std::to_string(line_no) + ": expected src,dst,demand");
    }
    double demand = 0;
    auto [p, ec] = std::from_chars(dem.data(), dem.data() + dem.size(), demand);
    if (ec != std::errc() || p != dem.data() + dem.size()) {
      fail("line " + std::to_string(line_no) + ": bad demand '" + dem + "'");
    }
    try {
      m.set(t.node_by_name(src), t.node_by_name(dst), demand);
    } catch (const Error& e) {
      fail("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!saw_header) fail("traffic file has no header line");
  try {
    m.finalize();
  } catch (const Error& e) {
    fail(std::string("traffic file: ") + e.what());
  }
  return m;
}

TrafficMatrix load_traffic_file(const std::string& path, const Topology& t) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open traffic file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return load_traffic(ss.str(), t);
  } catch (const Error& e) {
    fail(path + ": " + e.what());
  }
}

}  // namespace kpath
