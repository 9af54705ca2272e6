#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kpath/topology.hpp"

namespace kpath {

/// Demand per ordered source-destination pair. Entries are kept sorted by
/// (src, dst) and hold strictly positive demands; zero-demand pairs are
/// dropped. Immutable in practice once generated.
class TrafficMatrix {
 public:
  struct Entry {
    NodeId src;
    NodeId dst;
    double demand;
  };

  void set(NodeId src, NodeId dst, double demand);

  const std::vector<Entry>& entries() const { return entries_; }
  size_t flow_count() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  double total() const;
  double max_demand() const;

  /// nullptr when the pair has no (positive) demand.
  const Entry* find(NodeId src, NodeId dst) const;

  /// Sorts entries and rejects duplicate keys / self pairs.
  void finalize();

 private:
  std::vector<Entry> entries_;
  bool dirty_ = false;
};

/// One unit of traffic for every ordered endpoint pair.
TrafficMatrix uniform_matrix(const Topology& t);

/// Demand i.i.d. uniform on (0,1) per ordered endpoint pair.
TrafficMatrix random_matrix(const Topology& t, uint64_t seed);

/// Uniform draws rescaled so the hot-sender -> hot-receiver block carries
/// exactly hot_share of the total. Hot senders and receivers are drawn
/// independently (overlap allowed), ceil(hot_fraction * |endpoints|) each.
TrafficMatrix skewed_matrix(const Topology& t, double hot_fraction,
                            double hot_share, uint64_t seed);

/// Each entry multiplied by an independent U(lo, hi) factor; key set unchanged.
TrafficMatrix perturb_matrix(const TrafficMatrix& m, double lo, double hi,
                             uint64_t seed);

/// CSV with header `src,dst,demand`, node names as in the topology file.
std::string save_traffic(const TrafficMatrix& m, const Topology& t);
TrafficMatrix load_traffic(const std::string& text, const Topology& t);
TrafficMatrix load_traffic_file(const std::string& path, const Topology& t);

}  // namespace kpath
