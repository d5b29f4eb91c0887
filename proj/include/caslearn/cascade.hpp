// cascade.hpp
//   In-memory cascade graph: a rooted diffusion tree with per-node adoption
//   times, plus the pure queries everything else is built on. Graphs are
//   immutable after construction and safe to share across threads.

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace caslearn {

// One adoption event. The root has time 0 and no parent; every other node
// names the user it adopted from.
struct Adoption {
  std::string user;
  double time = 0.0;                  // hours (or dataset-native unit) since root publication
  std::optional<std::string> parent;  // absent only for the root
};

struct GraphStats {
  std::vector<int> degree;       // undirected tree degree, per node index
  std::vector<int> depth;        // root-to-node hop distance
  std::vector<int> leaves;       // node indices with no children
  double mean_path_length = 0.0; // mean depth over non-root nodes; 0 for a single node
};

class CascadeGraph {
 public:
  CascadeGraph() = default;

  const std::string& id() const { return id_; }
  double pub_time() const { return pub_time_; }

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Adoption>& nodes() const { return nodes_; }
  const Adoption& node(int i) const { return nodes_[static_cast<size_t>(i)]; }

  // -1 for the root
  int parent_of(int i) const { return parent_[static_cast<size_t>(i)]; }
  const std::vector<int>& children_of(int i) const { return children_[static_cast<size_t>(i)]; }
  int root() const { return 0; }

  int degree(int i) const {
    return static_cast<int>(children_[static_cast<size_t>(i)].size()) + (parent_[static_cast<size_t>(i)] >= 0 ? 1 : 0);
  }

  friend CascadeGraph build_graph(std::vector<Adoption> adoptions, std::string id, double pub_time);

 private:
  std::string id_;
  double pub_time_ = 0.0;
  std::vector<Adoption> nodes_;               // ascending by time, ties by input order; root first
  std::vector<int> parent_;                   // index into nodes_, -1 for root
  std::vector<std::vector<int>> children_;    // index into nodes_
};

// Validates and canonicalizes: nodes time-sorted (stable), parent indices
// resolved, tree checked (single root, no dangling parents, no cycles,
// non-negative times, parent time <= child time).
CascadeGraph build_graph(std::vector<Adoption> adoptions, std::string id, double pub_time);

// Induced subtree on nodes with time < t_o; the root is always retained.
CascadeGraph observe(const CascadeGraph& g, double t_o);

// Node count at the prediction horizon: |{v : v.time <= t_p}|, root included.
int popularity(const CascadeGraph& g, double t_p);

GraphStats graph_stats(const CascadeGraph& g);

}  // namespace caslearn
