#include "caslearn/cascade.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "caslearn/error.hpp"

namespace caslearn {

CascadeGraph build_graph(std::vector<Adoption> adoptions, std::string id, double pub_time) {
  if (adoptions.empty()) raise(Errc::empty_set, "build_graph: empty adoption list");

  // stable sort by time keeps input order on ties (the sequence encoder
  // depends on a deterministic order)
  std::stable_sort(adoptions.begin(), adoptions.end(),
                   [](const Adoption& a, const Adoption& b) { return a.time < b.time; });

  int root_idx = -1;
  for (size_t i = 0; i < adoptions.size(); ++i) {
    const Adoption& a = adoptions[i];
    if (a.time < 0.0) raise(Errc::negative_time, "build_graph: negative adoption time for '" + a.user + "'");
    if (!a.parent) {
      if (root_idx >= 0) raise(Errc::multiple_roots, "build_graph: more than one parentless adoption");
      root_idx = static_cast<int>(i);
    }
  }
  if (root_idx < 0) raise(Errc::cycle_detected, "build_graph: no root (every node has a parent)");
  if (adoptions[static_cast<size_t>(root_idx)].time != 0.0)
    raise(Errc::invalid_time_order, "build_graph: root must have time 0");
  if (root_idx != 0) {
    // nodes tied at time 0 can precede the root in input order; rotate the
    // root to the front, preserving order otherwise
    Adoption root = std::move(adoptions[static_cast<size_t>(root_idx)]);
    adoptions.erase(adoptions.begin() + root_idx);
    adoptions.insert(adoptions.begin(), std::move(root));
  }

  std::unordered_map<std::string, int> index_of;
  index_of.reserve(adoptions.size());
  for (size_t i = 0; i < adoptions.size(); ++i)
    if (!index_of.emplace(adoptions[i].user, static_cast<int>(i)).second)
      raise(Errc::malformed_line, "build_graph: duplicate node id '" + adoptions[i].user + "'");

  CascadeGraph g;
  g.id_ = std::move(id);
  g.pub_time_ = pub_time;
  g.parent_.assign(adoptions.size(), -1);
  g.children_.assign(adoptions.size(), {});
  for (size_t i = 1; i < adoptions.size(); ++i) {
    const Adoption& a = adoptions[i];
    auto it = index_of.find(*a.parent);
    if (it == index_of.end())
      raise(Errc::dangling_parent, "build_graph: parent '" + *a.parent + "' of '" + a.user + "' not present");
    g.parent_[i] = it->second;
    g.children_[static_cast<size_t>(it->second)].push_back(static_cast<int>(i));
  }

  // connectivity from the root; anything unreached sits on a parent cycle
  std::vector<int> stack{0};
  size_t reached = 0;
  std::vector<char> seen(adoptions.size(), 0);
  seen[0] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    ++reached;
    for (int c : g.children_[static_cast<size_t>(v)]) {
      if (!seen[static_cast<size_t>(c)]) {
        seen[static_cast<size_t>(c)] = 1;
        stack.push_back(c);
      }
    }
  }
  if (reached != adoptions.size())
    raise(Errc::cycle_detected, "build_graph: " + std::to_string(adoptions.size() - reached) +
                                    " node(s) unreachable from the root");

  // a parent must precede its child in adoption order; for distinct times
  // this is the parent.time <= child.time invariant, for ties it pins the
  // input order
  for (size_t i = 1; i < adoptions.size(); ++i)
    if (g.parent_[i] >= static_cast<int>(i))
      raise(Errc::invalid_time_order, "build_graph: parent '" + *adoptions[i].parent +
                                          "' does not precede child '" + adoptions[i].user + "'");

  g.nodes_ = std::move(adoptions);
  return g;
}

CascadeGraph observe(const CascadeGraph& g, double t_o) {
  std::vector<Adoption> kept;
  kept.reserve(g.nodes().size());
  kept.push_back(g.node(0));
  for (int i = 1; i < g.size(); ++i)
    if (g.node(i).time < t_o) kept.push_back(g.node(i));
  // parent time <= child time, so no kept node can lose its parent
  return build_graph(std::move(kept), g.id(), g.pub_time());
}

int popularity(const CascadeGraph& g, double t_p) {
  int count = 0;
  for (const Adoption& a : g.nodes())
    if (a.time <= t_p) ++count;
  return count;
}

GraphStats graph_stats(const CascadeGraph& g) {
  GraphStats s;
  const int n = g.size();
  s.degree.resize(static_cast<size_t>(n));
  s.depth.assign(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    s.degree[static_cast<size_t>(i)] = g.degree(i);
    if (g.children_of(i).empty()) s.leaves.push_back(i);
    // parents precede children in node order, so the parent's depth is
    // already final here
    if (g.parent_of(i) >= 0) s.depth[static_cast<size_t>(i)] = s.depth[static_cast<size_t>(g.parent_of(i))] + 1;
  }
  if (n > 1) {
    long long total = std::accumulate(s.depth.begin(), s.depth.end(), 0LL);
    s.mean_path_length = static_cast<double>(total) / static_cast<double>(n - 1);
  }
  return s;
}

}  // namespace caslearn
