#include "caslearn/augment.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "caslearn/error.hpp"

namespace caslearn {

namespace {

double effective_eta(const AugSimParams& params, int node_count) {
  return params.strength_mode == StrengthMode::per_node ? params.eta * node_count : params.eta;
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

double local_adoption_time(const CascadeGraph& g) {
  double total = 0.0;
  for (const Adoption& a : g.nodes()) total += a.time;
  return total / g.size();
}

}  // namespace

void AugSimParams::validate() const {
  if (!(eta > 0.0)) raise(Errc::config_error, "augment: eta must be positive");
  if (!(theta_t >= 0.0) || !(theta_t <= 1.0))
    raise(Errc::config_error, "augment: theta_t must lie in [0, 1]");
  if (!(lambda > 0.0)) raise(Errc::config_error, "augment: lambda must be positive");
}

void AugRwrParams::validate() const {
  if (!(restart_prob > 0.0) || !(restart_prob < 1.0))
    raise(Errc::config_error, "augment: restart probability must lie in (0, 1)");
  if (!(walk_budget_factor >= 0.0))
    raise(Errc::config_error, "augment: walk budget factor must be non-negative");
}

double fit_global_rate(const CascadeDataset& ds) {
  double total = 0.0;
  long count = 0;
  auto accumulate = [&](const CascadeGraph& g) {
    for (int i = 1; i < g.size(); ++i) {
      total += g.node(i).time;
      ++count;
    }
  };
  for (const LabeledCascade& lc : ds.labeled) accumulate(lc.observed);
  for (const CascadeGraph& g : ds.unlabeled) accumulate(g);
  if (count == 0) raise(Errc::no_adoptions, "fit_global_rate: no non-root adoptions in dataset");
  if (total <= 0.0) raise(Errc::no_adoptions, "fit_global_rate: adoption times sum to zero");
  return static_cast<double>(count) / total;
}

double attractiveness(const CascadeGraph& g, int node, const AugSimParams& params) {
  if (g.size() < 2) raise(Errc::singleton_graph, "attractiveness: graph has no edges");
  const double deg_sum = 2.0 * (g.size() - 1);
  return clamp01(effective_eta(params, g.size()) * g.degree(node) / deg_sum);
}

double new_adoption_time(double t_parent, double t_local, const AugSimParams& params, double t_o,
                         Rng& rng) {
  double t_global = params.theta_t >= 1.0 ? 0.0 : rng.exponential(params.lambda);
  double t = t_parent + params.theta_t * t_local + (1.0 - params.theta_t) * t_global;
  return std::clamp(t, t_parent, t_o);
}

double removal_prob(const CascadeGraph& g, int leaf, const AugSimParams& params) {
  if (!g.children_of(leaf).empty() || leaf == g.root())
    raise(Errc::not_a_leaf, "removal_prob: node is not a removable leaf");
  double denom = 0.0;
  for (int i = 1; i < g.size(); ++i)
    if (g.children_of(i).empty()) denom += g.degree(g.parent_of(i));
  return clamp01(effective_eta(params, g.size()) * g.degree(g.parent_of(leaf)) / denom);
}

CascadeGraph aug_sim(const CascadeGraph& g, const AugSimParams& params, double t_o, Rng& rng,
                     AugSimStats* stats) {
  params.validate();
  if (g.size() < 2) raise(Errc::singleton_graph, "aug_sim: need at least two nodes");

  const double t_local = local_adoption_time(g);
  std::unordered_set<std::string> used_ids;
  for (const Adoption& a : g.nodes()) used_ids.insert(a.user);

  // add pass: one trial per original node, new node becomes its child
  std::vector<Adoption> expanded(g.nodes().begin(), g.nodes().end());
  long fresh = 0;
  for (int j = 0; j < g.size(); ++j) {
    const double a_j = attractiveness(g, j, params);
    if (!rng.bernoulli(a_j)) continue;
    Adoption added;
    do {
      added.user = "a" + std::to_string(fresh++);
    } while (used_ids.count(added.user));
    used_ids.insert(added.user);
    added.parent = g.node(j).user;
    added.time = new_adoption_time(g.node(j).time, t_local, params, t_o, rng);
    expanded.push_back(std::move(added));
  }
  CascadeGraph mid = build_graph(std::move(expanded), g.id(), g.pub_time());

  // removal pass over the post-add leaf set; probabilities are fixed before
  // any removal happens
  std::vector<char> removed(static_cast<size_t>(mid.size()), 0);
  for (int i = 1; i < mid.size(); ++i) {
    if (!mid.children_of(i).empty()) continue;
    if (rng.bernoulli(removal_prob(mid, i, params))) removed[static_cast<size_t>(i)] = 1;
  }
  if (stats) {
    stats->added = mid.size() - g.size();
    stats->removed = 0;
    for (char r : removed) stats->removed += r;
  }
  std::vector<Adoption> kept;
  kept.reserve(static_cast<size_t>(mid.size()));
  for (int i = 0; i < mid.size(); ++i)
    if (!removed[static_cast<size_t>(i)]) kept.push_back(mid.node(i));
  return build_graph(std::move(kept), g.id(), g.pub_time());
}

CascadeGraph aug_rwr(const CascadeGraph& g, const AugRwrParams& params, Rng& rng) {
  params.validate();
  const long budget = static_cast<long>(std::floor(params.walk_budget_factor * g.size()));
  std::vector<char> visited(static_cast<size_t>(g.size()), 0);
  visited[0] = 1;
  int cur = 0;
  std::vector<int> neighbors;
  for (long step = 0; step < budget; ++step) {
    if (rng.uniform01() <= params.restart_prob) {
      cur = 0;
      continue;
    }
    // neighbors: parent plus children; transition mass proportional to the
    // neighbor's own degree
    neighbors.clear();
    if (g.parent_of(cur) >= 0) neighbors.push_back(g.parent_of(cur));
    for (int c : g.children_of(cur)) neighbors.push_back(c);
    if (neighbors.empty()) continue;  // singleton root
    double total = 0.0;
    for (int v : neighbors) total += g.degree(v);
    double pick = rng.uniform01() * total;
    int next = neighbors.back();
    double acc = 0.0;
    for (int v : neighbors) {
      acc += g.degree(v);
      if (pick < acc) {
        next = v;
        break;
      }
    }
    cur = next;
    visited[static_cast<size_t>(cur)] = 1;
  }
  std::vector<Adoption> kept;
  for (int i = 0; i < g.size(); ++i)
    if (visited[static_cast<size_t>(i)]) kept.push_back(g.node(i));
  return build_graph(std::move(kept), g.id(), g.pub_time());
}

ViewPair make_views(const CascadeGraph& g, const AugmentParams& params, double t_o,
                    uint64_t run_seed, uint64_t salt, AugSimStats* stats1, AugSimStats* stats2) {
  auto one_view = [&](int view_index, AugSimStats* stats) {
    Rng rng(derive_seed(run_seed, g.id(), static_cast<uint64_t>(view_index), salt));
    bool use_sim = params.strategy == AugStrategy::aug_sim ||
                   (params.strategy == AugStrategy::aug_sim_plus_rwr && view_index == 1);
    return use_sim ? aug_sim(g, params.sim, t_o, rng, stats) : aug_rwr(g, params.rwr, rng);
  };
  return ViewPair{one_view(1, stats1), one_view(2, stats2)};
}

}  // namespace caslearn
