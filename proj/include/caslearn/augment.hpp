// augment.hpp
//   Diffusion-simulating perturbations of observed cascade graphs. AugSIM
//   adds nodes by degree-proportional attractiveness and prunes leaves by a
//   degree-proportional removal probability; AugRWR keeps the subtree
//   visited by a restarting random walk from the root.

#pragma once

#include <cstdint>
#include <string>

#include "caslearn/cascade.hpp"
#include "caslearn/dataset.hpp"
#include "caslearn/rng.hpp"

namespace caslearn {

// absolute: expected added (and removed) node count per graph equals eta.
// per_node: expectation scales with the node count, eta * |V|.
enum class StrengthMode : uint8_t { absolute, per_node };

struct AugSimParams {
  double eta = 0.1;
  double theta_t = 0.5;  // weight between cascade-local and dataset-global adoption time
  double lambda = 1.0;   // exponential rate of the global adoption time, fitted from data
  StrengthMode strength_mode = StrengthMode::absolute;

  void validate() const;  // eta > 0, theta_t in [0, 1], lambda > 0
};

struct AugRwrParams {
  double restart_prob = 0.2;
  double walk_budget_factor = 3.0;  // at most factor * |V| steps

  void validate() const;  // restart_prob in (0, 1), factor >= 0
};

enum class AugStrategy : uint8_t { aug_sim, aug_rwr, aug_sim_plus_rwr };

struct AugmentParams {
  AugStrategy strategy = AugStrategy::aug_sim;
  AugSimParams sim;
  AugRwrParams rwr;
};

struct ViewPair {
  CascadeGraph view1;
  CascadeGraph view2;
};

// Exponential MLE over all non-root adoption times in the dataset
// (labeled and unlabeled pools): lambda = 1 / mean.
double fit_global_rate(const CascadeDataset& ds);

// Node-add probability: eta * degree(j) / sum of degrees, clamped to [0, 1].
double attractiveness(const CascadeGraph& g, int node, const AugSimParams& params);

// Adoption time of a new child of a node adopted at t_parent:
// t_parent + theta_t * t_local + (1 - theta_t) * Exp(lambda), clamped to
// [t_parent, t_o].
double new_adoption_time(double t_parent, double t_local, const AugSimParams& params, double t_o,
                         Rng& rng);

// Leaf-removal probability: eta * degree(parent(leaf)) / sum over leaves of
// degree(parent(.)), clamped to [0, 1]. The leaf set and degrees are those
// of the graph passed in (the post-add graph during aug_sim).
double removal_prob(const CascadeGraph& g, int leaf, const AugSimParams& params);

struct AugSimStats {
  int added = 0;
  int removed = 0;
};

// One Bernoulli(a_j) add trial per original node, then one Bernoulli(r_j)
// removal trial per leaf of the expanded graph. The root is never removed.
CascadeGraph aug_sim(const CascadeGraph& g, const AugSimParams& params, double t_o, Rng& rng,
                     AugSimStats* stats = nullptr);

// Random walk with restart from the root, transition probability
// degree(v) / sum of neighbor degrees, budget floor(factor * |V|) steps;
// returns the subtree induced on visited nodes.
CascadeGraph aug_rwr(const CascadeGraph& g, const AugRwrParams& params, Rng& rng);

// Two independent augmentations of the same cascade (one per strategy side
// for the combined mode), seeded per (run_seed, cascade id, view index).
ViewPair make_views(const CascadeGraph& g, const AugmentParams& params, double t_o,
                    uint64_t run_seed, uint64_t salt = 0, AugSimStats* stats1 = nullptr,
                    AugSimStats* stats2 = nullptr);

}  // namespace caslearn
