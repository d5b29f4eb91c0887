// dataset.hpp
//   Cascade file parsing, labeling, split assignment and synthetic data.
//
//   Canonical line format (one cascade per line, UTF-8, plain or gzip):
//     id<TAB>root_user<TAB>pub_time<TAB>M<TAB>paths
//   where paths is a space-separated list of `u0/u1/.../uk:t` entries: the
//   slash chain is the diffusion path from the root and t is the adoption
//   time of the last user in the chain. The root appears as `u0:0` and M is
//   the number of non-root adoptions.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "caslearn/cascade.hpp"

namespace caslearn {

enum class Split : uint8_t { train = 0, val = 1, test = 2 };

struct ObservationWindow {
  double t_o = 1.0;
  double t_p = 24.0;  // t_p >> t_o
};

struct DatasetConfig {
  ObservationWindow window;
  int min_observed_nodes = 10;
  int max_observed_nodes = 100;
  double dataset_end_time = 0.0;  // absolute timestamp; labels need pub_time + t_p <= end
  double train_fraction = 0.5;
  double val_fraction = 0.1;
  double test_fraction = 0.4;
  uint64_t seed = 1;

  void validate() const;
};

struct LabeledCascade {
  CascadeGraph observed;  // first max_observed_nodes of observe(g, t_o)
  int label = 0;          // popularity(g, t_p) on the untruncated cascade
  Split split = Split::train;
};

struct CascadeDataset {
  DatasetConfig config;
  std::vector<LabeledCascade> labeled;
  std::vector<CascadeGraph> unlabeled;  // observed graphs whose horizon leaves the dataset span

  std::vector<int> split_indices(Split s) const;
  int count(Split s) const { return static_cast<int>(split_indices(s).size()); }
};

CascadeGraph parse_line(const std::string& line);
std::string serialize_cascade(const CascadeGraph& g);

// Filters, truncates, labels and splits a pool of raw cascades.
CascadeDataset assemble_dataset(std::vector<CascadeGraph> cascades, const DatasetConfig& cfg);

// Reads plain or gzip cascade files (detected transparently).
CascadeDataset load_dataset(const std::string& path, const DatasetConfig& cfg);

void save_cascades(const std::string& path, const std::vector<CascadeGraph>& graphs);

// Keeps a seeded uniform subsample of ceil(fraction * N_train) training
// labels; the dropped cascades move to the unlabeled pool. Val/test untouched.
CascadeDataset label_fraction(const CascadeDataset& ds, double fraction, uint64_t seed);

struct SyntheticParams {
  double branching_mean = 3.0;  // scales the heavy-tailed size law
  double time_rate = 0.5;       // exponential rate of parent-to-child delays
  int max_size = 500;
};

// Preferential-attachment diffusion trees: a new adopter attaches to node v
// with probability proportional to degree(v); delays are exponential; final
// size follows a heavy-tailed law, so future popularity is a noisy monotone
// function of observed size.
CascadeDataset generate_synthetic(int n_cascades, const DatasetConfig& cfg,
                                  const SyntheticParams& params, uint64_t seed);

std::vector<CascadeGraph> generate_synthetic_graphs(int n_cascades, const SyntheticParams& params,
                                                    double pub_time_span, uint64_t seed);

// Flat key=value manifest recording config, seed and pool counts.
std::string dataset_manifest(const CascadeDataset& ds);

}  // namespace caslearn
