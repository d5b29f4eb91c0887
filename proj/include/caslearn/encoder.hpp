// encoder.hpp
//   Cascade graph -> vector. Node feature rows (structural or heat-kernel
//   wavelet) are time-ordered, projected by an embedding layer, consumed by
//   forward and backward gated recurrent passes, and the concatenated final
//   states form h. An MLP projection head maps h to z for the contrastive
//   loss; fine-tuning attaches a small task head after layer j of that head.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "caslearn/cascade.hpp"
#include "caslearn/params.hpp"
#include "caslearn/tensor.hpp"

namespace caslearn {

enum class FeatureMode : uint8_t { structural, wavelet };

struct NodeFeatureSpec {
  FeatureMode mode = FeatureMode::structural;
  double wavelet_scale = 1.0;  // heat-kernel scale s_w
  int wavelet_samples = 8;     // characteristic-function sample points, >= 2
  double wavelet_t_max = 50.0; // sample grid upper bound

  int width() const { return mode == FeatureMode::structural ? 4 : 2 * wavelet_samples + 1; }
};

// Row-major |V| x width matrix.
//   structural: [time/t_o, log(1+degree), depth/max_depth, is_leaf]
//   wavelet:    [Re phi(t_k), Im phi(t_k)]_k over the heat-kernel column of
//               the node, then time/t_o
std::vector<double> node_features(const CascadeGraph& g, const NodeFeatureSpec& spec, double t_o);

// Symmetric eigendecomposition (cyclic Jacobi); returns eigenvalues and
// column eigenvectors. Used by the wavelet features and their tests.
struct EighResult {
  std::vector<double> eigenvalues;    // size n
  std::vector<double> eigenvectors;   // n x n row-major, column j pairs with eigenvalue j
};
EighResult jacobi_eigh(std::vector<double> a, int n);

// Dense heat kernel exp(-s * L) of the undirected tree Laplacian, n x n.
std::vector<double> heat_kernel(const CascadeGraph& g, double scale);

struct EncoderConfig {
  NodeFeatureSpec features;
  int embedding_dim = 64;
  int base_width = 32;       // hidden width at model size 1x
  int width_multiplier = 4;  // model size; d_h = base_width * multiplier
  int head_depth = 4;        // projection head layers i, in [0, 4]
  int finetune_layer = 1;    // j in [0, i]; where the task head attaches

  int hidden_dim() const { return base_width * width_multiplier; }
  int projection_dim() const { return hidden_dim(); }
  void validate() const;
};

class EncoderModel {
 public:
  EncoderModel() = default;

  static EncoderModel random_init(const EncoderConfig& cfg, uint64_t seed);
  static EncoderModel zero_init(const EncoderConfig& cfg);

  const EncoderConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  // All parameters as leaves on a tape; forwards share one binding.
  struct Bound {
    const EncoderModel* model = nullptr;
    std::vector<ad::Var> vars;  // parallel to params()
    ad::Var operator[](const std::string& name) const;
  };
  Bound bind(ad::Tape& tape) const;

  // h = concat(final forward state, final backward state), 1 x d_h.
  ad::Var encode(const Bound& b, ad::Tape& tape, const CascadeGraph& g, double t_o) const;

  // z = projection head applied through all layers (identity at depth 0).
  ad::Var project(const Bound& b, ad::Var h) const;

  // Activation after head layer j (h itself for j = 0); what the task head
  // consumes when the head is partially kept.
  ad::Var project_to_layer(const Bound& b, ad::Var h, int layer) const;

  void save(const std::string& path) const;
  static EncoderModel load(const std::string& path);

 private:
  EncoderConfig cfg_;
  ParamSet params_;
};

// Encoder plus a two-layer task head attached after encoder head layer j;
// emits one scalar: log2 popularity for regression, a logit for outbreak.
class TaskModel {
 public:
  TaskModel() = default;
  TaskModel(EncoderModel encoder, int cut_layer, uint64_t head_seed);

  const EncoderModel& encoder() const { return encoder_; }
  EncoderModel& encoder() { return encoder_; }
  int cut_layer() const { return cut_layer_; }
  ParamSet& head_params() { return head_; }
  const ParamSet& head_params() const { return head_; }

  struct Bound {
    EncoderModel::Bound enc;
    std::vector<ad::Var> head_vars;  // task.L1.W, task.L1.b, task.L2.W, task.L2.b
  };
  Bound bind(ad::Tape& tape) const;

  ad::Var predict(const Bound& b, ad::Tape& tape, const CascadeGraph& g, double t_o) const;

  // Convenience forward for evaluation.
  double predict_value(const CascadeGraph& g, double t_o) const;

  void save(const std::string& path) const;
  static TaskModel load(const std::string& path);

 private:
  EncoderModel encoder_;
  int cut_layer_ = 0;
  ParamSet head_;
};

}  // namespace caslearn
