#include "caslearn/encoder.hpp"

#include <algorithm>
#include <cmath>

#include "caslearn/error.hpp"
#include "caslearn/rng.hpp"

namespace caslearn {

using ad::Var;

// ---------------------------------------------------------------------------
// spectral pieces

EighResult jacobi_eigh(std::vector<double> a, int n) {
  if (static_cast<std::size_t>(n) * n != a.size())
    raise(Errc::shape_mismatch, "jacobi_eigh: matrix size mismatch");
  auto at = [&](std::vector<double>& m, int i, int j) -> double& {
    return m[static_cast<std::size_t>(i) * n + j];
  };
  std::vector<double> v(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) at(v, i, i) = 1.0;

  auto off_norm = [&]() {
    double s = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += at(a, i, j) * at(a, i, j);
    return s;
  };

  auto sweep_until_converged = [&]() {
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
      if (off_norm() < 1e-24) return true;
      for (int p = 0; p < n - 1; ++p) {
        for (int q = p + 1; q < n; ++q) {
          const double apq = at(a, p, q);
          if (apq == 0.0) continue;
          const double app = at(a, p, p), aqq = at(a, q, q);
          const double theta = (aqq - app) / (2.0 * apq);
          const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          for (int k = 0; k < n; ++k) {
            const double akp = at(a, k, p), akq = at(a, k, q);
            at(a, k, p) = c * akp - s * akq;
            at(a, k, q) = s * akp + c * akq;
          }
          for (int k = 0; k < n; ++k) {
            const double apk = at(a, p, k), aqk = at(a, q, k);
            at(a, p, k) = c * apk - s * aqk;
            at(a, q, k) = s * apk + c * aqk;
          }
          for (int k = 0; k < n; ++k) {
            const double vkp = at(v, k, p), vkq = at(v, k, q);
            at(v, k, p) = c * vkp - s * vkq;
            at(v, k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
    return off_norm() < 1e-18;
  };

  std::vector<double> original = a;
  if (!sweep_until_converged()) {
    // jitter the diagonal and retry once before giving up
    a = original;
    for (int i = 0; i < n; ++i) at(a, i, i) += 1e-12 * (i + 1);
    for (int i = 0; i < n; ++i) at(v, i, i) = 1.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) at(v, i, j) = 0.0;
    if (!sweep_until_converged())
      raise(Errc::eigen_failure, "jacobi_eigh: no convergence after jitter retry");
  }

  EighResult r;
  r.eigenvalues.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) r.eigenvalues[static_cast<std::size_t>(i)] = at(a, i, i);
  r.eigenvectors = std::move(v);
  return r;
}

std::vector<double> heat_kernel(const CascadeGraph& g, double scale) {
  const int n = g.size();
  std::vector<double> lap(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    lap[static_cast<std::size_t>(i) * n + i] = g.degree(i);
    int p = g.parent_of(i);
    if (p >= 0) {
      lap[static_cast<std::size_t>(i) * n + p] = -1.0;
      lap[static_cast<std::size_t>(p) * n + i] = -1.0;
    }
  }
  EighResult eig = jacobi_eigh(std::move(lap), n);
  std::vector<double> decay(static_cast<std::size_t>(n));
  for (int l = 0; l < n; ++l) decay[static_cast<std::size_t>(l)] = std::exp(-scale * eig.eigenvalues[static_cast<std::size_t>(l)]);
  // H = U diag(e^{-s lambda}) U^T
  std::vector<double> h(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int l = 0; l < n; ++l)
        acc += eig.eigenvectors[static_cast<std::size_t>(i) * n + l] * decay[static_cast<std::size_t>(l)] *
               eig.eigenvectors[static_cast<std::size_t>(j) * n + l];
      h[static_cast<std::size_t>(i) * n + j] = acc;
    }
  return h;
}

std::vector<double> node_features(const CascadeGraph& g, const NodeFeatureSpec& spec, double t_o) {
  const int n = g.size();
  const int f = spec.width();
  std::vector<double> out(static_cast<std::size_t>(n) * f, 0.0);
  if (spec.mode == FeatureMode::structural) {
    GraphStats st = graph_stats(g);
    const int max_depth = *std::max_element(st.depth.begin(), st.depth.end());
    std::vector<char> is_leaf(static_cast<size_t>(n), 0);
    for (int l : st.leaves) is_leaf[static_cast<size_t>(l)] = 1;
    for (int i = 0; i < n; ++i) {
      double* row = out.data() + static_cast<std::size_t>(i) * f;
      row[0] = g.node(i).time / t_o;
      row[1] = std::log1p(static_cast<double>(st.degree[static_cast<size_t>(i)]));
      row[2] = max_depth > 0 ? static_cast<double>(st.depth[static_cast<size_t>(i)]) / max_depth : 0.0;
      row[3] = is_leaf[static_cast<size_t>(i)] ? 1.0 : 0.0;
    }
    return out;
  }

  if (spec.wavelet_samples < 2)
    raise(Errc::config_error, "node_features: wavelet mode needs at least 2 sample points");
  std::vector<double> h = heat_kernel(g, spec.wavelet_scale);
  const int d = spec.wavelet_samples;
  for (int a = 0; a < n; ++a) {
    double* row = out.data() + static_cast<std::size_t>(a) * f;
    for (int k = 0; k < d; ++k) {
      const double t = spec.wavelet_t_max * static_cast<double>(k) / static_cast<double>(d - 1);
      double re = 0.0, im = 0.0;
      for (int m = 0; m < n; ++m) {
        const double psi = h[static_cast<std::size_t>(m) * n + a];
        re += std::cos(t * psi);
        im += std::sin(t * psi);
      }
      row[2 * k] = re / n;
      row[2 * k + 1] = im / n;
    }
    row[2 * d] = g.node(a).time / t_o;
  }
  return out;
}

// ---------------------------------------------------------------------------
// model

void EncoderConfig::validate() const {
  if (embedding_dim < 1 || base_width < 1 || width_multiplier < 1)
    raise(Errc::config_error, "encoder config: dimensions must be positive");
  if (hidden_dim() % 2 != 0)
    raise(Errc::config_error, "encoder config: hidden width must be even (split across directions)");
  if (head_depth < 0 || head_depth > 4)
    raise(Errc::config_error, "encoder config: head depth must lie in [0, 4]");
  if (finetune_layer < 0 || finetune_layer > head_depth)
    raise(Errc::config_error, "encoder config: finetune layer must lie in [0, head_depth]");
  if (features.mode == FeatureMode::wavelet && features.wavelet_samples < 2)
    raise(Errc::config_error, "encoder config: wavelet mode needs at least 2 sample points");
}

namespace {

void push_tensor(ParamSet& ps, const std::string& name, int rows, int cols) {
  ParamTensor t;
  t.name = name;
  t.rows = rows;
  t.cols = cols;
  t.value.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  ps.push_back(std::move(t));
}

void glorot_fill(ParamTensor& t, Rng& rng) {
  if (t.rows == 1 || t.name.ends_with(".b")) return;  // biases start at zero
  const double limit = std::sqrt(6.0 / (t.rows + t.cols));
  for (double& v : t.value) v = rng.uniform(-limit, limit);
}

ParamSet encoder_tensors(const EncoderConfig& cfg) {
  ParamSet ps;
  const int f = cfg.features.width();
  const int de = cfg.embedding_dim;
  const int dh = cfg.hidden_dim();
  const int half = dh / 2;
  push_tensor(ps, "embed.W", f, de);
  push_tensor(ps, "embed.b", 1, de);
  for (const char* dir : {"fwd", "bwd"}) {
    for (const char* gate : {"z", "r", "h"}) {
      push_tensor(ps, std::string("gru_") + dir + ".W" + gate, de, half);
      push_tensor(ps, std::string("gru_") + dir + ".U" + gate, half, half);
      push_tensor(ps, std::string("gru_") + dir + ".b" + gate, 1, half);
    }
  }
  for (int l = 1; l <= cfg.head_depth; ++l) {
    push_tensor(ps, "head.L" + std::to_string(l) + ".W", dh, l == cfg.head_depth ? cfg.projection_dim() : dh);
    push_tensor(ps, "head.L" + std::to_string(l) + ".b", 1, l == cfg.head_depth ? cfg.projection_dim() : dh);
  }
  return ps;
}

// config scalars ride along in the checkpoint as 1x1 meta tensors
void append_meta(ParamSet& ps, const EncoderConfig& cfg) {
  auto meta = [&ps](const std::string& name, double v) {
    ParamTensor t;
    t.name = "meta." + name;
    t.rows = 1;
    t.cols = 1;
    t.value = {v};
    ps.push_back(std::move(t));
  };
  meta("feature_mode", cfg.features.mode == FeatureMode::wavelet ? 1.0 : 0.0);
  meta("wavelet_scale", cfg.features.wavelet_scale);
  meta("wavelet_samples", cfg.features.wavelet_samples);
  meta("wavelet_t_max", cfg.features.wavelet_t_max);
  meta("embedding_dim", cfg.embedding_dim);
  meta("base_width", cfg.base_width);
  meta("width_multiplier", cfg.width_multiplier);
  meta("head_depth", cfg.head_depth);
  meta("finetune_layer", cfg.finetune_layer);
}

EncoderConfig config_from_meta(const ParamSet& ps) {
  EncoderConfig cfg;
  auto get = [&ps](const std::string& name) {
    for (const ParamTensor& t : ps)
      if (t.name == "meta." + name) return t.value[0];
    raise(Errc::io_error, "checkpoint: missing meta field '" + name + "'");
  };
  cfg.features.mode = get("feature_mode") > 0.5 ? FeatureMode::wavelet : FeatureMode::structural;
  cfg.features.wavelet_scale = get("wavelet_scale");
  cfg.features.wavelet_samples = static_cast<int>(get("wavelet_samples"));
  cfg.features.wavelet_t_max = get("wavelet_t_max");
  cfg.embedding_dim = static_cast<int>(get("embedding_dim"));
  cfg.base_width = static_cast<int>(get("base_width"));
  cfg.width_multiplier = static_cast<int>(get("width_multiplier"));
  cfg.head_depth = static_cast<int>(get("head_depth"));
  cfg.finetune_layer = static_cast<int>(get("finetune_layer"));
  return cfg;
}

}  // namespace

EncoderModel EncoderModel::random_init(const EncoderConfig& cfg, uint64_t seed) {
  cfg.validate();
  EncoderModel m;
  m.cfg_ = cfg;
  m.params_ = encoder_tensors(cfg);
  Rng rng(derive_seed(seed, "encoder-init"));
  for (ParamTensor& t : m.params_) glorot_fill(t, rng);
  return m;
}

EncoderModel EncoderModel::zero_init(const EncoderConfig& cfg) {
  cfg.validate();
  EncoderModel m;
  m.cfg_ = cfg;
  m.params_ = encoder_tensors(cfg);
  return m;
}

ad::Var EncoderModel::Bound::operator[](const std::string& name) const {
  const ParamSet& ps = model->params();
  for (std::size_t i = 0; i < ps.size(); ++i)
    if (ps[i].name == name) return vars[i];
  raise(Errc::shape_mismatch, "encoder: unknown parameter '" + name + "'");
}

EncoderModel::Bound EncoderModel::bind(ad::Tape& tape) const {
  Bound b;
  b.model = this;
  b.vars.reserve(params_.size());
  for (const ParamTensor& t : params_) b.vars.push_back(tape.leaf(t.rows, t.cols, t.value));
  return b;
}

namespace {

// gated recurrent step: h <- (1 - z) * h + z * tanh(Wx + U(r * h) + b)
struct GruCell {
  Var wz, uz, bz, wr, ur, br, wh, uh, bh;

  Var step(const Var& x, const Var& h_prev) const {
    Var z = ad::sigmoid(ad::add(ad::add(ad::matmul(x, wz), ad::matmul(h_prev, uz)), bz));
    Var r = ad::sigmoid(ad::add(ad::add(ad::matmul(x, wr), ad::matmul(h_prev, ur)), br));
    Var cand = ad::tanh_op(ad::add(ad::add(ad::matmul(x, wh), ad::matmul(ad::mul(r, h_prev), uh)), bh));
    return ad::add(ad::mul(ad::affine(z, -1.0, 1.0), h_prev), ad::mul(z, cand));
  }
};

GruCell gru_cell(const EncoderModel::Bound& b, const std::string& dir) {
  return GruCell{b["gru_" + dir + ".Wz"], b["gru_" + dir + ".Uz"], b["gru_" + dir + ".bz"],
                 b["gru_" + dir + ".Wr"], b["gru_" + dir + ".Ur"], b["gru_" + dir + ".br"],
                 b["gru_" + dir + ".Wh"], b["gru_" + dir + ".Uh"], b["gru_" + dir + ".bh"]};
}

}  // namespace

Var EncoderModel::encode(const Bound& b, ad::Tape& tape, const CascadeGraph& g, double t_o) const {
  std::vector<double> feats = node_features(g, cfg_.features, t_o);
  const int n = g.size();
  Var x = tape.leaf(n, cfg_.features.width(), feats);
  Var embedded = ad::add_rowwise(ad::matmul(x, b["embed.W"]), b["embed.b"]);

  const int half = cfg_.hidden_dim() / 2;
  std::vector<double> zeros(static_cast<std::size_t>(half), 0.0);
  GruCell fwd = gru_cell(b, "fwd");
  GruCell bwd = gru_cell(b, "bwd");
  Var h_f = tape.leaf(1, half, zeros);
  for (int t = 0; t < n; ++t) h_f = fwd.step(ad::slice_rows(embedded, t, t + 1), h_f);
  Var h_b = tape.leaf(1, half, zeros);
  for (int t = n - 1; t >= 0; --t) h_b = bwd.step(ad::slice_rows(embedded, t, t + 1), h_b);
  return ad::concat_cols(h_f, h_b);
}

Var EncoderModel::project(const Bound& b, Var h) const { return project_to_layer(b, h, cfg_.head_depth); }

Var EncoderModel::project_to_layer(const Bound& b, Var h, int layer) const {
  if (layer < 0 || layer > cfg_.head_depth)
    raise(Errc::shape_mismatch, "project_to_layer: layer out of range");
  Var y = h;
  for (int l = 1; l <= layer; ++l) {
    const std::string key = "head.L" + std::to_string(l);
    y = ad::add(ad::matmul(y, b[key + ".W"]), b[key + ".b"]);
    if (l < cfg_.head_depth) y = ad::tanh_op(y);  // final head layer stays linear
  }
  return y;
}

void EncoderModel::save(const std::string& path) const {
  ParamSet all = params_;
  append_meta(all, cfg_);
  save_params(path, all);
}

EncoderModel EncoderModel::load(const std::string& path) {
  ParamSet all = load_params(path);
  EncoderModel m;
  m.cfg_ = config_from_meta(all);
  m.cfg_.validate();
  for (ParamTensor& t : all)
    if (t.name.rfind("meta.", 0) != 0) m.params_.push_back(std::move(t));
  // shapes must match the architecture the meta block describes
  ParamSet expect = encoder_tensors(m.cfg_);
  if (expect.size() != m.params_.size())
    raise(Errc::io_error, "checkpoint: tensor count does not match architecture");
  for (std::size_t i = 0; i < expect.size(); ++i)
    if (expect[i].name != m.params_[i].name || expect[i].rows != m.params_[i].rows ||
        expect[i].cols != m.params_[i].cols)
      raise(Errc::io_error, "checkpoint: tensor '" + m.params_[i].name + "' has unexpected shape");
  return m;
}

// ---------------------------------------------------------------------------
// task model

TaskModel::TaskModel(EncoderModel encoder, int cut_layer, uint64_t head_seed)
    : encoder_(std::move(encoder)), cut_layer_(cut_layer) {
  const EncoderConfig& cfg = encoder_.config();
  if (cut_layer_ < 0 || cut_layer_ > cfg.head_depth)
    raise(Errc::config_error, "task model: cut layer must lie in [0, head_depth]");
  const int d_in = cut_layer_ == cfg.head_depth && cfg.head_depth > 0 ? cfg.projection_dim() : cfg.hidden_dim();
  const int dh = cfg.hidden_dim();
  push_tensor(head_, "task.L1.W", d_in, dh);
  push_tensor(head_, "task.L1.b", 1, dh);
  push_tensor(head_, "task.L2.W", dh, 1);
  push_tensor(head_, "task.L2.b", 1, 1);
  Rng rng(derive_seed(head_seed, "task-head"));
  for (ParamTensor& t : head_) glorot_fill(t, rng);
}

TaskModel::Bound TaskModel::bind(ad::Tape& tape) const {
  Bound b;
  b.enc = encoder_.bind(tape);
  b.head_vars.reserve(head_.size());
  for (const ParamTensor& t : head_) b.head_vars.push_back(tape.leaf(t.rows, t.cols, t.value));
  return b;
}

ad::Var TaskModel::predict(const Bound& b, ad::Tape& tape, const CascadeGraph& g, double t_o) const {
  Var h = encoder_.encode(b.enc, tape, g, t_o);
  Var cut = encoder_.project_to_layer(b.enc, h, cut_layer_);
  Var hidden = ad::tanh_op(ad::add(ad::matmul(cut, b.head_vars[0]), b.head_vars[1]));
  return ad::add(ad::matmul(hidden, b.head_vars[2]), b.head_vars[3]);
}

double TaskModel::predict_value(const CascadeGraph& g, double t_o) const {
  ad::Tape tape;
  Bound b = bind(tape);
  return predict(b, tape, g, t_o).scalar();
}

void TaskModel::save(const std::string& path) const {
  ParamSet all = encoder_.params();
  for (const ParamTensor& t : head_) all.push_back(t);
  append_meta(all, encoder_.config());
  ParamTensor cut;
  cut.name = "meta.task_cut_layer";
  cut.rows = 1;
  cut.cols = 1;
  cut.value = {static_cast<double>(cut_layer_)};
  all.push_back(std::move(cut));
  save_params(path, all);
}

TaskModel TaskModel::load(const std::string& path) {
  ParamSet all = load_params(path);
  EncoderConfig cfg = config_from_meta(all);
  cfg.validate();
  int cut = -1;
  for (const ParamTensor& t : all)
    if (t.name == "meta.task_cut_layer") cut = static_cast<int>(t.value[0]);
  if (cut < 0) raise(Errc::io_error, "checkpoint: missing task head metadata");

  TaskModel tm(EncoderModel::zero_init(cfg), cut, 0);
  ParamSet enc_params, head_params;
  for (ParamTensor& t : all) {
    if (t.name.rfind("meta.", 0) == 0) continue;
    if (t.name.rfind("task.", 0) == 0)
      head_params.push_back(std::move(t));
    else
      enc_params.push_back(std::move(t));
  }
  if (enc_params.size() != tm.encoder_.params().size() || head_params.size() != tm.head_.size())
    raise(Errc::io_error, "checkpoint: tensor layout does not match task model");
  tm.encoder_.params() = std::move(enc_params);
  tm.head_ = std::move(head_params);
  return tm;
}

}  // namespace caslearn
