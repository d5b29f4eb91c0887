#include "caslearn/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "caslearn/error.hpp"
#include "caslearn/kernels.hpp"

namespace caslearn::ad {

namespace {

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    raise(Errc::shape_mismatch, std::string(op) + ": shapes differ");
}

Tape& tape_of(const Var& a, const Var& b, const char* op) {
  if (a.tape() != b.tape()) raise(Errc::shape_mismatch, std::string(op) + ": operands on different tapes");
  return *a.tape();
}

}  // namespace

int Var::rows() const { return tape_->node(idx_).rows; }
int Var::cols() const { return tape_->node(idx_).cols; }
const std::vector<double>& Var::value() const { return tape_->node(idx_).val; }
const std::vector<double>& Var::grad() const { return tape_->node(idx_).grad; }

Var Tape::leaf(int rows, int cols, const double* data) {
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.val.assign(data, data + static_cast<std::size_t>(rows) * cols);
  n.grad.assign(n.val.size(), 0.0);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::leaf(int rows, int cols, const std::vector<double>& data) {
  if (data.size() != static_cast<std::size_t>(rows) * cols)
    raise(Errc::shape_mismatch, "leaf: data length does not match shape");
  return leaf(rows, cols, data.data());
}

Var Tape::scalar(double v) { return leaf(1, 1, &v); }

Var Tape::make(int rows, int cols) {
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.val.assign(static_cast<std::size_t>(rows) * cols, 0.0);
  n.grad.assign(n.val.size(), 0.0);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

void Tape::zero_grad() {
  for (Node& n : nodes_)
    std::fill(n.grad.begin(), n.grad.end(), 0.0);
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) raise(Errc::non_scalar_loss, "backward: loss from another tape");
  if (loss.rows() != 1 || loss.cols() != 1) raise(Errc::non_scalar_loss, "backward: loss is not scalar");
  node(loss.index()).grad[0] += 1.0;
  // creation order is topological
  for (int i = loss.index(); i >= 0; --i)
    if (nodes_[static_cast<std::size_t>(i)].back) nodes_[static_cast<std::size_t>(i)].back(*this);
}

Var matmul(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b, "matmul");
  if (a.cols() != b.rows()) raise(Errc::shape_mismatch, "matmul: inner dimensions differ");
  const int m = a.rows(), k = a.cols(), n = b.cols();
  Var out = t.make(m, n);
  const auto& ops = kern::active();
  {
    const double* av = t.node(a.index()).val.data();
    const double* bv = t.node(b.index()).val.data();
    double* cv = t.node(out.index()).val.data();
    for (int i = 0; i < m; ++i)
      for (int p = 0; p < k; ++p)
        ops.axpy(cv + static_cast<std::size_t>(i) * n, av[static_cast<std::size_t>(i) * k + p],
                 bv + static_cast<std::size_t>(p) * n, static_cast<std::size_t>(n));
  }
  const int ai = a.index(), bi = b.index(), oi = out.index();
  t.node(oi).back = [ai, bi, oi, m, k, n](Tape& tp) {
    const auto& o = kern::active();
    const double* dc = tp.node(oi).grad.data();
    const double* av = tp.node(ai).val.data();
    const double* bv = tp.node(bi).val.data();
    double* da = tp.node(ai).grad.data();
    double* db = tp.node(bi).grad.data();
    for (int i = 0; i < m; ++i) {
      for (int p = 0; p < k; ++p) {
        da[static_cast<std::size_t>(i) * k + p] +=
            o.dot(dc + static_cast<std::size_t>(i) * n, bv + static_cast<std::size_t>(p) * n,
                  static_cast<std::size_t>(n));
        o.axpy(db + static_cast<std::size_t>(p) * n, av[static_cast<std::size_t>(i) * k + p],
               dc + static_cast<std::size_t>(i) * n, static_cast<std::size_t>(n));
      }
    }
  };
  return out;
}

Var add(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b, "add");
  check_same_shape(a, b, "add");
  Var out = t.make(a.rows(), a.cols());
  kern::active().add(t.node(out.index()).val.data(), t.node(a.index()).val.data(),
                     t.node(b.index()).val.data(), out.size());
  const int ai = a.index(), bi = b.index(), oi = out.index();
  t.node(oi).back = [ai, bi, oi](Tape& tp) {
    const auto& o = kern::active();
    const std::size_t n = tp.node(oi).grad.size();
    o.axpy(tp.node(ai).grad.data(), 1.0, tp.node(oi).grad.data(), n);
    o.axpy(tp.node(bi).grad.data(), 1.0, tp.node(oi).grad.data(), n);
  };
  return out;
}

Var add_rowwise(const Var& m, const Var& row) {
  Tape& t = tape_of(m, row, "add_rowwise");
  if (row.rows() != 1 || row.cols() != m.cols())
    raise(Errc::shape_mismatch, "add_rowwise: row must be 1 x cols(m)");
  const int r = m.rows(), c = m.cols();
  Var out = t.make(r, c);
  {
    const auto& ops = kern::active();
    const double* mv = t.node(m.index()).val.data();
    const double* rv = t.node(row.index()).val.data();
    double* ov = t.node(out.index()).val.data();
    for (int i = 0; i < r; ++i)
      ops.add(ov + static_cast<std::size_t>(i) * c, mv + static_cast<std::size_t>(i) * c, rv,
              static_cast<std::size_t>(c));
  }
  const int mi = m.index(), ri = row.index(), oi = out.index();
  t.node(oi).back = [mi, ri, oi, r, c](Tape& tp) {
    const auto& o = kern::active();
    const double* dc = tp.node(oi).grad.data();
    o.axpy(tp.node(mi).grad.data(), 1.0, dc, static_cast<std::size_t>(r) * c);
    double* dr = tp.node(ri).grad.data();
    for (int i = 0; i < r; ++i)
      o.axpy(dr, 1.0, dc + static_cast<std::size_t>(i) * c, static_cast<std::size_t>(c));
  };
  return out;
}

Var sub(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b, "sub");
  check_same_shape(a, b, "sub");
  Var out = t.make(a.rows(), a.cols());
  kern::active().sub(t.node(out.index()).val.data(), t.node(a.index()).val.data(),
                     t.node(b.index()).val.data(), out.size());
  const int ai = a.index(), bi = b.index(), oi = out.index();
  t.node(oi).back = [ai, bi, oi](Tape& tp) {
    const auto& o = kern::active();
    const std::size_t n = tp.node(oi).grad.size();
    o.axpy(tp.node(ai).grad.data(), 1.0, tp.node(oi).grad.data(), n);
    o.axpy(tp.node(bi).grad.data(), -1.0, tp.node(oi).grad.data(), n);
  };
  return out;
}

Var mul(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b, "mul");
  check_same_shape(a, b, "mul");
  Var out = t.make(a.rows(), a.cols());
  kern::active().mul(t.node(out.index()).val.data(), t.node(a.index()).val.data(),
                     t.node(b.index()).val.data(), out.size());
  const int ai = a.index(), bi = b.index(), oi = out.index();
  t.node(oi).back = [ai, bi, oi](Tape& tp) {
    const std::size_t n = tp.node(oi).grad.size();
    const double* dc = tp.node(oi).grad.data();
    const double* av = tp.node(ai).val.data();
    const double* bv = tp.node(bi).val.data();
    double* da = tp.node(ai).grad.data();
    double* db = tp.node(bi).grad.data();
    for (std::size_t i = 0; i < n; ++i) {
      da[i] += dc[i] * bv[i];
      db[i] += dc[i] * av[i];
    }
  };
  return out;
}

Var affine(const Var& a, double scale, double shift) {
  Tape& t = *a.tape();
  Var out = t.make(a.rows(), a.cols());
  {
    const double* av = t.node(a.index()).val.data();
    double* ov = t.node(out.index()).val.data();
    for (std::size_t i = 0; i < out.size(); ++i) ov[i] = scale * av[i] + shift;
  }
  const int ai = a.index(), oi = out.index();
  t.node(oi).back = [ai, oi, scale](Tape& tp) {
    kern::active().axpy(tp.node(ai).grad.data(), scale, tp.node(oi).grad.data(),
                        tp.node(oi).grad.size());
  };
  return out;
}

namespace {

template <typename Fwd, typename Bwd>
Var unary_elementwise(const Var& a, Fwd fwd, Bwd bwd_factor) {
  // bwd_factor(x, y) is dy/dx given input x and output y
  Tape& t = *a.tape();
  Var out = t.make(a.rows(), a.cols());
  const double* av = t.node(a.index()).val.data();
  double* ov = t.node(out.index()).val.data();
  for (std::size_t i = 0; i < out.size(); ++i) ov[i] = fwd(av[i]);
  const int ai = a.index(), oi = out.index();
  t.node(oi).back = [ai, oi, bwd_factor](Tape& tp) {
    const std::size_t n = tp.node(oi).grad.size();
    const double* dc = tp.node(oi).grad.data();
    const double* x = tp.node(ai).val.data();
    const double* y = tp.node(oi).val.data();
    double* da = tp.node(ai).grad.data();
    for (std::size_t i = 0; i < n; ++i) da[i] += dc[i] * bwd_factor(x[i], y[i]);
  };
  return out;
}

}  // namespace

Var sigmoid(const Var& a) {
  return unary_elementwise(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh_op(const Var& a) {
  return unary_elementwise(a, [](double x) { return std::tanh(x); },
                           [](double, double y) { return 1.0 - y * y; });
}

Var exp_op(const Var& a) {
  return unary_elementwise(a, [](double x) { return std::exp(x); },
                           [](double, double y) { return y; });
}

Var log_op(const Var& a) {
  return unary_elementwise(a, [](double x) { return std::log(x); },
                           [](double x, double) { return 1.0 / x; });
}

Var softplus(const Var& a) {
  return unary_elementwise(
      a, [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); },
      [](double x, double) { return 1.0 / (1.0 + std::exp(-x)); });
}

Var concat_cols(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b, "concat_cols");
  if (a.rows() != b.rows()) raise(Errc::shape_mismatch, "concat_cols: row counts differ");
  const int r = a.rows(), ca = a.cols(), cb = b.cols();
  Var out = t.make(r, ca + cb);
  {
    const double* av = t.node(a.index()).val.data();
    const double* bv = t.node(b.index()).val.data();
    double* ov = t.node(out.index()).val.data();
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < ca; ++j) ov[static_cast<std::size_t>(i) * (ca + cb) + j] = av[static_cast<std::size_t>(i) * ca + j];
      for (int j = 0; j < cb; ++j) ov[static_cast<std::size_t>(i) * (ca + cb) + ca + j] = bv[static_cast<std::size_t>(i) * cb + j];
    }
  }
  const int ai = a.index(), bi = b.index(), oi = out.index();
  t.node(oi).back = [ai, bi, oi, r, ca, cb](Tape& tp) {
    const double* dc = tp.node(oi).grad.data();
    double* da = tp.node(ai).grad.data();
    double* db = tp.node(bi).grad.data();
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < ca; ++j) da[static_cast<std::size_t>(i) * ca + j] += dc[static_cast<std::size_t>(i) * (ca + cb) + j];
      for (int j = 0; j < cb; ++j) db[static_cast<std::size_t>(i) * cb + j] += dc[static_cast<std::size_t>(i) * (ca + cb) + ca + j];
    }
  };
  return out;
}

Var concat_scalars(Tape& tape, const std::vector<Var>& xs) {
  if (xs.empty()) raise(Errc::shape_mismatch, "concat_scalars: empty input");
  const int n = static_cast<int>(xs.size());
  Var out = tape.make(1, n);
  std::vector<int> idx(xs.size());
  for (int i = 0; i < n; ++i) {
    const Var& x = xs[static_cast<std::size_t>(i)];
    if (x.tape() != &tape || x.rows() != 1 || x.cols() != 1)
      raise(Errc::shape_mismatch, "concat_scalars: inputs must be scalars on this tape");
    tape.node(out.index()).val[static_cast<std::size_t>(i)] = x.scalar();
    idx[static_cast<std::size_t>(i)] = x.index();
  }
  const int oi = out.index();
  tape.node(oi).back = [idx, oi](Tape& tp) {
    const double* dc = tp.node(oi).grad.data();
    for (std::size_t i = 0; i < idx.size(); ++i) tp.node(idx[i]).grad[0] += dc[i];
  };
  return out;
}

Var slice_cols(const Var& a, int begin, int end) {
  Tape& t = *a.tape();
  if (begin < 0 || end > a.cols() || begin >= end)
    raise(Errc::shape_mismatch, "slice_cols: bad column range");
  const int r = a.rows(), c = a.cols(), w = end - begin;
  Var out = t.make(r, w);
  {
    const double* av = t.node(a.index()).val.data();
    double* ov = t.node(out.index()).val.data();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < w; ++j)
        ov[static_cast<std::size_t>(i) * w + j] = av[static_cast<std::size_t>(i) * c + begin + j];
  }
  const int ai = a.index(), oi = out.index();
  t.node(oi).back = [ai, oi, r, c, w, begin](Tape& tp) {
    const double* dc = tp.node(oi).grad.data();
    double* da = tp.node(ai).grad.data();
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < w; ++j)
        da[static_cast<std::size_t>(i) * c + begin + j] += dc[static_cast<std::size_t>(i) * w + j];
  };
  return out;
}

Var slice_rows(const Var& a, int begin, int end) {
  Tape& t = *a.tape();
  if (begin < 0 || end > a.rows() || begin >= end)
    raise(Errc::shape_mismatch, "slice_rows: bad row range");
  const int c = a.cols(), h = end - begin;
  Var out = t.make(h, c);
  {
    const double* av = t.node(a.index()).val.data() + static_cast<std::size_t>(begin) * c;
    double* ov = t.node(out.index()).val.data();
    std::copy(av, av + static_cast<std::size_t>(h) * c, ov);
  }
  const int ai = a.index(), oi = out.index();
  t.node(oi).back = [ai, oi, c, h, begin](Tape& tp) {
    kern::active().axpy(tp.node(ai).grad.data() + static_cast<std::size_t>(begin) * c, 1.0,
                        tp.node(oi).grad.data(), static_cast<std::size_t>(h) * c);
  };
  return out;
}

Var sum(const Var& a) {
  Tape& t = *a.tape();
  Var out = t.make(1, 1);
  t.node(out.index()).val[0] = kern::active().sum(t.node(a.index()).val.data(), a.size());
  const int ai = a.index(), oi = out.index();
  t.node(oi).back = [ai, oi](Tape& tp) {
    const double g = tp.node(oi).grad[0];
    double* da = tp.node(ai).grad.data();
    for (std::size_t i = 0; i < tp.node(ai).grad.size(); ++i) da[i] += g;
  };
  return out;
}

Var mean(const Var& a) { return affine(sum(a), 1.0 / static_cast<double>(a.size()), 0.0); }

Var l2_normalize(const Var& a) {
  Tape& t = *a.tape();
  const auto& ops = kern::active();
  const double* av = t.node(a.index()).val.data();
  const double norm = std::sqrt(ops.dot(av, av, a.size()));
  if (norm == 0.0) raise(Errc::zero_vector, "l2_normalize: zero vector");
  Var out = t.make(a.rows(), a.cols());
  ops.scale(t.node(out.index()).val.data(), av, 1.0 / norm, a.size());
  const int ai = a.index(), oi = out.index();
  t.node(oi).back = [ai, oi, norm](Tape& tp) {
    const auto& o = kern::active();
    const std::size_t n = tp.node(oi).grad.size();
    const double* dc = tp.node(oi).grad.data();
    const double* y = tp.node(oi).val.data();
    const double proj = o.dot(dc, y, n);
    double* da = tp.node(ai).grad.data();
    for (std::size_t i = 0; i < n; ++i) da[i] += (dc[i] - proj * y[i]) / norm;
  };
  return out;
}

Var cosine_similarity(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b, "cosine_similarity");
  check_same_shape(a, b, "cosine_similarity");
  const auto& ops = kern::active();
  const double* av = t.node(a.index()).val.data();
  const double* bv = t.node(b.index()).val.data();
  const std::size_t n = a.size();
  const double na = std::sqrt(ops.dot(av, av, n));
  const double nb = std::sqrt(ops.dot(bv, bv, n));
  if (na == 0.0 || nb == 0.0) raise(Errc::zero_vector, "cosine_similarity: zero vector");
  const double ab = ops.dot(av, bv, n);
  const double cos = ab / (na * nb);
  Var out = t.make(1, 1);
  t.node(out.index()).val[0] = cos;
  const int ai = a.index(), bi = b.index(), oi = out.index();
  t.node(oi).back = [ai, bi, oi, na, nb, cos](Tape& tp) {
    const double g = tp.node(oi).grad[0];
    const std::size_t len = tp.node(ai).val.size();
    const double* av2 = tp.node(ai).val.data();
    const double* bv2 = tp.node(bi).val.data();
    double* da = tp.node(ai).grad.data();
    double* db = tp.node(bi).grad.data();
    const double inv_ab = 1.0 / (na * nb);
    for (std::size_t i = 0; i < len; ++i) {
      da[i] += g * (bv2[i] * inv_ab - cos * av2[i] / (na * na));
      db[i] += g * (av2[i] * inv_ab - cos * bv2[i] / (nb * nb));
    }
  };
  return out;
}

}  // namespace caslearn::ad
