#include "caslearn/adam.hpp"

#include <cmath>

#include "caslearn/error.hpp"

namespace caslearn {

void AdamState::step(ParamSet& params, const std::vector<std::vector<double>>& grads) {
  if (grads.size() != params.size())
    raise(Errc::shape_mismatch, "adam: gradient count does not match parameter count");
  if (m_.empty()) {
    m_.resize(params.size());
    v_.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_[i].assign(params[i].size(), 0.0);
      v_[i].assign(params[i].size(), 0.0);
    }
  }
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params[i].size())
      raise(Errc::shape_mismatch, "adam: gradient shape mismatch for '" + params[i].name + "'");
    double* theta = params[i].value.data();
    double* m = m_[i].data();
    double* v = v_[i].data();
    const double* g = grads[i].data();
    for (std::size_t j = 0; j < params[i].size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      const double m_hat = m[j] / bc1;
      const double v_hat = v[j] / bc2;
      theta[j] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

}  // namespace caslearn
