#include "sagasr/net/optim.h"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sagasr::net {

void adamw_step(ag::ParameterSet& params, OptimState& state, double lr_mult) {
  const AdamWConfig& c = state.cfg;
  const std::uint64_t step = state.step + 1;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
  const double lr = c.lr * lr_mult;

  // Compute everything first so a non-finite update leaves no partial state.
  struct Update {
    Matrix value, m, v;
  };
  std::vector<Update> updates;
  updates.reserve(params.size());
  for (auto& [name, p] : params) {
    if (!p.grad.same_shape(p.value)) {
      throw std::invalid_argument("adamw: gradient shape mismatch for " + name);
    }
    auto mit = state.m.find(name);
    Matrix m = mit != state.m.end() ? mit->second : Matrix(p.value.rows(), p.value.cols());
    auto vit = state.v.find(name);
    Matrix v = vit != state.v.end() ? vit->second : Matrix(p.value.rows(), p.value.cols());
    if (!m.same_shape(p.value) || !v.same_shape(p.value)) {
      throw std::invalid_argument("adamw: moment shape mismatch for " + name);
    }
    Matrix value = p.value;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      value[i] -= lr * (m_hat / (std::sqrt(v_hat) + c.eps) + c.weight_decay * value[i]);
      if (!std::isfinite(value[i])) {
        throw std::runtime_error("adamw: non-finite update for " + name);
      }
    }
    updates.push_back({std::move(value), std::move(m), std::move(v)});
  }
  auto it = updates.begin();
  for (auto& [name, p] : params) {
    p.value = std::move(it->value);
    state.m[name] = std::move(it->m);
    state.v[name] = std::move(it->v);
    ++it;
  }
  state.step = step;
}

double inverse_lr(std::uint64_t step, double inv_gamma, double power, double warmup) {
  const double s = static_cast<double>(step);
  const double warm = 1.0 - std::pow(warmup, s + 1.0);
  return warm * std::pow(1.0 + s / inv_gamma, -power);
}

}  // namespace sagasr::net
