#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>

#include "sagasr/flow/flow.h"
#include "sagasr/net/model.h"

namespace sagasr::test_support {

struct GradCheck {
  double max_rel = 0.0;
  std::size_t checked = 0;
  std::size_t skipped = 0;
};

inline net::ModelConfig small_model_config() {
  net::ModelConfig cfg;
  cfg.channels = 8;
  cfg.d_model = 8;
  cfg.n_blocks = 1;
  cfg.n_heads = 2;
  cfg.d_cond = 8;
  cfg.fourier_m = 4;
  cfg.mlp_ratio = 2;
  return cfg;
}

// Backprop vs central differences (h = 1e-4) of the flow-matching loss at a
// random parameter point. Coordinates with |g| <= 1e-6 are skipped.
inline GradCheck check_model_gradients(const net::ModelConfig& cfg, std::uint64_t seed,
                                       std::size_t frames = 4) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  net::MiniDit model(cfg, seed);
  for (auto& [name, p] : model.params()) {
    const double s = name == "fourier.freqs" ? 1.0 : 0.3;
    for (double& v : p.value.values()) v = s * normal(rng);
  }
  auto random = [&](std::size_t r, std::size_t c) {
    Matrix m(r, c);
    for (double& v : m.values()) v = normal(rng);
    return m;
  };
  const Matrix z1 = random(cfg.channels, frames);
  const Matrix z_l = random(cfg.channels, frames);
  embed::CondBundle cond;
  cond.cond_seq = random(3, cfg.d_cond);
  cond.f_l = 0.2;
  cond.f_h = 0.8;
  flow::FmDraw draw;
  draw.t = std::uniform_real_distribution<double>(0.05, 0.95)(rng);
  draw.z0 = random(cfg.channels, frames);

  model.params().zero_grad();
  flow::fm_loss(model, z1, z_l, cond, draw);
  GradCheck out;
  const double h = 1e-4;
  for (auto& [name, p] : model.params()) {
    const Matrix grad = p.grad;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = grad[i];
      if (std::abs(g) <= 1e-6) {
        ++out.skipped;
        continue;
      }
      const double keep = p.value[i];
      p.value[i] = keep + h;
      const double up = flow::fm_loss(model, z1, z_l, cond, draw, 0.0);
      p.value[i] = keep - h;
      const double down = flow::fm_loss(model, z1, z_l, cond, draw, 0.0);
      p.value[i] = keep;
      const double fd = (up - down) / (2.0 * h);
      out.max_rel = std::max(out.max_rel, std::abs(g - fd) / std::max(std::abs(g), std::abs(fd)));
      ++out.checked;
    }
  }
  return out;
}

}  // namespace sagasr::test_support
