#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "sagasr/matrix.h"
#include "sagasr/net/autograd.h"

namespace sagasr::net {

struct AdamWConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

struct OptimState {
  AdamWConfig cfg;
  std::uint64_t step = 0;
  std::map<std::string, Matrix> m;
  std::map<std::string, Matrix> v;
};

// One AdamW update over every parameter, using p.grad:
//   m = b1 m + (1 - b1) g,  v = b2 v + (1 - b2) g^2
//   p -= lr * lr_mult * (m_hat / (sqrt(v_hat) + eps) + wd * p)
// Throws if any updated value is non-finite (parameters are left untouched).
void adamw_step(ag::ParameterSet& params, OptimState& state, double lr_mult);

// InverseLR multiplier: (1 - warmup^(step+1)) * (1 + step / inv_gamma)^(-power).
double inverse_lr(std::uint64_t step, double inv_gamma = 1e6, double power = 0.5,
                  double warmup = 0.99);

}  // namespace sagasr::net
