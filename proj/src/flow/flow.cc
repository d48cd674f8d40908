#include "sagasr/flow/flow.h"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace sagasr::flow {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(what) + ": shape mismatch " + a.shape_string() +
                                " vs " + b.shape_string());
  }
}

bool all_finite(const Matrix& m) {
  for (double v : m.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

LatentSeq interpolate(const LatentSeq& z0, const LatentSeq& z1, double t) {
  require_same_shape(z0.data, z1.data, "interpolate");
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("interpolate: t outside [0, 1]");
  LatentSeq out{Matrix(z0.data.rows(), z0.data.cols()), LatentRole::kInterpolant};
  for (std::size_t i = 0; i < out.data.size(); ++i) {
    out.data[i] = (1.0 - t) * z0.data[i] + t * z1.data[i];
  }
  return out;
}

LatentSeq target_velocity(const LatentSeq& z0, const LatentSeq& z1) {
  require_same_shape(z0.data, z1.data, "target_velocity");
  LatentSeq out{z1.data, LatentRole::kVelocity};
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= z0.data[i];
  return out;
}

TSchedule::TSchedule(std::vector<double> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) throw std::invalid_argument("schedule: need at least one step");
  if (knots_.front() != 0.0) throw std::invalid_argument("schedule: first knot must be 0");
  if (knots_.back() > 1.0) throw std::invalid_argument("schedule: last knot exceeds 1");
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (!(knots_[i] > knots_[i - 1])) {
      throw std::invalid_argument("schedule: knots must be strictly increasing");
    }
  }
}

TSchedule linear_quadratic_schedule(std::size_t n_steps, std::size_t n_linear,
                                    std::size_t big_n) {
  if (n_linear < 1 || n_linear >= n_steps || big_n < n_steps) {
    throw std::invalid_argument(
        "schedule: need 1 <= n_linear < n_steps <= big_n");
  }
  std::vector<double> knots;
  knots.reserve(n_steps + 1);
  for (std::size_t i = 0; i <= n_linear; ++i) {
    knots.push_back(static_cast<double>(i) / static_cast<double>(big_n));
  }
  const double t_lin = knots.back();
  const std::size_t n_quad = n_steps - n_linear;
  for (std::size_t j = 1; j <= n_quad; ++j) {
    const double r = static_cast<double>(j) / static_cast<double>(n_quad);
    knots.push_back(j == n_quad ? 1.0 : t_lin + (1.0 - t_lin) * r * r);
  }
  return TSchedule(std::move(knots));
}

std::string dump_schedule(const TSchedule& sched) {
  std::string out;
  char buf[64];
  for (double k : sched.knots()) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", k);
    out += buf;
  }
  return out;
}

Matrix euler_sample(const Field& field, Matrix z, const TSchedule& sched) {
  const auto& knots = sched.knots();
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double dt = knots[i + 1] - knots[i];
    const Matrix v = field(z, knots[i]);
    require_same_shape(z, v, "euler_sample");
    for (std::size_t k = 0; k < z.size(); ++k) z[k] += dt * v[k];
    if (!all_finite(z)) throw std::runtime_error("euler_sample: divergence");
  }
  return z;
}

Matrix cfg_combine(const Matrix& u_uncond, const Matrix& u_audio, const Matrix& u_full,
                   const GuidanceScales& scales) {
  require_same_shape(u_uncond, u_audio, "cfg_combine");
  require_same_shape(u_uncond, u_full, "cfg_combine");
  const double c_uncond = 1.0 - scales.s_a;
  const double c_audio = scales.s_a - scales.s_t;
  const double c_full = scales.s_t;
  Matrix out(u_full.rows(), u_full.cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = c_uncond * u_uncond[i] + c_audio * u_audio[i] + c_full * u_full[i];
  }
  return out;
}

FmDraw draw_fm(Rng& rng, std::size_t channels, std::size_t frames, const FmConfig& cfg) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  FmDraw d;
  d.t = unit(rng);
  d.z0 = Matrix(channels, frames);
  for (double& v : d.z0.values()) v = normal(rng);
  d.drop_audio = unit(rng) < cfg.p_drop_audio;
  d.drop_text = unit(rng) < cfg.p_drop_text;
  return d;
}

double fm_loss(VectorFieldModel& model, const Matrix& z1, const Matrix& z_l,
               const embed::CondBundle& cond, const FmDraw& draw, double grad_weight) {
  require_same_shape(z1, draw.z0, "fm_loss");
  const LatentSeq z0{draw.z0, LatentRole::kNoise};
  const LatentSeq data{z1, LatentRole::kData};
  const LatentSeq z_t = interpolate(z0, data, draw.t);
  const LatentSeq target = target_velocity(z0, data);

  embed::CondBundle c = cond;
  c.audio_null = c.audio_null || draw.drop_audio;
  c.text_null = c.text_null || draw.drop_text;

  Tracked pred = model.track(z_t.data, z_l, c, draw.t);
  require_same_shape(pred.value, target.data, "fm_loss");
  const double n = static_cast<double>(target.data.size());
  double loss = 0.0;
  Matrix grad(target.data.rows(), target.data.cols());
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double d = pred.value[i] - target.data[i];
    loss += d * d;
    grad[i] = grad_weight * 2.0 * d / n;
  }
  loss /= n;
  if (!std::isfinite(loss)) throw std::runtime_error("fm_loss: divergence");
  if (pred.backward) pred.backward(grad);
  return loss;
}

double fm_loss(VectorFieldModel& model, const Matrix& z1, const Matrix& z_l,
               const embed::CondBundle& cond, Rng& rng, const FmConfig& cfg,
               double grad_weight) {
  const FmDraw draw = draw_fm(rng, z1.rows(), z1.cols(), cfg);
  return fm_loss(model, z1, z_l, cond, draw, grad_weight);
}

Matrix guided_sample(const VectorFieldModel& model, const Matrix& z_l,
                     const embed::CondBundle& cond, const GuidanceScales& scales,
                     const TSchedule& sched, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix z0(z_l.rows(), z_l.cols());
  for (double& v : z0.values()) v = normal(rng);

  embed::CondBundle uncond = cond;
  uncond.audio_null = true;
  uncond.text_null = true;
  embed::CondBundle audio_only = cond;
  audio_only.audio_null = false;
  audio_only.text_null = true;
  embed::CondBundle full = cond;
  full.audio_null = false;

  const double c_uncond = 1.0 - scales.s_a;
  const double c_audio = scales.s_a - scales.s_t;
  const double c_full = scales.s_t;
  const Matrix zeros(z_l.rows(), z_l.cols());

  Field field = [&](const Matrix& z, double t) {
    // Terms with a zero coefficient are skipped, so reduced scales cost
    // fewer model evaluations and match single-condition sampling bitwise.
    const Matrix u0 = c_uncond != 0.0 ? model.evaluate(z, z_l, uncond, t) : zeros;
    const Matrix ua = c_audio != 0.0 ? model.evaluate(z, z_l, audio_only, t) : zeros;
    const Matrix uf = c_full != 0.0 ? model.evaluate(z, z_l, full, t) : zeros;
    return cfg_combine(u0, ua, uf, scales);
  };
  return euler_sample(field, std::move(z0), sched);
}

}  // namespace sagasr::flow
