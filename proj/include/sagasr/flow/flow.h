#pragma once

#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sagasr/embed/embed.h"
#include "sagasr/matrix.h"

// Flow-matching engine on [channels x frames] latents: the straight-line
// noise-to-data path, its velocity, the regression loss with condition
// dropout, a linear-quadratic time grid, the Euler integrator, and the
// two-scale classifier-free guidance combiner.
namespace sagasr::flow {

using Rng = std::mt19937_64;

enum class LatentRole { kNoise, kData, kInterpolant, kVelocity, kCondition };

struct LatentSeq {
  Matrix data;  // [C x T]
  LatentRole role = LatentRole::kData;

  std::size_t channels() const { return data.rows(); }
  std::size_t frames() const { return data.cols(); }
};

// (1 - t) z0 + t z1.
LatentSeq interpolate(const LatentSeq& z0, const LatentSeq& z1, double t);
// z1 - z0.
LatentSeq target_velocity(const LatentSeq& z0, const LatentSeq& z1);

class TSchedule {
 public:
  explicit TSchedule(std::vector<double> knots);
  const std::vector<double>& knots() const { return knots_; }
  std::size_t steps() const { return knots_.size() - 1; }
  double operator[](std::size_t i) const { return knots_[i]; }

 private:
  std::vector<double> knots_;
};

// Knots i / big_n for i <= n_linear, then
// t_lin + (1 - t_lin) (j / (n_steps - n_linear))^2 up to exactly 1.
TSchedule linear_quadratic_schedule(std::size_t n_steps = 100, std::size_t n_linear = 25,
                                    std::size_t big_n = 1000);

// One knot per line, 17 significant digits.
std::string dump_schedule(const TSchedule& sched);

using Field = std::function<Matrix(const Matrix& z, double t)>;

// Explicit Euler over the schedule; the field is never evaluated at the
// final knot. Throws "divergence" on a non-finite state.
Matrix euler_sample(const Field& field, Matrix z0, const TSchedule& sched);

struct GuidanceScales {
  double s_a = 1.4;
  double s_t = 1.2;
};

// u_uncond + s_a (u_audio - u_uncond) + s_t (u_full - u_audio), evaluated as
// (1 - s_a) u_uncond + (s_a - s_t) u_audio + s_t u_full so that the s = (1, 1)
// and s = (1, 0) reductions are exact.
Matrix cfg_combine(const Matrix& u_uncond, const Matrix& u_audio, const Matrix& u_full,
                   const GuidanceScales& scales);

// A velocity prediction still attached to its computation graph.
// backward(dL/du) accumulates parameter gradients inside the model.
struct Tracked {
  Matrix value;
  std::function<void(const Matrix& grad_output)> backward;
};

// u(z_t, z_l, cond, f_l, f_h, t; theta). z_l and the text payload are ignored
// when the corresponding null flag in cond is set.
class VectorFieldModel {
 public:
  virtual ~VectorFieldModel() = default;
  virtual Matrix evaluate(const Matrix& z_t, const Matrix& z_l,
                          const embed::CondBundle& cond, double t) const = 0;
  virtual Tracked track(const Matrix& z_t, const Matrix& z_l,
                        const embed::CondBundle& cond, double t) = 0;
};

struct FmConfig {
  double p_drop_audio = 0.10;
  double p_drop_text = 0.10;
};

struct FmDraw {
  double t = 0.0;
  Matrix z0;
  bool drop_audio = false;
  bool drop_text = false;
};

// Draw order: t ~ U[0,1), z0 ~ N(0,1) row-major, audio drop, text drop.
FmDraw draw_fm(Rng& rng, std::size_t channels, std::size_t frames, const FmConfig& cfg);

// Squared-error flow-matching loss for one item. Gradients of
// grad_weight * loss are accumulated into the model. Throws "divergence"
// when the loss is not finite.
double fm_loss(VectorFieldModel& model, const Matrix& z1, const Matrix& z_l,
               const embed::CondBundle& cond, Rng& rng, const FmConfig& cfg = {},
               double grad_weight = 1.0);

// Same, with the random draw supplied by the caller.
double fm_loss(VectorFieldModel& model, const Matrix& z1, const Matrix& z_l,
               const embed::CondBundle& cond, const FmDraw& draw, double grad_weight = 1.0);

// Euler integration from z0 ~ N(0,1) (drawn from rng, shape of z_l) where each
// step's velocity is cfg_combine over the evaluations (null z_l, null text),
// (z_l, null text), (z_l, text). Roll-off conditions are present in all three.
Matrix guided_sample(const VectorFieldModel& model, const Matrix& z_l,
                     const embed::CondBundle& cond, const GuidanceScales& scales,
                     const TSchedule& sched, Rng& rng);

}  // namespace sagasr::flow
