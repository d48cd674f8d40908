#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "sagasr/embed/embed.h"
#include "sagasr/flow/flow.h"
#include "sagasr/net/autograd.h"

namespace sagasr::net {

struct ModelConfig {
  std::size_t channels = 64;  // latent channels (mel bands)
  std::size_t d_model = 64;
  std::size_t n_blocks = 2;
  std::size_t n_heads = 4;
  std::size_t d_cond = 32;
  std::size_t fourier_m = embed::kDefaultFourierDim;
  std::size_t mlp_ratio = 4;
  // When false the model has no roll-off pathway at all: the global token is
  // the timestep embedding plus a learned bias and the cross-attention
  // context is the text sequence alone.
  bool rolloff_conditioning = true;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

// Toy diffusion transformer over frame tokens.
//
//   tokens  = linear(concat_channels(z_t, z_l))            one per frame
//   global  = assemble_global(f_l, f_h, t)                 prepended
//   context = assemble_cross(text, f_l, f_h)               cross-attention
//   blocks  = pre-norm [self-attn, cross-attn, MLP] residual stack
//   output  = linear(norm(frame tokens))                   [channels x frames]
//
// A null z_l is replaced by the learned "null.audio" row on every frame and a
// null (or empty) text sequence by the learned "null.text" row.
class MiniDit final : public flow::VectorFieldModel {
 public:
  MiniDit(const ModelConfig& cfg, std::uint64_t seed);
  // Builds the parameter layout without initializing values (for loading).
  explicit MiniDit(const ModelConfig& cfg);

  const ModelConfig& config() const { return cfg_; }
  ag::ParameterSet& params() { return params_; }
  const ag::ParameterSet& params() const { return params_; }

  // Records the forward pass; returns the velocity as [channels x frames].
  // `bind` maps a parameter name to its graph leaf.
  using Binder = std::function<ag::Var(const std::string&)>;
  ag::Var forward(ag::Graph& g, const Binder& bind, const Matrix& z_t, const Matrix& z_l,
                  const embed::CondBundle& cond, double t) const;

  Matrix evaluate(const Matrix& z_t, const Matrix& z_l, const embed::CondBundle& cond,
                  double t) const override;
  flow::Tracked track(const Matrix& z_t, const Matrix& z_l, const embed::CondBundle& cond,
                      double t) override;

 private:
  void declare(std::uint64_t seed, bool initialize);

  ModelConfig cfg_;
  ag::ParameterSet params_;
};

}  // namespace sagasr::net
