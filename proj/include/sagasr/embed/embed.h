#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "sagasr/matrix.h"
#include "sagasr/net/autograd.h"

// Conditioning features: Fourier features of normalized roll-off scalars,
// sinusoidal timestep features, and the two assembly paths (a global token
// prepended to the frame tokens, and extra rows appended to the
// cross-attention context).
namespace sagasr::embed {

inline constexpr std::size_t kDefaultFourierDim = 128;

struct FourierEmbedding {
  Matrix freqs;  // [1 x m]

  static FourierEmbedding random(std::size_t m, std::mt19937_64& rng,
                                 double sigma = 1.0);
  std::size_t output_dim() const { return 2 * freqs.cols(); }
};

// concat(cos(2 pi f x), sin(2 pi f x)) for x in [0, 1).
std::vector<double> fourier_embed(double x, const FourierEmbedding& emb);
ag::Var fourier_embed(double x, ag::Var freqs);

// Entry 2i = sin(1000 t w_i), entry 2i+1 = cos(1000 t w_i),
// w_i = 10000^(-2i/d).
std::vector<double> sinusoidal_embed(double t, std::size_t d);

struct Projection {
  Matrix weight;  // [in x out]
  Matrix bias;    // [1 x out]
};

// linear(concat(f_l_emb, f_h_emb)) + t_emb, one [1 x d_model] token.
std::vector<double> assemble_global(const std::vector<double>& f_l_emb,
                                    const std::vector<double>& f_h_emb,
                                    const std::vector<double>& t_emb,
                                    const Projection& proj);
ag::Var assemble_global(ag::Var f_l_emb, ag::Var f_h_emb, ag::Var t_emb,
                        ag::Var weight, ag::Var bias);

// cond_seq rows followed by proj_l(f_l_emb) and proj_h(f_h_emb).
Matrix assemble_cross(const Matrix& cond_seq, const std::vector<double>& f_l_emb,
                      const std::vector<double>& f_h_emb, const Projection& proj_l,
                      const Projection& proj_h);
ag::Var assemble_cross(ag::Var cond_seq, ag::Var f_l_emb, ag::Var f_h_emb,
                       ag::Var w_l, ag::Var b_l, ag::Var w_h, ag::Var b_h);

// Everything a vector-field evaluation is conditioned on besides z_t and t.
// f_l / f_h are normalized roll-offs in [0, 1). When a null flag is set the
// model substitutes its learned null vector and never reads the payload.
struct CondBundle {
  Matrix cond_seq;  // [seq_len x d_cond], seq_len may be 0
  double f_l = 0.0;
  double f_h = 0.0;
  bool text_null = false;
  bool audio_null = false;
};

// The text part of the cross-attention context: the payload, or the learned
// null row when text_null is set.
ag::Var text_context(ag::Graph& g, const CondBundle& cond, ag::Var null_text);

}  // namespace sagasr::embed
