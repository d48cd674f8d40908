#include "sagasr/embed/embed.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sagasr::embed {
namespace {

Matrix row_of(const std::vector<double>& v) { return Matrix(1, v.size(), v); }

std::vector<double> to_vector(const Matrix& m) { return m.values(); }

void check_unit_interval(double x) {
  if (!(x >= 0.0 && x < 1.0)) {
    throw std::invalid_argument("fourier_embed: input must lie in [0, 1)");
  }
}

}  // namespace

FourierEmbedding FourierEmbedding::random(std::size_t m, std::mt19937_64& rng,
                                          double sigma) {
  if (m == 0) throw std::invalid_argument("fourier embedding needs m >= 1");
  std::normal_distribution<double> normal(0.0, sigma);
  FourierEmbedding e;
  e.freqs = Matrix(1, m);
  for (double& f : e.freqs.values()) f = normal(rng);
  return e;
}

ag::Var fourier_embed(double x, ag::Var freqs) {
  check_unit_interval(x);
  ag::Var phase = ag::scale(freqs, 2.0 * std::numbers::pi * x);
  return ag::concat_cols({ag::cos(phase), ag::sin(phase)});
}

std::vector<double> fourier_embed(double x, const FourierEmbedding& emb) {
  ag::Graph g;
  return to_vector(fourier_embed(x, g.constant(emb.freqs)).value());
}

std::vector<double> sinusoidal_embed(double t, std::size_t d) {
  if (d % 2 != 0) throw std::invalid_argument("sinusoidal_embed: d must be even");
  const double position = 1000.0 * t;
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d / 2; ++i) {
    const double w = std::pow(10000.0, -2.0 * static_cast<double>(i) / static_cast<double>(d));
    out[2 * i] = std::sin(position * w);
    out[2 * i + 1] = std::cos(position * w);
  }
  return out;
}

ag::Var assemble_global(ag::Var f_l_emb, ag::Var f_h_emb, ag::Var t_emb,
                        ag::Var weight, ag::Var bias) {
  ag::Var joined = ag::concat_cols({f_l_emb, f_h_emb});
  if (weight.rows() != joined.cols() || weight.cols() != t_emb.cols()) {
    throw std::invalid_argument("assemble_global: projection shape mismatch");
  }
  return ag::add(ag::linear(joined, weight, bias), t_emb);
}

std::vector<double> assemble_global(const std::vector<double>& f_l_emb,
                                    const std::vector<double>& f_h_emb,
                                    const std::vector<double>& t_emb,
                                    const Projection& proj) {
  ag::Graph g;
  return to_vector(assemble_global(g.constant(row_of(f_l_emb)), g.constant(row_of(f_h_emb)),
                                   g.constant(row_of(t_emb)), g.constant(proj.weight),
                                   g.constant(proj.bias))
                       .value());
}

ag::Var assemble_cross(ag::Var cond_seq, ag::Var f_l_emb, ag::Var f_h_emb,
                       ag::Var w_l, ag::Var b_l, ag::Var w_h, ag::Var b_h) {
  ag::Var tok_l = ag::linear(f_l_emb, w_l, b_l);
  ag::Var tok_h = ag::linear(f_h_emb, w_h, b_h);
  if (tok_l.cols() != tok_h.cols()) {
    throw std::invalid_argument("assemble_cross: roll-off token widths differ");
  }
  if (cond_seq.rows() == 0) return ag::concat_rows({tok_l, tok_h});
  if (tok_l.cols() != cond_seq.cols()) {
    throw std::invalid_argument("assemble_cross: roll-off tokens do not match d_cond");
  }
  return ag::concat_rows({cond_seq, tok_l, tok_h});
}

Matrix assemble_cross(const Matrix& cond_seq, const std::vector<double>& f_l_emb,
                      const std::vector<double>& f_h_emb, const Projection& proj_l,
                      const Projection& proj_h) {
  ag::Graph g;
  return assemble_cross(g.constant(cond_seq), g.constant(row_of(f_l_emb)),
                        g.constant(row_of(f_h_emb)), g.constant(proj_l.weight),
                        g.constant(proj_l.bias), g.constant(proj_h.weight),
                        g.constant(proj_h.bias))
      .value();
}

ag::Var text_context(ag::Graph& g, const CondBundle& cond, ag::Var null_text) {
  if (cond.text_null) return null_text;
  if (cond.cond_seq.rows() > 0 && cond.cond_seq.cols() != null_text.cols()) {
    throw std::invalid_argument("text_context: cond_seq width does not match d_cond");
  }
  return g.constant(cond.cond_seq);
}

}  // namespace sagasr::embed
