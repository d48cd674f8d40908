#include "sagasr/net/model.h"

#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

namespace sagasr::net {
namespace {

std::string blk(std::size_t i, const char* suffix) {
  return "blk" + std::to_string(i) + "." + suffix;
}

ag::Var attention(ag::Var x, ag::Var ctx, const MiniDit::Binder& bind,
                  const std::string& prefix, std::size_t n_heads) {
  ag::Var q = ag::linear(x, bind(prefix + ".wq"), bind(prefix + ".bq"));
  ag::Var k = ag::linear(ctx, bind(prefix + ".wk"), bind(prefix + ".bk"));
  ag::Var v = ag::linear(ctx, bind(prefix + ".wv"), bind(prefix + ".bv"));
  const std::size_t d = q.cols();
  const std::size_t dh = d / n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
  std::vector<ag::Var> heads;
  heads.reserve(n_heads);
  for (std::size_t h = 0; h < n_heads; ++h) {
    ag::Var qh = ag::slice_cols(q, h * dh, (h + 1) * dh);
    ag::Var kh = ag::slice_cols(k, h * dh, (h + 1) * dh);
    ag::Var vh = ag::slice_cols(v, h * dh, (h + 1) * dh);
    ag::Var w = ag::softmax_rows(ag::scale(ag::matmul_nt(qh, kh), inv_sqrt));
    heads.push_back(ag::matmul(w, vh));
  }
  ag::Var joined = n_heads == 1 ? heads.front() : ag::concat_cols(heads);
  return ag::linear(joined, bind(prefix + ".wo"), bind(prefix + ".bo"));
}

}  // namespace

void ModelConfig::validate() const {
  if (channels == 0 || d_model == 0 || n_blocks == 0 || n_heads == 0 || d_cond == 0 ||
      fourier_m == 0 || mlp_ratio == 0) {
    throw std::invalid_argument("model: all dimensions must be positive");
  }
  if (d_model % n_heads != 0) {
    throw std::invalid_argument("model: d_model must be divisible by n_heads");
  }
  if (d_model % 2 != 0) {
    throw std::invalid_argument("model: d_model must be even (sinusoidal timestep)");
  }
}

MiniDit::MiniDit(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();
  declare(seed, true);
}

MiniDit::MiniDit(const ModelConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  declare(0, false);
}

void MiniDit::declare(std::uint64_t seed, bool initialize) {
  std::mt19937_64 rng(seed);
  const std::size_t c = cfg_.channels, d = cfg_.d_model, dc = cfg_.d_cond;
  const std::size_t m2 = 2 * cfg_.fourier_m, hidden = cfg_.mlp_ratio * d;

  auto weight = [&](const std::string& name, std::size_t in, std::size_t out) {
    Matrix w(in, out);
    if (initialize) {
      std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
      for (double& v : w.values()) v = normal(rng);
    }
    params_.add(name, std::move(w));
  };
  auto zeros = [&](const std::string& name, std::size_t rows, std::size_t cols) {
    params_.add(name, Matrix(rows, cols));
  };
  auto ones = [&](const std::string& name, std::size_t cols) {
    params_.add(name, Matrix(1, cols, initialize ? 1.0 : 0.0));
  };
  auto linear = [&](const std::string& prefix, const char* w, const char* b, std::size_t in,
                    std::size_t out) {
    weight(prefix + "." + w, in, out);
    zeros(prefix + "." + b, 1, out);
  };
  auto attn = [&](const std::string& prefix, std::size_t d_kv) {
    linear(prefix, "wq", "bq", d, d);
    linear(prefix, "wk", "bk", d_kv, d);
    linear(prefix, "wv", "bv", d_kv, d);
    linear(prefix, "wo", "bo", d, d);
  };

  linear("in", "w", "b", 2 * c, d);
  zeros("null.audio", 1, c);
  zeros("null.text", 1, dc);
  if (initialize) {
    std::normal_distribution<double> normal(0.0, 0.02);
    for (double& v : params_.at("null.text").value.values()) v = normal(rng);
  }
  if (cfg_.rolloff_conditioning) {
    Matrix freqs(1, cfg_.fourier_m);
    if (initialize) freqs = embed::FourierEmbedding::random(cfg_.fourier_m, rng).freqs;
    params_.add("fourier.freqs", std::move(freqs));
    linear("global", "w", "b", 2 * m2, d);
    linear("cross.l", "w", "b", m2, dc);
    linear("cross.h", "w", "b", m2, dc);
  } else {
    zeros("global.b", 1, d);
  }
  for (std::size_t i = 0; i < cfg_.n_blocks; ++i) {
    ones(blk(i, "ln1.g"), d);
    zeros(blk(i, "ln1.b"), 1, d);
    attn(blk(i, "attn"), d);
    ones(blk(i, "ln2.g"), d);
    zeros(blk(i, "ln2.b"), 1, d);
    attn(blk(i, "xattn"), dc);
    ones(blk(i, "ln3.g"), d);
    zeros(blk(i, "ln3.b"), 1, d);
    linear(blk(i, "mlp"), "w1", "b1", d, hidden);
    linear(blk(i, "mlp"), "w2", "b2", hidden, d);
  }
  ones("out.ln.g", d);
  zeros("out.ln.b", 1, d);
  // Output head starts at zero so the initial field is u = 0.
  zeros("out.w", d, c);
  zeros("out.b", 1, c);
}

ag::Var MiniDit::forward(ag::Graph& g, const Binder& bind, const Matrix& z_t,
                         const Matrix& z_l, const embed::CondBundle& cond, double t) const {
  const std::size_t c = cfg_.channels;
  if (z_t.rows() != c || z_t.cols() == 0) {
    throw std::invalid_argument("model: z_t must be [" + std::to_string(c) + " x T], got " +
                                z_t.shape_string());
  }
  const std::size_t frames = z_t.cols();
  if (!cond.audio_null && !z_l.same_shape(z_t)) {
    throw std::invalid_argument("model: z_l shape " + z_l.shape_string() +
                                " does not match z_t " + z_t.shape_string());
  }

  ag::Var zt = g.constant(z_t.transposed());
  ag::Var zl = cond.audio_null ? ag::repeat_rows(bind("null.audio"), frames)
                               : g.constant(z_l.transposed());
  ag::Var tokens = ag::linear(ag::concat_cols({zt, zl}), bind("in.w"), bind("in.b"));

  const auto t_emb_values = embed::sinusoidal_embed(t, cfg_.d_model);
  ag::Var t_emb = g.constant(Matrix(1, cfg_.d_model, t_emb_values));

  embed::CondBundle text_cond = cond;
  if (text_cond.cond_seq.rows() == 0) text_cond.text_null = true;
  ag::Var text = embed::text_context(g, text_cond, bind("null.text"));

  ag::Var global, ctx;
  if (cfg_.rolloff_conditioning) {
    ag::Var freqs = bind("fourier.freqs");
    ag::Var f_l = embed::fourier_embed(cond.f_l, freqs);
    ag::Var f_h = embed::fourier_embed(cond.f_h, freqs);
    global = embed::assemble_global(f_l, f_h, t_emb, bind("global.w"), bind("global.b"));
    ctx = embed::assemble_cross(text, f_l, f_h, bind("cross.l.w"), bind("cross.l.b"),
                                bind("cross.h.w"), bind("cross.h.b"));
  } else {
    global = ag::add(t_emb, bind("global.b"));
    ctx = text;
  }

  ag::Var h = ag::concat_rows({global, tokens});
  for (std::size_t i = 0; i < cfg_.n_blocks; ++i) {
    ag::Var a = ag::layer_norm(h, bind(blk(i, "ln1.g")), bind(blk(i, "ln1.b")));
    h = ag::add(h, attention(a, a, bind, blk(i, "attn"), cfg_.n_heads));
    ag::Var x = ag::layer_norm(h, bind(blk(i, "ln2.g")), bind(blk(i, "ln2.b")));
    h = ag::add(h, attention(x, ctx, bind, blk(i, "xattn"), cfg_.n_heads));
    ag::Var m = ag::layer_norm(h, bind(blk(i, "ln3.g")), bind(blk(i, "ln3.b")));
    m = ag::gelu(ag::linear(m, bind(blk(i, "mlp.w1")), bind(blk(i, "mlp.b1"))));
    h = ag::add(h, ag::linear(m, bind(blk(i, "mlp.w2")), bind(blk(i, "mlp.b2"))));
  }
  ag::Var frames_out = ag::slice_rows(h, 1, frames + 1);
  frames_out = ag::layer_norm(frames_out, bind("out.ln.g"), bind("out.ln.b"));
  return ag::transpose(ag::linear(frames_out, bind("out.w"), bind("out.b")));
}

Matrix MiniDit::evaluate(const Matrix& z_t, const Matrix& z_l, const embed::CondBundle& cond,
                         double t) const {
  ag::Graph g;
  Binder bind = [&](const std::string& name) { return g.constant(params_.at(name).value); };
  return forward(g, bind, z_t, z_l, cond, t).value();
}

flow::Tracked MiniDit::track(const Matrix& z_t, const Matrix& z_l,
                             const embed::CondBundle& cond, double t) {
  auto g = std::make_shared<ag::Graph>();
  Binder bind = [&](const std::string& name) { return g->param(params_.at(name)); };
  ag::Var out = forward(*g, bind, z_t, z_l, cond, t);
  flow::Tracked tr;
  tr.value = out.value();
  tr.backward = [g, out](const Matrix& grad) { g->backward(out, grad); };
  return tr;
}

}  // namespace sagasr::net
