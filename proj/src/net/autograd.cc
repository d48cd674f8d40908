#include "sagasr/net/autograd.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sagasr::ag {

// ---------------------------------------------------------------------------
// ParameterSet

Parameter& ParameterSet::add(const std::string& name, Matrix init) {
  if (params_.count(name) != 0) {
    throw std::invalid_argument("parameter already exists: " + name);
  }
  Parameter p;
  p.grad = Matrix(init.rows(), init.cols());
  p.value = std::move(init);
  return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParameterSet::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("no such parameter: " + name);
  return it->second;
}

const Parameter& ParameterSet::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("no such parameter: " + name);
  return it->second;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& [name, p] : params_) n += p.value.size();
  return n;
}

void ParameterSet::zero_grad() {
  for (auto& [name, p] : params_) {
    std::fill(p.grad.values().begin(), p.grad.values().end(), 0.0);
  }
}

void ParameterSet::scale_grad(double s) {
  for (auto& [name, p] : params_) {
    for (double& g : p.grad.values()) g *= s;
  }
}

// ---------------------------------------------------------------------------
// Graph

const Matrix& Var::value() const { return graph_->value(id_); }

Var Graph::record(Matrix value, BackwardFn backward) {
  auto node = std::make_unique<Node>();
  node->value = std::move(value);
  node->backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::constant(Matrix value) { return record(std::move(value), nullptr); }

Var Graph::param(Parameter& p) {
  Var v = record(p.value, nullptr);
  nodes_.back()->param = &p;
  return v;
}

Matrix& Graph::grad_mut(std::size_t id) {
  Node& n = *nodes_[id];
  if (n.grad.size() == 0 && n.value.size() != 0) {
    n.grad = Matrix(n.value.rows(), n.value.cols());
  }
  return n.grad;
}

void Graph::backward(Var root, const Matrix& seed) {
  if (root.graph() != this) throw std::invalid_argument("backward: foreign var");
  if (!seed.same_shape(value(root.id()))) {
    throw std::invalid_argument("backward: seed shape mismatch");
  }
  for (auto& n : nodes_) n->grad = Matrix();
  grad_mut(root.id()) = seed;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = *nodes_[i];
    if (n.grad.size() == 0) continue;
    if (n.backward) n.backward(*this, i);
    if (n.param != nullptr) {
      auto& dst = n.param->grad.values();
      const auto& src = n.grad.values();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
    }
  }
}

void Graph::backward(Var root) {
  backward(root, Matrix(root.rows(), root.cols(), 1.0));
}

// ---------------------------------------------------------------------------
// ops

namespace {

Graph& same_graph(Var a, Var b) {
  if (a.graph() != b.graph() || a.graph() == nullptr) {
    throw std::invalid_argument("autograd: vars from different graphs");
  }
  return *a.graph();
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a.shape_string() + " vs " + b.shape_string());
  }
}

// dst += a * b^T
void acc_matmul_nt(Matrix& dst, const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = a.data() + i * k;
    double* dr = dst.data() + i * m;
    for (std::size_t j = 0; j < m; ++j) {
      const double* br = b.data() + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += ar[p] * br[p];
      dr[j] += acc;
    }
  }
}

// dst += a^T * b
void acc_matmul_tn(Matrix& dst, const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t r = 0; r < n; ++r) {
    const double* ar = a.data() + r * k;
    const double* br = b.data() + r * m;
    for (std::size_t i = 0; i < k; ++i) {
      const double av = ar[i];
      if (av == 0.0) continue;
      double* dr = dst.data() + i * m;
      for (std::size_t j = 0; j < m; ++j) dr[j] += av * br[j];
    }
  }
}

// dst += a * b
void acc_matmul(Matrix& dst, const Matrix& a, const Matrix& b) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* dr = dst.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a(i, p);
      if (av == 0.0) continue;
      const double* br = b.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) dr[j] += av * br[j];
    }
  }
}

template <typename F, typename D>
Var unary(Var a, F f, D df) {
  Graph& g = *a.graph();
  Matrix out = a.value();
  for (double& v : out.values()) v = f(v);
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia, df](Graph& g, std::size_t self) {
    const Matrix& x = g.value(ia);
    const Matrix& go = g.grad(self);
    Matrix& ga = g.grad_mut(ia);
    for (std::size_t i = 0; i < x.size(); ++i) ga[i] += go[i] * df(x[i]);
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(sagasr::matmul(a.value(), b.value()),
                  [ia, ib](Graph& g, std::size_t self) {
                    const Matrix& go = g.grad(self);
                    acc_matmul_nt(g.grad_mut(ia), go, g.value(ib));
                    acc_matmul_tn(g.grad_mut(ib), g.value(ia), go);
                  });
}

Var matmul_nt(Var a, Var b) {
  Graph& g = same_graph(a, b);
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: shape mismatch");
  Matrix out(a.rows(), b.rows());
  acc_matmul_nt(out, a.value(), b.value());
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), [ia, ib](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    acc_matmul(g.grad_mut(ia), go, g.value(ib));
    acc_matmul_tn(g.grad_mut(ib), go, g.value(ia));
  });
}

Var add(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), [ia, ib](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    Matrix& ga = g.grad_mut(ia);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
    Matrix& gb = g.grad_mut(ib);
    for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i];
  });
}

Var sub(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), [ia, ib](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    Matrix& ga = g.grad_mut(ia);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
    Matrix& gb = g.grad_mut(ib);
    for (std::size_t i = 0; i < go.size(); ++i) gb[i] -= go[i];
  });
}

Var mul(Var a, Var b) {
  Graph& g = same_graph(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  const std::size_t ia = a.id(), ib = b.id();
  return g.record(std::move(out), [ia, ib](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    const Matrix& va = g.value(ia);
    const Matrix& vb = g.value(ib);
    Matrix& ga = g.grad_mut(ia);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * vb[i];
    Matrix& gb = g.grad_mut(ib);
    for (std::size_t i = 0; i < go.size(); ++i) gb[i] += go[i] * va[i];
  });
}

Var scale(Var a, double s) {
  Graph& g = *a.graph();
  Matrix out = a.value();
  for (double& v : out.values()) v *= s;
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia, s](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    Matrix& ga = g.grad_mut(ia);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i] * s;
  });
}

Var add_row(Var a, Var row) {
  Graph& g = same_graph(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) {
    throw std::invalid_argument("add_row: shape mismatch " + a.value().shape_string() +
                                " + " + row.value().shape_string());
  }
  Matrix out = a.value();
  const Matrix& r = row.value();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto dst = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) dst[j] += r[j];
  }
  const std::size_t ia = a.id(), ir = row.id();
  return g.record(std::move(out), [ia, ir](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    Matrix& ga = g.grad_mut(ia);
    for (std::size_t i = 0; i < go.size(); ++i) ga[i] += go[i];
    Matrix& gr = g.grad_mut(ir);
    for (std::size_t i = 0; i < go.rows(); ++i) {
      const auto src = go.row(i);
      for (std::size_t j = 0; j < go.cols(); ++j) gr[j] += src[j];
    }
  });
}

Var repeat_rows(Var row, std::size_t n) {
  Graph& g = *row.graph();
  if (row.rows() != 1) throw std::invalid_argument("repeat_rows: expects a single row");
  const std::size_t m = row.cols();
  Matrix out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy(row.value().data(), row.value().data() + m, out.data() + i * m);
  }
  const std::size_t ir = row.id();
  return g.record(std::move(out), [ir](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    Matrix& gr = g.grad_mut(ir);
    for (std::size_t i = 0; i < go.rows(); ++i) {
      const auto src = go.row(i);
      for (std::size_t j = 0; j < go.cols(); ++j) gr[j] += src[j];
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows: no inputs");
  Graph& g = *parts.front().graph();
  const std::size_t m = parts.front().cols();
  std::size_t n = 0;
  for (const auto& p : parts) {
    if (p.graph() != &g || p.cols() != m) {
      throw std::invalid_argument("concat_rows: column mismatch");
    }
    n += p.rows();
  }
  Matrix out(n, m);
  std::vector<std::size_t> ids;
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p.value().data(), p.value().data() + p.value().size(), out.data() + off * m);
    off += p.rows();
    ids.push_back(p.id());
  }
  return g.record(std::move(out), [ids](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    std::size_t off = 0;
    for (std::size_t id : ids) {
      Matrix& gp = g.grad_mut(id);
      const double* src = go.data() + off * go.cols();
      for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += src[i];
      off += g.value(id).rows();
    }
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  Graph& g = *parts.front().graph();
  const std::size_t n = parts.front().rows();
  std::size_t m = 0;
  for (const auto& p : parts) {
    if (p.graph() != &g || p.rows() != n) {
      throw std::invalid_argument("concat_cols: row mismatch");
    }
    m += p.cols();
  }
  Matrix out(n, m);
  std::vector<std::size_t> ids;
  std::size_t off = 0;
  for (const auto& p : parts) {
    const Matrix& v = p.value();
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(v.row(i).begin(), v.row(i).end(), out.data() + i * m + off);
    }
    off += v.cols();
    ids.push_back(p.id());
  }
  return g.record(std::move(out), [ids](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    std::size_t off = 0;
    for (std::size_t id : ids) {
      Matrix& gp = g.grad_mut(id);
      for (std::size_t i = 0; i < gp.rows(); ++i) {
        for (std::size_t j = 0; j < gp.cols(); ++j) gp(i, j) += go(i, off + j);
      }
      off += gp.cols();
    }
  });
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  Graph& g = *a.graph();
  if (begin > end || end > a.rows()) throw std::invalid_argument("slice_rows: bad range");
  const std::size_t m = a.cols();
  Matrix out(end - begin, m);
  std::copy(a.value().data() + begin * m, a.value().data() + end * m, out.data());
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia, begin, m](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    Matrix& ga = g.grad_mut(ia);
    double* dst = ga.data() + begin * m;
    for (std::size_t i = 0; i < go.size(); ++i) dst[i] += go[i];
  });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Graph& g = *a.graph();
  if (begin > end || end > a.cols()) throw std::invalid_argument("slice_cols: bad range");
  const std::size_t n = a.rows(), w = end - begin;
  Matrix out(n, w);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < w; ++j) out(i, j) = a.value()(i, begin + j);
  }
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia, begin](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    Matrix& ga = g.grad_mut(ia);
    for (std::size_t i = 0; i < go.rows(); ++i) {
      for (std::size_t j = 0; j < go.cols(); ++j) ga(i, begin + j) += go(i, j);
    }
  });
}

Var transpose(Var a) {
  Graph& g = *a.graph();
  const std::size_t ia = a.id();
  return g.record(a.value().transposed(), [ia](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    Matrix& ga = g.grad_mut(ia);
    for (std::size_t i = 0; i < go.rows(); ++i) {
      for (std::size_t j = 0; j < go.cols(); ++j) ga(j, i) += go(i, j);
    }
  });
}

Var cos(Var a) {
  return unary(a, [](double x) { return std::cos(x); },
               [](double x) { return -std::sin(x); });
}

Var sin(Var a) {
  return unary(a, [](double x) { return std::sin(x); },
               [](double x) { return std::cos(x); });
}

Var gelu(Var a) {
  constexpr double c = 0.7978845608028654;  // sqrt(2 / pi)
  return unary(
      a,
      [](double x) {
        return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
      },
      [](double x) {
        const double u = c * (x + 0.044715 * x * x * x);
        const double th = std::tanh(u);
        const double du = c * (1.0 + 3.0 * 0.044715 * x * x);
        return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
      });
}

Var softmax_rows(Var a) {
  Graph& g = *a.graph();
  Matrix out = a.value();
  for (std::size_t i = 0; i < out.rows(); ++i) {
    auto r = out.row(i);
    double mx = r[0];
    for (double v : r) mx = std::max(mx, v);
    double sum = 0.0;
    for (double& v : r) {
      v = std::exp(v - mx);
      sum += v;
    }
    for (double& v : r) v /= sum;
  }
  const std::size_t ia = a.id();
  return g.record(std::move(out), [ia](Graph& g, std::size_t self) {
    const Matrix& y = g.value(self);
    const Matrix& go = g.grad(self);
    Matrix& ga = g.grad_mut(ia);
    for (std::size_t i = 0; i < y.rows(); ++i) {
      const auto yr = y.row(i);
      const auto gr = go.row(i);
      double dot = 0.0;
      for (std::size_t j = 0; j < yr.size(); ++j) dot += yr[j] * gr[j];
      auto dst = ga.row(i);
      for (std::size_t j = 0; j < yr.size(); ++j) dst[j] += yr[j] * (gr[j] - dot);
    }
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  Graph& g = same_graph(x, gamma);
  const std::size_t n = x.rows(), m = x.cols();
  if (gamma.rows() != 1 || gamma.cols() != m || beta.rows() != 1 || beta.cols() != m) {
    throw std::invalid_argument("layer_norm: gain/bias shape mismatch");
  }
  // Normalized activations and inverse std are kept for the backward pass.
  auto xhat = std::make_shared<Matrix>(n, m);
  auto inv_std = std::make_shared<std::vector<double>>(n);
  Matrix out(n, m);
  const Matrix& xv = x.value();
  const Matrix& gv = gamma.value();
  const Matrix& bv = beta.value();
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = xv.row(i);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= static_cast<double>(m);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < m; ++j) {
      const double h = (r[j] - mean) * is;
      (*xhat)(i, j) = h;
      out(i, j) = h * gv[j] + bv[j];
    }
  }
  const std::size_t ix = x.id(), ig = gamma.id(), ib = beta.id();
  return g.record(std::move(out), [ix, ig, ib, xhat, inv_std](Graph& g, std::size_t self) {
    const Matrix& go = g.grad(self);
    const Matrix& gv = g.value(ig);
    const std::size_t n = go.rows(), m = go.cols();
    Matrix& ggam = g.grad_mut(ig);
    Matrix& gbet = g.grad_mut(ib);
    Matrix& gx = g.grad_mut(ix);
    std::vector<double> dh(m);
    for (std::size_t i = 0; i < n; ++i) {
      double sum_dh = 0.0, sum_dh_h = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        const double h = (*xhat)(i, j);
        ggam[j] += go(i, j) * h;
        gbet[j] += go(i, j);
        dh[j] = go(i, j) * gv[j];
        sum_dh += dh[j];
        sum_dh_h += dh[j] * h;
      }
      const double is = (*inv_std)[i];
      const double inv_m = 1.0 / static_cast<double>(m);
      for (std::size_t j = 0; j < m; ++j) {
        gx(i, j) += is * (dh[j] - inv_m * sum_dh - (*xhat)(i, j) * inv_m * sum_dh_h);
      }
    }
  });
}

Var mse(Var a, const Matrix& target) {
  Graph& g = *a.graph();
  require_same_shape(a.value(), target, "mse");
  const double n = static_cast<double>(target.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double d = a.value()[i] - target[i];
    acc += d * d;
  }
  const std::size_t ia = a.id();
  auto tgt = std::make_shared<Matrix>(target);
  return g.record(Matrix(1, 1, acc / n), [ia, tgt, n](Graph& g, std::size_t self) {
    const double go = g.grad(self)[0];
    const Matrix& va = g.value(ia);
    Matrix& ga = g.grad_mut(ia);
    for (std::size_t i = 0; i < va.size(); ++i) {
      ga[i] += go * 2.0 * (va[i] - (*tgt)[i]) / n;
    }
  });
}

Var linear(Var x, Var w, Var b) { return add_row(matmul(x, w), b); }

}  // namespace sagasr::ag
