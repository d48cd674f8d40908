#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "sagasr/matrix.h"

// Tape-based reverse-mode differentiation over dense matrices.
//
// A Graph records every operation applied to its Vars. Graph::backward walks
// the tape in reverse creation order, so any topological order produced by
// ordinary forward code is valid. Parameter leaves accumulate into the
// owning Parameter::grad, which lets one ParameterSet collect gradients from
// several graphs (one per batch item).
namespace sagasr::ag {

struct Parameter {
  Matrix value;
  Matrix grad;
};

// Named parameters, iterated in lexicographic name order.
class ParameterSet {
 public:
  Parameter& add(const std::string& name, Matrix init);
  Parameter& at(const std::string& name);
  const Parameter& at(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }
  std::size_t size() const { return params_.size(); }
  std::size_t scalar_count() const;

  void zero_grad();
  void scale_grad(double s);

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::map<std::string, Parameter> params_;
};

class Graph;

class Var {
 public:
  Var() = default;
  Var(Graph* g, std::size_t id) : graph_(g), id_(id) {}

  const Matrix& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Graph* graph() const { return graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

class Graph {
 public:
  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Matrix value);
  Var param(Parameter& p);

  // Seeds d(root) = seed and propagates to every recorded node.
  void backward(Var root, const Matrix& seed);
  // Scalar root convenience: seed 1.
  void backward(Var root);

  const Matrix& value(std::size_t id) const { return nodes_[id]->value; }
  const Matrix& grad(std::size_t id) const { return nodes_[id]->grad; }
  std::size_t size() const { return nodes_.size(); }

  // Low-level op construction; used by the free op functions.
  using BackwardFn = std::function<void(Graph&, std::size_t self)>;
  Var record(Matrix value, BackwardFn backward);
  Matrix& grad_mut(std::size_t id);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    BackwardFn backward;
    Parameter* param = nullptr;
  };
  std::vector<std::unique_ptr<Node>> nodes_;
};

// ---- ops ----
Var matmul(Var a, Var b);     // a * b
Var matmul_nt(Var a, Var b);  // a * b^T
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);        // elementwise
Var scale(Var a, double s);
Var add_row(Var a, Var row);  // broadcast a [n x m] + row [1 x m]
Var repeat_rows(Var row, std::size_t n);
Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var transpose(Var a);
Var cos(Var a);
Var sin(Var a);
Var gelu(Var a);              // tanh approximation
Var softmax_rows(Var a);
// Row-wise normalization with learned gain/bias rows [1 x m].
Var layer_norm(Var x, Var gamma, Var beta, double eps = 1e-5);
// mean((a - target)^2) as a [1 x 1] node.
Var mse(Var a, const Matrix& target);

// x * w + b, with x [n x in], w [in x out], b [1 x out].
Var linear(Var x, Var w, Var b);

}  // namespace sagasr::ag
