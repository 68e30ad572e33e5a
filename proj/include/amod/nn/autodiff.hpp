#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace amod::nn {

/// Rows are samples, columns are features.
using Matrix = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
};

/// Owns a network's parameters with stable addresses and a fixed order.
class ParameterSet {
 public:
  std::size_t add(std::string name, Matrix init);

  std::size_t size() const { return params_.size(); }
  Parameter& operator[](std::size_t i) { return params_[i]; }
  const Parameter& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  void zero_grad();
  std::size_t scalar_count() const;
  bool same_shapes(const ParameterSet& other) const;

 private:
  std::deque<Parameter> params_;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row ranges into a flat item list: row i owns items[offsets[i], offsets[i+1]).
struct Segments {
  std::vector<int> offsets{0};
  std::vector<int> items;

  std::size_t rows() const { return offsets.size() - 1; }
  void push_row(const std::vector<int>& row) {
    items.insert(items.end(), row.begin(), row.end());
    offsets.push_back(static_cast<int>(items.size()));
  }
};

class Graph;

/// Handle to a node of a Graph.
struct Var {
  Graph* graph = nullptr;
  int id = -1;

  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

/// Reverse-mode tape. Nodes are recorded in creation order; `backward` walks
/// them in reverse. With tracking disabled every node is a constant, which
/// makes inference passes cheap.
class Graph {
 public:
  explicit Graph(bool track_gradients = true) : tracking_(track_gradients) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool tracking() const { return tracking_; }

  Var constant(Matrix m);
  /// Leaf aliasing the parameter's value; gradients accumulate into p.grad.
  Var param(Parameter& p);
  Var param(const Parameter& p);

  const Matrix& value(int id) const;
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  /// Gradient buffer of a node, zero-initialised on first access.
  Matrix& grad(int id);

  /// Seeds d(root)/d(root) = 1 for a 1x1 root and propagates to every leaf.
  void backward(Var root);

  using BackwardFn = std::function<void(Graph&, const Matrix& out_grad)>;
  Var record(Matrix value, std::vector<int> parents, BackwardFn fn);

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    const Matrix* alias = nullptr;
    Matrix grad;
    bool requires_grad = false;
    Parameter* param = nullptr;
    BackwardFn backward;
  };
  std::vector<Node> nodes_;
  bool tracking_;
};

// Differentiable operators. All shapes follow rows = samples.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
/// Adds a 1 x k row to every row of a.
Var add_row(Var a, Var row);
/// Repeats an n x 1 column k times.
Var broadcast_col(Var a, Eigen::Index k);
Var relu(Var a);
Var softmax_rows(Var a);
Var log_softmax_rows(Var a);
Var concat_cols(const std::vector<Var>& parts);
/// n x k -> n x 1.
Var row_sum(Var a);
/// Mean over all entries, as a 1 x 1 node.
Var mean_all(Var a);
Var sum_all(Var a);
/// Elementwise minimum; the gradient goes to the smaller operand (first on ties).
Var min_elem(Var a, Var b);
/// Picks column cols[i] of row i -> n x 1.
Var pick_cols(Var a, const std::vector<int>& cols);
Var square(Var a);

/// Single-head dot-product attention pooled per row.
///
/// Row i of `query` attends over the item rows listed in segment i of
/// `groups`; softmax(scale * q.k) weights the matching `values` rows. Rows
/// with an empty segment return `empty` (1 x dv) instead.
Var attention_pool(Var query, Var keys, Var values, const Segments& groups, Var empty, double scale);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, double s) { return scale(a, s); }

}  // namespace amod::nn
