#include "amod/nn/autodiff.hpp"

#include <cmath>
#include <memory>

namespace amod::nn {

std::size_t ParameterSet::add(std::string name, Matrix init) {
  Parameter p;
  p.name = std::move(name);
  p.grad = Matrix::Zero(init.rows(), init.cols());
  p.value = std::move(init);
  params_.push_back(std::move(p));
  return params_.size() - 1;
}

void ParameterSet::zero_grad() {
  for (auto& p : params_) p.grad.setZero(p.value.rows(), p.value.cols());
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

bool ParameterSet::same_shapes(const ParameterSet& other) const {
  if (other.size() != size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (params_[i].value.rows() != other[i].value.rows() ||
        params_[i].value.cols() != other[i].value.cols())
      return false;
  }
  return true;
}

const Matrix& Var::value() const { return graph->value(id); }

Var Graph::constant(Matrix m) {
  Node n;
  n.value = std::move(m);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::param(Parameter& p) {
  Node n;
  n.alias = &p.value;
  n.requires_grad = tracking_;
  n.param = tracking_ ? &p : nullptr;
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

Var Graph::param(const Parameter& p) {
  Node n;
  n.alias = &p.value;
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

const Matrix& Graph::value(int id) const {
  const Node& n = nodes_[static_cast<std::size_t>(id)];
  return n.alias ? *n.alias : n.value;
}

Matrix& Graph::grad(int id) {
  Node& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.size() == 0) {
    const Matrix& v = value(id);
    n.grad = Matrix::Zero(v.rows(), v.cols());
  }
  return n.grad;
}

Var Graph::record(Matrix value, std::vector<int> parents, BackwardFn fn) {
  Node n;
  n.value = std::move(value);
  if (tracking_) {
    for (int p : parents) {
      if (nodes_[static_cast<std::size_t>(p)].requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
  }
  if (n.requires_grad) n.backward = std::move(fn);
  nodes_.push_back(std::move(n));
  return {this, static_cast<int>(nodes_.size()) - 1};
}

void Graph::backward(Var root) {
  if (root.graph != this) throw std::invalid_argument("backward: variable from another graph");
  const Matrix& rv = value(root.id);
  if (rv.rows() != 1 || rv.cols() != 1) throw std::invalid_argument("backward: root must be 1x1");
  if (!requires_grad(root.id)) return;
  grad(root.id)(0, 0) += 1.0;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[static_cast<std::size_t>(i)];
    if (!n.requires_grad || n.grad.size() == 0) continue;
    if (n.param != nullptr) {
      if (n.param->grad.size() == 0) n.param->grad = Matrix::Zero(n.grad.rows(), n.grad.cols());
      n.param->grad += n.grad;
    } else if (n.backward) {
      n.backward(*this, n.grad);
    }
  }
}

namespace {

void check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = *a.graph;
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimensions differ");
  const int ia = a.id, ib = b.id;
  return g.record(a.value() * b.value(), {ia, ib}, [ia, ib](Graph& g, const Matrix& og) {
    if (g.requires_grad(ia)) g.grad(ia).noalias() += og * g.value(ib).transpose();
    if (g.requires_grad(ib)) g.grad(ib).noalias() += g.value(ia).transpose() * og;
  });
}

Var add(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "add");
  const int ia = a.id, ib = b.id;
  return a.graph->record(a.value() + b.value(), {ia, ib}, [ia, ib](Graph& g, const Matrix& og) {
    if (g.requires_grad(ia)) g.grad(ia) += og;
    if (g.requires_grad(ib)) g.grad(ib) += og;
  });
}

Var sub(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "sub");
  const int ia = a.id, ib = b.id;
  return a.graph->record(a.value() - b.value(), {ia, ib}, [ia, ib](Graph& g, const Matrix& og) {
    if (g.requires_grad(ia)) g.grad(ia) += og;
    if (g.requires_grad(ib)) g.grad(ib) -= og;
  });
}

Var mul(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "mul");
  const int ia = a.id, ib = b.id;
  return a.graph->record(a.value().cwiseProduct(b.value()), {ia, ib},
                         [ia, ib](Graph& g, const Matrix& og) {
                           if (g.requires_grad(ia)) g.grad(ia) += og.cwiseProduct(g.value(ib));
                           if (g.requires_grad(ib)) g.grad(ib) += og.cwiseProduct(g.value(ia));
                         });
}

Var scale(Var a, double s) {
  const int ia = a.id;
  return a.graph->record(a.value() * s, {ia}, [ia, s](Graph& g, const Matrix& og) {
    g.grad(ia) += og * s;
  });
}

Var add_row(Var a, Var row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw std::invalid_argument("add_row: shape mismatch");
  const int ia = a.id, ir = row.id;
  Matrix out = a.value();
  out.rowwise() += row.value().row(0);
  return a.graph->record(std::move(out), {ia, ir}, [ia, ir](Graph& g, const Matrix& og) {
    if (g.requires_grad(ia)) g.grad(ia) += og;
    if (g.requires_grad(ir)) g.grad(ir) += og.colwise().sum();
  });
}

Var broadcast_col(Var a, Eigen::Index k) {
  if (a.cols() != 1) throw std::invalid_argument("broadcast_col: expects a column");
  const int ia = a.id;
  Matrix out = a.value().replicate(1, k);
  return a.graph->record(std::move(out), {ia}, [ia](Graph& g, const Matrix& og) {
    g.grad(ia) += og.rowwise().sum();
  });
}

Var relu(Var a) {
  const int ia = a.id;
  return a.graph->record(a.value().cwiseMax(0.0), {ia}, [ia](Graph& g, const Matrix& og) {
    g.grad(ia) += (g.value(ia).array() > 0.0).select(og, 0.0);
  });
}

Var softmax_rows(Var a) {
  const Matrix& x = a.value();
  Matrix y = (x.colwise() - x.rowwise().maxCoeff()).array().exp().matrix();
  y.array().colwise() /= y.rowwise().sum().array();
  const int ia = a.id;
  auto yv = std::make_shared<Matrix>(y);
  return a.graph->record(std::move(y), {ia}, [ia, yv](Graph& g, const Matrix& og) {
    const Eigen::VectorXd dot = og.cwiseProduct(*yv).rowwise().sum();
    g.grad(ia) += (yv->array() * (og.colwise() - dot).array()).matrix();
  });
}

Var log_softmax_rows(Var a) {
  const Matrix& x = a.value();
  const Eigen::VectorXd mx = x.rowwise().maxCoeff();
  const Matrix shifted = x.colwise() - mx;
  const Eigen::VectorXd lse = shifted.array().exp().rowwise().sum().log();
  Matrix y = shifted.colwise() - lse;
  const int ia = a.id;
  auto sm = std::make_shared<Matrix>(y.array().exp().matrix());
  return a.graph->record(std::move(y), {ia}, [ia, sm](Graph& g, const Matrix& og) {
    const Eigen::VectorXd total = og.rowwise().sum();
    g.grad(ia) += og - (sm->array().colwise() * total.array()).matrix();
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: nothing to concatenate");
  Graph& g = *parts.front().graph;
  const Eigen::Index rows = parts.front().rows();
  Eigen::Index cols = 0;
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw std::invalid_argument("concat_cols: row mismatch");
    cols += p.cols();
    ids.push_back(p.id);
    widths.push_back(p.cols());
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return g.record(std::move(out), ids, [ids, widths](Graph& g, const Matrix& og) {
    Eigen::Index at = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (g.requires_grad(ids[k])) g.grad(ids[k]) += og.middleCols(at, widths[k]);
      at += widths[k];
    }
  });
}

Var row_sum(Var a) {
  const int ia = a.id;
  const Eigen::Index k = a.cols();
  return a.graph->record(a.value().rowwise().sum(), {ia}, [ia, k](Graph& g, const Matrix& og) {
    g.grad(ia) += og.replicate(1, k);
  });
}

Var sum_all(Var a) {
  const int ia = a.id;
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return a.graph->record(std::move(out), {ia}, [ia](Graph& g, const Matrix& og) {
    g.grad(ia).array() += og(0, 0);
  });
}

Var mean_all(Var a) {
  const int ia = a.id;
  const double n = static_cast<double>(a.value().size());
  if (n == 0) throw std::invalid_argument("mean_all: empty input");
  Matrix out(1, 1);
  out(0, 0) = a.value().sum() / n;
  return a.graph->record(std::move(out), {ia}, [ia, n](Graph& g, const Matrix& og) {
    g.grad(ia).array() += og(0, 0) / n;
  });
}

Var min_elem(Var a, Var b) {
  check_same_shape(a.value(), b.value(), "min_elem");
  const int ia = a.id, ib = b.id;
  return a.graph->record(a.value().cwiseMin(b.value()), {ia, ib}, [ia, ib](Graph& g, const Matrix& og) {
    const auto first = (g.value(ia).array() <= g.value(ib).array());
    if (g.requires_grad(ia)) g.grad(ia) += first.select(og, 0.0);
    if (g.requires_grad(ib)) g.grad(ib) += first.select(Matrix::Zero(og.rows(), og.cols()), og);
  });
}

Var pick_cols(Var a, const std::vector<int>& cols) {
  if (static_cast<Eigen::Index>(cols.size()) != a.rows())
    throw std::invalid_argument("pick_cols: one column index per row required");
  Matrix out(a.rows(), 1);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const int c = cols[static_cast<std::size_t>(i)];
    if (c < 0 || c >= a.cols()) throw std::invalid_argument("pick_cols: column out of range");
    out(i, 0) = a.value()(i, c);
  }
  const int ia = a.id;
  return a.graph->record(std::move(out), {ia}, [ia, cols](Graph& g, const Matrix& og) {
    Matrix& ga = g.grad(ia);
    for (Eigen::Index i = 0; i < og.rows(); ++i) ga(i, cols[static_cast<std::size_t>(i)]) += og(i, 0);
  });
}

Var square(Var a) { return mul(a, a); }

Var attention_pool(Var query, Var keys, Var values, const Segments& groups, Var empty, double scale) {
  const Matrix& q = query.value();
  const Matrix& k = keys.value();
  const Matrix& v = values.value();
  const Matrix& e = empty.value();
  const auto n = q.rows();
  if (static_cast<Eigen::Index>(groups.rows()) != n)
    throw std::invalid_argument("attention_pool: one segment per query row required");
  if (k.cols() != q.cols()) throw std::invalid_argument("attention_pool: key/query width differ");
  if (k.rows() != v.rows()) throw std::invalid_argument("attention_pool: keys/values count differ");
  if (e.rows() != 1 || e.cols() != v.cols()) throw std::invalid_argument("attention_pool: bad empty row");

  Matrix out(n, v.cols());
  auto weights = std::make_shared<std::vector<double>>(groups.items.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const int lo = groups.offsets[static_cast<std::size_t>(i)];
    const int hi = groups.offsets[static_cast<std::size_t>(i) + 1];
    if (lo == hi) {
      out.row(i) = e.row(0);
      continue;
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (int t = lo; t < hi; ++t) {
      const double s = scale * q.row(i).dot(k.row(groups.items[static_cast<std::size_t>(t)]));
      (*weights)[static_cast<std::size_t>(t)] = s;
      mx = std::max(mx, s);
    }
    double total = 0.0;
    for (int t = lo; t < hi; ++t) {
      double& w = (*weights)[static_cast<std::size_t>(t)];
      w = std::exp(w - mx);
      total += w;
    }
    out.row(i).setZero();
    for (int t = lo; t < hi; ++t) {
      double& w = (*weights)[static_cast<std::size_t>(t)];
      w /= total;
      out.row(i) += w * v.row(groups.items[static_cast<std::size_t>(t)]);
    }
  }

  const int iq = query.id, ik = keys.id, iv = values.id, ie = empty.id;
  return query.graph->record(
      std::move(out), {iq, ik, iv, ie},
      [iq, ik, iv, ie, groups, weights, scale](Graph& g, const Matrix& og) {
        const Matrix& q = g.value(iq);
        const Matrix& k = g.value(ik);
        const Matrix& v = g.value(iv);
        const bool gq = g.requires_grad(iq), gk = g.requires_grad(ik), gv = g.requires_grad(iv),
                   ge = g.requires_grad(ie);
        std::vector<double> dw;
        for (Eigen::Index i = 0; i < og.rows(); ++i) {
          const int lo = groups.offsets[static_cast<std::size_t>(i)];
          const int hi = groups.offsets[static_cast<std::size_t>(i) + 1];
          if (lo == hi) {
            if (ge) g.grad(ie).row(0) += og.row(i);
            continue;
          }
          dw.assign(static_cast<std::size_t>(hi - lo), 0.0);
          double centre = 0.0;
          for (int t = lo; t < hi; ++t) {
            const int j = groups.items[static_cast<std::size_t>(t)];
            const double w = (*weights)[static_cast<std::size_t>(t)];
            const double d = og.row(i).dot(v.row(j));
            dw[static_cast<std::size_t>(t - lo)] = d;
            centre += w * d;
            if (gv) g.grad(iv).row(j) += w * og.row(i);
          }
          if (!gq && !gk) continue;
          for (int t = lo; t < hi; ++t) {
            const int j = groups.items[static_cast<std::size_t>(t)];
            const double w = (*weights)[static_cast<std::size_t>(t)];
            const double ds = w * (dw[static_cast<std::size_t>(t - lo)] - centre) * scale;
            if (gq) g.grad(iq).row(i) += ds * k.row(j);
            if (gk) g.grad(ik).row(j) += ds * q.row(i);
          }
        }
      });
}

}  // namespace amod::nn
