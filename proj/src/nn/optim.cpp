#include "amod/nn/optim.hpp"

#include <cmath>
#include <string>

namespace amod::nn {

Adam::Adam(const ParameterSet& params, AdamConfig cfg) : cfg_(cfg) {
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Parameter& p : params) {
    m_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
    v_.push_back(Matrix::Zero(p.value.rows(), p.value.cols()));
  }
}

void Adam::step(ParameterSet& params) {
  if (params.size() != m_.size()) throw std::invalid_argument("Adam: parameter count changed");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    if (p.grad.size() == 0) continue;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -=
        cfg_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + cfg_.eps);
  }
}

void backward_and_step(Graph& g, Var loss, ParameterSet& params, Adam& opt) {
  if (!std::isfinite(loss.value()(0, 0))) throw NumericalError("non-finite loss");
  params.zero_grad();
  g.backward(loss);
  for (const Parameter& p : params) {
    if (p.grad.size() > 0 && !p.grad.allFinite()) {
      params.zero_grad();
      throw NumericalError("non-finite gradient in " + p.name);
    }
  }
  opt.step(params);
  params.zero_grad();
}

void soft_update(ParameterSet& target, const ParameterSet& source, double tau) {
  if (!target.same_shapes(source)) throw std::invalid_argument("soft_update: shape mismatch");
  auto s = source.begin();
  for (Parameter& t : target) {
    t.value = (1.0 - tau) * t.value + tau * s->value;
    ++s;
  }
}

}  // namespace amod::nn
