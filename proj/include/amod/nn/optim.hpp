#pragma once

#include <cstdint>
#include <vector>

#include "amod/nn/autodiff.hpp"

namespace amod::nn {

struct AdamConfig {
  double lr = 3e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam over a fixed ParameterSet. Moment buffers follow the set's order.
class Adam {
 public:
  Adam() = default;
  Adam(const ParameterSet& params, AdamConfig cfg);

  /// One update from the gradients currently held by `params`.
  void step(ParameterSet& params);

  const AdamConfig& config() const { return cfg_; }
  std::int64_t steps() const { return t_; }

  // Exposed for checkpointing.
  std::vector<Matrix>& first_moments() { return m_; }
  std::vector<Matrix>& second_moments() { return v_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }
  void set_steps(std::int64_t t) { t_ = t; }

 private:
  AdamConfig cfg_;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
  std::int64_t t_ = 0;
};

/// Zeroes gradients, back-propagates `loss`, and applies one optimizer
/// step. Non-finite loss or gradients raise NumericalError and leave the
/// parameters untouched.
void backward_and_step(Graph& g, Var loss, ParameterSet& params, Adam& opt);

/// target <- (1 - tau) * target + tau * source.
void soft_update(ParameterSet& target, const ParameterSet& source, double tau);

}  // namespace amod::nn
