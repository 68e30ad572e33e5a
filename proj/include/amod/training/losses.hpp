#pragma once

#include <array>
#include <string>

#include "amod/dispatch.hpp"
#include "amod/nn/autodiff.hpp"

namespace amod {

using ActionValues = std::array<double, kActionsPerAgent>;

enum class AdvantageVariant { coma, equ, tgt, adj };

/// coma: q(a) - sum_a' pi(a') q(a')
/// equ:  q(a) - mean_a' q(a')
/// tgt:  q(a) - sum_a' pi_target(a') q(a')
/// adj:  (1 - beta) * equ + beta * tgt
ActionValues advantage(AdvantageVariant variant, const ActionProbs& probs,
                       const ActionProbs& target_probs, const ActionValues& q, double beta);

enum class ActorLossKind { local, naive_coma, adj, scheduled };

struct ActorLossInputs {
  ActionProbs probs{0.5, 0.5};
  ActionProbs target_probs{0.5, 0.5};
  ActionValues q_local{0.0, 0.0};
  ActionValues q_global{0.0, 0.0};
  double alpha = 0.7;
  double beta = 0.0;
  double kappa = 0.0;
};

/// sum_a pi(a) * alpha * log pi(a)
double entropy_term(const ActionProbs& probs, double alpha);

/// Per-agent actor objective.
///   local:      sum_a pi(a) (alpha log pi(a) - q_local(a))
///   naive_coma: sum_a pi(a) (alpha log pi(a) - A_coma(a)), A on q_global
///   adj:        sum_a pi(a) (alpha log pi(a) - A_adj(a)),  A on q_global
///   scheduled:  (1 - kappa) local + kappa adj
double actor_loss(ActorLossKind kind, const ActorLossInputs& in);

/// Differentiable version over a batch, averaged over agents. `logits` is
/// N x 2; the remaining matrices are N x 2 constants. For naive_coma the
/// baseline stays inside the graph (it is not treated as a constant), which
/// is what makes that loss collapse to the entropy term.
nn::Var actor_loss(ActorLossKind kind, nn::Var logits, const nn::Matrix& target_probs,
                   const nn::Matrix& q_local, const nn::Matrix& q_global, double alpha,
                   double beta, double kappa);

/// Discrete soft state value: sum_a pi(a) (min(q1, q2)(a) - alpha log pi(a)).
double soft_value(const ActionProbs& probs, const ActionValues& q1, const ActionValues& q2,
                  double alpha);

/// r + discount * (1 - done) * next_value. `discount` is already raised to
/// the number of steps until the next decision.
double critic_target(double reward, double discount, bool done, double next_value);

std::string to_string(AdvantageVariant v);
std::string to_string(ActorLossKind k);

}  // namespace amod
