#include "amod/training/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace amod {
namespace {

double expectation(const ActionProbs& p, const ActionValues& q) { return p[0] * q[0] + p[1] * q[1]; }

// 0 * log 0 contributes nothing.
double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

double policy_loss(const ActionProbs& p, const ActionValues& signal, double alpha) {
  double loss = 0.0;
  for (int a = 0; a < kActionsPerAgent; ++a) loss += alpha * xlogx(p[a]) - p[a] * signal[a];
  return loss;
}

}  // namespace

ActionValues advantage(AdvantageVariant variant, const ActionProbs& probs,
                       const ActionProbs& target_probs, const ActionValues& q, double beta) {
  double baseline = 0.0;
  switch (variant) {
    case AdvantageVariant::coma:
      baseline = expectation(probs, q);
      break;
    case AdvantageVariant::equ:
      baseline = 0.5 * (q[0] + q[1]);
      break;
    case AdvantageVariant::tgt:
      baseline = expectation(target_probs, q);
      break;
    case AdvantageVariant::adj: {
      const ActionValues e = advantage(AdvantageVariant::equ, probs, target_probs, q, beta);
      const ActionValues t = advantage(AdvantageVariant::tgt, probs, target_probs, q, beta);
      return {(1.0 - beta) * e[0] + beta * t[0], (1.0 - beta) * e[1] + beta * t[1]};
    }
  }
  return {q[0] - baseline, q[1] - baseline};
}

double entropy_term(const ActionProbs& probs, double alpha) {
  return alpha * (xlogx(probs[0]) + xlogx(probs[1]));
}

double actor_loss(ActorLossKind kind, const ActorLossInputs& in) {
  switch (kind) {
    case ActorLossKind::local:
      return policy_loss(in.probs, in.q_local, in.alpha);
    case ActorLossKind::naive_coma:
      return policy_loss(in.probs, advantage(AdvantageVariant::coma, in.probs, in.target_probs, in.q_global, 0.0),
                         in.alpha);
    case ActorLossKind::adj:
      return policy_loss(in.probs,
                         advantage(AdvantageVariant::adj, in.probs, in.target_probs, in.q_global, in.beta),
                         in.alpha);
    case ActorLossKind::scheduled:
      return (1.0 - in.kappa) * actor_loss(ActorLossKind::local, in) +
             in.kappa * actor_loss(ActorLossKind::adj, in);
  }
  throw std::invalid_argument("unknown actor loss");
}

nn::Var actor_loss(ActorLossKind kind, nn::Var logits, const nn::Matrix& target_probs,
                   const nn::Matrix& q_local, const nn::Matrix& q_global, double alpha,
                   double beta, double kappa) {
  using namespace nn;
  Graph& g = *logits.graph;
  const Var pi = softmax_rows(logits);
  const Var entropy = scale(log_softmax_rows(logits), alpha);
  auto with_signal = [&](Var signal) { return mean_all(row_sum(mul(pi, sub(entropy, signal)))); };

  auto adj_advantage = [&]() {
    const Eigen::Index n = q_global.rows();
    Matrix a(n, kActionsPerAgent);
    for (Eigen::Index i = 0; i < n; ++i) {
      const ActionValues q{q_global(i, 0), q_global(i, 1)};
      const ActionProbs t{target_probs(i, 0), target_probs(i, 1)};
      const ActionValues adv = advantage(AdvantageVariant::adj, {0.5, 0.5}, t, q, beta);
      a(i, 0) = adv[0];
      a(i, 1) = adv[1];
    }
    return a;
  };

  switch (kind) {
    case ActorLossKind::local:
      return with_signal(g.constant(q_local));
    case ActorLossKind::naive_coma: {
      const Var q = g.constant(q_global);
      const Var baseline = broadcast_col(row_sum(mul(pi, q)), kActionsPerAgent);
      return with_signal(sub(q, baseline));
    }
    case ActorLossKind::adj:
      return with_signal(g.constant(adj_advantage()));
    case ActorLossKind::scheduled: {
      const Var local = with_signal(g.constant(q_local));
      const Var adj = with_signal(g.constant(adj_advantage()));
      return add(scale(local, 1.0 - kappa), scale(adj, kappa));
    }
  }
  throw std::invalid_argument("unknown actor loss");
}

double soft_value(const ActionProbs& probs, const ActionValues& q1, const ActionValues& q2,
                  double alpha) {
  double v = 0.0;
  for (int a = 0; a < kActionsPerAgent; ++a)
    v += probs[a] * std::min(q1[a], q2[a]) - alpha * xlogx(probs[a]);
  return v;
}

double critic_target(double reward, double discount, bool done, double next_value) {
  const double y = done ? reward : reward + discount * next_value;
  if (!std::isfinite(y)) throw nn::NumericalError("non-finite critic target");
  return y;
}

std::string to_string(AdvantageVariant v) {
  switch (v) {
    case AdvantageVariant::coma: return "coma";
    case AdvantageVariant::equ: return "equ";
    case AdvantageVariant::tgt: return "tgt";
    case AdvantageVariant::adj: return "adj";
  }
  return "?";
}

std::string to_string(ActorLossKind k) {
  switch (k) {
    case ActorLossKind::local: return "local";
    case ActorLossKind::naive_coma: return "naive_coma";
    case ActorLossKind::adj: return "adj";
    case ActorLossKind::scheduled: return "scheduled";
  }
  return "?";
}

}  // namespace amod
