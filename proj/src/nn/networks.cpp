#include "amod/nn/networks.hpp"

namespace amod::nn {

Encoder::Encoder(ParameterSet& params, const std::string& name, const FeatureDims& dims,
                 const NetworkShape& shape, std::mt19937_64& rng) {
  embed_ = make_linear(params, name + ".embed", dims.own, shape.embed, rng);
  requests_ = make_attention(params, name + ".requests", shape.embed, dims.request, shape.attention, rng);
  vehicles_ = make_attention(params, name + ".vehicles", shape.embed, dims.vehicle, shape.attention, rng);
}

ActorNet::ActorNet(const FeatureDims& dims, const NetworkShape& shape, std::uint64_t seed)
    : dims_(dims), shape_(shape) {
  std::mt19937_64 rng(seed);
  encoder_ = Encoder(params_, "actor.encoder", dims, shape, rng);
  hidden1_ = make_linear(params_, "actor.hidden1", encoder_.output_width(), shape.hidden, rng);
  hidden2_ = make_linear(params_, "actor.hidden2", shape.hidden, shape.hidden, rng);
  head_ = make_linear(params_, "actor.head", shape.hidden, kActionsPerAgent, rng);
}

template <typename Self>
Var ActorNet::forward(Self& self, Graph& g, const ObservationBatch& batch) {
  auto& params = self.params_;
  const auto [enc, embed] = self.encoder_(g, params, batch);
  const Var h1 = relu(self.hidden1_(g, params, enc));
  const Var h2 = relu(self.hidden2_(g, params, h1));
  return self.head_(g, params, h2);
}

Var ActorNet::logits(Graph& g, const ObservationBatch& batch) { return forward(*this, g, batch); }
Var ActorNet::logits(Graph& g, const ObservationBatch& batch) const { return forward(*this, g, batch); }

std::vector<ActionProbs> ActorNet::probabilities(const ObservationBatch& batch) const {
  if (batch.agent_count() == 0) return {};
  Graph g(false);
  return to_action_probs(softmax_rows(logits(g, batch)).value());
}

Matrix ActorNet::encode(const ObservationBatch& batch) const {
  Graph g(false);
  return encoder_(g, params_, batch).first.value();
}

void ActorNet::zero_head() {
  params_[head_.weight].value.setZero();
  params_[head_.bias].value.setZero();
}

CriticNet::CriticNet(const FeatureDims& dims, const NetworkShape& shape, std::uint64_t seed)
    : dims_(dims), shape_(shape) {
  std::mt19937_64 rng(seed);
  encoder_ = Encoder(params_, "critic.encoder", dims, shape, rng);
  others_ = make_attention(params_, "critic.others", shape.embed, dims.own + 1, shape.attention, rng);
  hidden1_ = make_linear(params_, "critic.hidden1", encoder_.output_width() + shape.attention,
                         shape.hidden, rng);
  hidden2_ = make_linear(params_, "critic.hidden2", shape.hidden, shape.hidden, rng);
  head_ = make_linear(params_, "critic.head", shape.hidden, kActionsPerAgent, rng);
}

template <typename Self>
Var CriticNet::forward(Self& self, Graph& g, const ObservationBatch& batch) {
  auto& params = self.params_;
  const auto [enc, embed] = self.encoder_(g, params, batch);
  Matrix annotated(batch.own.rows(), batch.own.cols() + 1);
  annotated << batch.own, batch.post_accept;
  const Var others = self.others_(g, params, embed, g.constant(std::move(annotated)), batch.other_agents);
  const Var h1 = relu(self.hidden1_(g, params, concat_cols({enc, others})));
  const Var h2 = relu(self.hidden2_(g, params, h1));
  return self.head_(g, params, h2);
}

Var CriticNet::q_values(Graph& g, const ObservationBatch& batch) { return forward(*this, g, batch); }
Var CriticNet::q_values(Graph& g, const ObservationBatch& batch) const {
  return forward(*this, g, batch);
}

Matrix CriticNet::evaluate(const ObservationBatch& batch) const {
  if (batch.agent_count() == 0) return Matrix(0, kActionsPerAgent);
  Graph g(false);
  return q_values(g, batch).value();
}

std::vector<ActionProbs> to_action_probs(const Matrix& probs) {
  std::vector<ActionProbs> out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) out[static_cast<std::size_t>(i)] = {probs(i, 0), probs(i, 1)};
  return out;
}

}  // namespace amod::nn
