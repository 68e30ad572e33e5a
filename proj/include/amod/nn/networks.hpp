#pragma once

#include <cstdint>
#include <vector>

#include "amod/dispatch.hpp"
#include "amod/features.hpp"
#include "amod/nn/autodiff.hpp"
#include "amod/nn/layers.hpp"

namespace amod::nn {

struct NetworkShape {
  int embed = 64;
  int hidden = 64;
  int attention = 32;

  friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// Own-pair embedding plus attention summaries of the other open requests
/// and of the fleet. Output width: embed + 2 * attention.
class Encoder {
 public:
  Encoder() = default;
  Encoder(ParameterSet& params, const std::string& name, const FeatureDims& dims,
          const NetworkShape& shape, std::mt19937_64& rng);

  int output_width() const { return embed_.out + requests_.width + vehicles_.width; }

  /// Returns {encoding, own embedding}; the embedding queries further pools.
  template <typename Params>
  std::pair<Var, Var> operator()(Graph& g, Params& params, const ObservationBatch& batch) const {
    const Var own = g.constant(batch.own);
    const Var h = relu(embed_(g, params, own));
    const Var req = requests_(g, params, h, g.constant(batch.requests), batch.request_groups);
    const Var veh = vehicles_(g, params, h, g.constant(batch.vehicles), batch.vehicle_groups);
    return {concat_cols({h, req, veh}), h};
  }

 private:
  Linear embed_;
  AttentionPool requests_;
  AttentionPool vehicles_;
};

/// Policy network: per agent a softmax over (accept, reject).
class ActorNet {
 public:
  ActorNet() = default;
  ActorNet(const FeatureDims& dims, const NetworkShape& shape, std::uint64_t seed);

  /// N x 2 logits. The non-const overload records gradients into params().
  Var logits(Graph& g, const ObservationBatch& batch);
  Var logits(Graph& g, const ObservationBatch& batch) const;

  std::vector<ActionProbs> probabilities(const ObservationBatch& batch) const;

  /// Fixed-length encoder output for every agent of the batch.
  Matrix encode(const ObservationBatch& batch) const;

  /// Zeroes the output layer so every agent starts at (0.5, 0.5).
  void zero_head();

  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const FeatureDims& dims() const { return dims_; }
  const NetworkShape& shape() const { return shape_; }

 private:
  template <typename Self>
  static Var forward(Self& self, Graph& g, const ObservationBatch& batch);

  FeatureDims dims_;
  NetworkShape shape_;
  ParameterSet params_;
  Encoder encoder_;
  Linear hidden1_;
  Linear hidden2_;
  Linear head_;
};

/// Q-network: per agent a value for each of its two actions, conditioned on
/// the post-matching actions of the other agents in the same state.
class CriticNet {
 public:
  CriticNet() = default;
  CriticNet(const FeatureDims& dims, const NetworkShape& shape, std::uint64_t seed);

  /// N x 2 action values.
  Var q_values(Graph& g, const ObservationBatch& batch);
  Var q_values(Graph& g, const ObservationBatch& batch) const;

  Matrix evaluate(const ObservationBatch& batch) const;

  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const FeatureDims& dims() const { return dims_; }
  const NetworkShape& shape() const { return shape_; }

 private:
  template <typename Self>
  static Var forward(Self& self, Graph& g, const ObservationBatch& batch);

  FeatureDims dims_;
  NetworkShape shape_;
  ParameterSet params_;
  Encoder encoder_;
  AttentionPool others_;
  Linear hidden1_;
  Linear hidden2_;
  Linear head_;
};

/// Matrix of probability rows -> vector of pairs.
std::vector<ActionProbs> to_action_probs(const Matrix& probs);

}  // namespace amod::nn
