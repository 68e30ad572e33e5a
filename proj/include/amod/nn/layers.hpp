#pragma once

#include <cmath>
#include <random>
#include <string>

#include "amod/nn/autodiff.hpp"

namespace amod::nn {

/// Affine map x * W + b. Holds indices into the owning ParameterSet so a
/// copied network keeps working against its own parameters.
struct Linear {
  std::size_t weight = 0;
  std::size_t bias = 0;
  int in = 0;
  int out = 0;

  template <typename Params>
  Var operator()(Graph& g, Params& params, Var x) const {
    return add_row(matmul(x, g.param(params[weight])), g.param(params[bias]));
  }
};

/// Weights and biases drawn from U(-1/sqrt(in), 1/sqrt(in)).
Linear make_linear(ParameterSet& params, const std::string& name, int in, int out,
                   std::mt19937_64& rng);

/// Dot-product attention pooling of an item set, keyed by a query vector.
/// Empty sets map to a learned constant row.
struct AttentionPool {
  Linear query;
  Linear key;
  Linear value;
  std::size_t empty = 0;
  int width = 0;

  template <typename Params>
  Var operator()(Graph& g, Params& params, Var queries, Var items, const Segments& groups) const {
    const Var q = query(g, params, queries);
    const Var k = key(g, params, items);
    const Var v = value(g, params, items);
    return attention_pool(q, k, v, groups, g.param(params[empty]), 1.0 / std::sqrt(double(width)));
  }
};

AttentionPool make_attention(ParameterSet& params, const std::string& name, int query_in,
                             int item_in, int width, std::mt19937_64& rng);

}  // namespace amod::nn
