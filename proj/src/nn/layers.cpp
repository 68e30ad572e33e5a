#include "amod/nn/layers.hpp"

#include <cmath>

namespace amod::nn {

Linear make_linear(ParameterSet& params, const std::string& name, int in, int out,
                   std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix w(in, out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
  Matrix b(1, out);
  for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = dist(rng);
  Linear l;
  l.in = in;
  l.out = out;
  l.weight = params.add(name + ".weight", std::move(w));
  l.bias = params.add(name + ".bias", std::move(b));
  return l;
}

AttentionPool make_attention(ParameterSet& params, const std::string& name, int query_in,
                             int item_in, int width, std::mt19937_64& rng) {
  AttentionPool a;
  a.width = width;
  a.query = make_linear(params, name + ".query", query_in, width, rng);
  a.key = make_linear(params, name + ".key", item_in, width, rng);
  a.value = make_linear(params, name + ".value", item_in, width, rng);
  a.empty = params.add(name + ".empty", Matrix::Zero(1, width));
  return a;
}

}  // namespace amod::nn
