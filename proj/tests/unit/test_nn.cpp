#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

#include "amod/features.hpp"
#include "amod/nn/autodiff.hpp"
#include "amod/nn/checkpoint.hpp"
#include "amod/nn/layers.hpp"
#include "amod/nn/networks.hpp"
#include "amod/nn/optim.hpp"

namespace amod::nn {
namespace {

using Fn = std::function<Var(Graph&, std::vector<Var>&)>;

Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

// Compares reverse-mode gradients with central differences.
void check_gradients(const std::vector<Matrix>& inputs, const Fn& f, double tol = 1e-6) {
  ParameterSet ps;
  for (std::size_t i = 0; i < inputs.size(); ++i) ps.add("x" + std::to_string(i), inputs[i]);
  auto eval = [&]() {
    Graph g(false);
    std::vector<Var> vs;
    for (auto& p : ps) vs.push_back(g.param(p));
    return f(g, vs).value()(0, 0);
  };
  ps.zero_grad();
  {
    Graph g(true);
    std::vector<Var> vs;
    for (auto& p : ps) vs.push_back(g.param(p));
    g.backward(f(g, vs));
  }
  const double h = 1e-5;
  for (auto& p : ps) {
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      const double keep = p.value.data()[k];
      p.value.data()[k] = keep + h;
      const double up = eval();
      p.value.data()[k] = keep - h;
      const double down = eval();
      p.value.data()[k] = keep;
      const double numeric = (up - down) / (2 * h);
      EXPECT_NEAR(p.grad.data()[k], numeric, tol * std::max(1.0, std::abs(numeric)))
          << p.name << "[" << k << "]";
    }
  }
}

TEST(Autodiff, ElementwiseAndMatrixOps) {
  std::mt19937_64 rng(1);
  const Matrix a = random_matrix(3, 4, rng), b = random_matrix(3, 4, rng), w = random_matrix(4, 2, rng);
  const Matrix row = random_matrix(1, 2, rng);
  check_gradients({a, b, w, row}, [](Graph&, std::vector<Var>& x) {
    const Var s = add(mul(x[0], x[1]), scale(sub(x[0], x[1]), 0.3));
    const Var m = add_row(matmul(s, x[2]), x[3]);
    return sum_all(square(m));
  });
}

TEST(Autodiff, SoftmaxFamily) {
  std::mt19937_64 rng(2);
  const Matrix a = random_matrix(4, 3, rng), t = random_matrix(4, 3, rng);
  check_gradients({a, t}, [](Graph&, std::vector<Var>& x) {
    return add(sum_all(mul(softmax_rows(x[0]), x[1])), mean_all(mul(log_softmax_rows(x[0]), x[1])));
  });
  Graph g(false);
  const Var s = softmax_rows(g.constant(a));
  for (Eigen::Index i = 0; i < 4; ++i) EXPECT_NEAR(s.value().row(i).sum(), 1.0, 1e-12);
  const Var ls = log_softmax_rows(g.constant(Matrix::Constant(1, 2, 1000.0)));
  EXPECT_NEAR(ls.value()(0, 0), std::log(0.5), 1e-12);
}

TEST(Autodiff, SelectionAndShapeOps) {
  std::mt19937_64 rng(3);
  Matrix a = random_matrix(3, 2, rng), b = random_matrix(3, 2, rng), c = random_matrix(3, 1, rng);
  // Keep operands apart so min and relu stay differentiable at the probe.
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (std::abs(a.data()[i] - b.data()[i]) < 0.1) b.data()[i] += 0.5;
    if (std::abs(a.data()[i]) < 0.1) a.data()[i] += 0.3;
  }
  check_gradients({a, b, c}, [](Graph&, std::vector<Var>& x) {
    const Var m = min_elem(x[0], x[1]);
    const Var p = pick_cols(concat_cols({relu(x[0]), m}), {0, 3, 1});
    const Var r = row_sum(mul(broadcast_col(x[2], 2), x[1]));
    return sum_all(mul(p, r));
  });
}

TEST(Autodiff, AttentionPool) {
  std::mt19937_64 rng(4);
  const Matrix q = random_matrix(3, 4, rng), k = random_matrix(5, 4, rng), v = random_matrix(5, 2, rng);
  const Matrix empty = random_matrix(1, 2, rng), w = random_matrix(3, 2, rng);
  Segments groups;
  groups.push_row({0, 2, 4});
  groups.push_row({});
  groups.push_row({1, 3, 4, 0});
  check_gradients({q, k, v, empty}, [&](Graph& g, std::vector<Var>& x) {
    return sum_all(mul(attention_pool(x[0], x[1], x[2], groups, x[3], 0.5), g.constant(w)));
  });
  // Empty rows return the learned constant; a one-item set returns that item.
  Segments single;
  single.push_row({});
  single.push_row({3});
  single.push_row({0});
  Graph g(false);
  const Var out = attention_pool(g.constant(q), g.constant(k), g.constant(v), single, g.constant(empty), 0.5);
  EXPECT_TRUE(out.value().row(0).isApprox(empty));
  EXPECT_TRUE(out.value().row(1).isApprox(v.row(3)));
}

TEST(Autodiff, BackwardNeedsScalarRoot) {
  Graph g(true);
  ParameterSet ps;
  ps.add("x", Matrix::Ones(2, 2));
  EXPECT_ANY_THROW(g.backward(g.param(ps[0])));
}

FeatureDims small_dims() { return feature_dims(5); }

ObservationBatch random_batch(std::mt19937_64& rng, int agents, int requests, int vehicles) {
  const FeatureDims d = small_dims();
  ObservationBatch b;
  b.own = random_matrix(agents, d.own, rng);
  b.requests = random_matrix(requests, d.request, rng);
  b.vehicles = random_matrix(vehicles, d.vehicle, rng);
  b.post_accept = Eigen::VectorXd::Zero(agents);
  for (int a = 0; a < agents; ++a) {
    std::vector<int> rq, vh, oth;
    for (int r = 0; r < requests; ++r)
      if (r != a % requests) rq.push_back(r);
    for (int v = 0; v < vehicles; ++v) vh.push_back(v);
    for (int o = 0; o < agents; ++o)
      if (o != a) oth.push_back(o);
    b.request_groups.push_row(rq);
    b.vehicle_groups.push_row(vh);
    b.other_agents.push_row(oth);
    b.post_accept(a) = a % 2;
  }
  b.state_offsets.push_back(agents);
  return b;
}

TEST(Networks, ShapesAndProbabilities) {
  std::mt19937_64 rng(5);
  const ObservationBatch b = random_batch(rng, 3, 2, 4);
  ActorNet actor(small_dims(), NetworkShape{}, 1);
  const auto probs = actor.probabilities(b);
  ASSERT_EQ(probs.size(), 3u);
  for (const auto& p : probs) EXPECT_NEAR(p[0] + p[1], 1.0, 1e-12);
  actor.zero_head();
  for (const auto& p : actor.probabilities(b)) EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_EQ(actor.encode(b).cols(), 64 + 2 * 32);
  CriticNet critic(small_dims(), NetworkShape{}, 2);
  const Matrix q = critic.evaluate(b);
  EXPECT_EQ(q.rows(), 3);
  EXPECT_EQ(q.cols(), 2);
  EXPECT_TRUE(q.allFinite());
}

TEST(Networks, InvariantToOrderOfPooledItems) {
  std::mt19937_64 rng(6);
  ObservationBatch b = random_batch(rng, 2, 3, 4);
  CriticNet critic(small_dims(), NetworkShape{}, 3);
  const Matrix before = critic.evaluate(b);
  // Reverse the vehicle rows and remap the groups accordingly.
  b.vehicles = b.vehicles.colwise().reverse().eval();
  for (int& i : b.vehicle_groups.items) i = 3 - i;
  EXPECT_TRUE(critic.evaluate(b).isApprox(before, 1e-12));
}

TEST(Networks, SameSeedSameWeights) {
  ActorNet a(small_dims(), NetworkShape{}, 9), b(small_dims(), NetworkShape{}, 9), c(small_dims(), NetworkShape{}, 10);
  ASSERT_TRUE(a.params().same_shapes(b.params()));
  EXPECT_TRUE(a.params()[0].value == b.params()[0].value);
  EXPECT_FALSE(a.params()[0].value == c.params()[0].value);
}

TEST(Optim, AdamFirstStepMovesByLearningRate) {
  ParameterSet ps;
  ps.add("w", Matrix::Constant(1, 2, 1.0));
  Adam opt(ps, AdamConfig{0.1});
  ps[0].grad = Matrix(1, 2);
  ps[0].grad << 2.0, -0.5;
  opt.step(ps);
  // Bias-corrected first step is lr * g / (|g| + eps).
  EXPECT_NEAR(ps[0].value(0, 0), 0.9, 1e-6);
  EXPECT_NEAR(ps[0].value(0, 1), 1.1, 1e-6);
  EXPECT_EQ(opt.steps(), 1);
  // Second step with a recomputed reference.
  ps[0].grad << 1.0, 1.0;
  opt.step(ps);
  const double m = 0.9 * (0.1 * 2.0) + 0.1 * 1.0;
  const double v = 0.999 * (0.001 * 4.0) + 0.001 * 1.0;
  const double mh = m / (1 - 0.81), vh = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(ps[0].value(0, 0), 0.9 - 0.1 * mh / (std::sqrt(vh) + 1e-8), 1e-9);
}

TEST(Optim, MinimisesQuadratic) {
  ParameterSet ps;
  ps.add("w", Matrix::Constant(1, 3, 5.0));
  Adam opt(ps, AdamConfig{0.05});
  const Matrix target = (Matrix(1, 3) << 1.0, -2.0, 0.5).finished();
  for (int i = 0; i < 2000; ++i) {
    Graph g(true);
    const Var loss = sum_all(square(sub(g.param(ps[0]), g.constant(target))));
    backward_and_step(g, loss, ps, opt);
  }
  EXPECT_TRUE(ps[0].value.isApprox(target, 1e-3));
}

TEST(Optim, NonFiniteLossLeavesParameters) {
  ParameterSet ps;
  ps.add("w", Matrix::Constant(1, 1, 2.0));
  Adam opt(ps, AdamConfig{});
  Graph g(true);
  const Var loss = scale(g.param(ps[0]), std::numeric_limits<double>::infinity());
  EXPECT_THROW(backward_and_step(g, loss, ps, opt), NumericalError);
  EXPECT_EQ(ps[0].value(0, 0), 2.0);
  EXPECT_EQ(opt.steps(), 0);
}

TEST(Optim, SoftUpdate) {
  ParameterSet a, b;
  a.add("w", Matrix::Constant(2, 2, 0.0));
  b.add("w", Matrix::Constant(2, 2, 1.0));
  soft_update(a, b, 0.25);
  EXPECT_TRUE(a[0].value.isApprox(Matrix::Constant(2, 2, 0.25)));
}

TEST(Checkpoint, RoundTripIsBitExact) {
  std::mt19937_64 rng(7);
  ActorNet actor(small_dims(), NetworkShape{}, 4);
  Adam opt(actor.params(), AdamConfig{});
  for (auto& p : actor.params()) p.grad = random_matrix(p.value.rows(), p.value.cols(), rng);
  opt.step(actor.params());
  Checkpoint ck;
  store_params(ck, "actor", actor.params());
  store_optimizer(ck, "actor_opt", opt);
  store_rng(ck, "rng", rng);
  ck.counters["steps"] = 12345;
  ck.scalars["best"] = 0.1 + 0.2;
  ck.blobs["note"] = std::string("a\0b", 3);
  const auto path = std::filesystem::temp_directory_path() / "amod_test.ckpt";
  save_checkpoint(path, ck);
  const Checkpoint back = load_checkpoint(path);
  std::filesystem::remove(path);

  ActorNet other(small_dims(), NetworkShape{}, 99);
  Adam other_opt(other.params(), AdamConfig{});
  restore_params(back, "actor", other.params());
  restore_optimizer(back, "actor_opt", other_opt);
  std::mt19937_64 rng2;
  restore_rng(back, "rng", rng2);
  for (std::size_t i = 0; i < actor.params().size(); ++i)
    EXPECT_TRUE(actor.params()[i].value == other.params()[i].value);
  EXPECT_EQ(other_opt.steps(), 1);
  EXPECT_TRUE(other_opt.second_moments()[0] == opt.second_moments()[0]);
  EXPECT_EQ(rng2(), rng());
  EXPECT_EQ(back.counters.at("steps"), 12345);
  EXPECT_EQ(back.scalars.at("best"), 0.1 + 0.2);
  EXPECT_EQ(back.blobs.at("note"), std::string("a\0b", 3));

  ActorNet wider(small_dims(), NetworkShape{32, 64, 32}, 1);
  EXPECT_THROW(restore_params(back, "actor", wider.params()), CheckpointError);
}

TEST(Checkpoint, RejectsGarbage) {
  const auto path = std::filesystem::temp_directory_path() / "amod_garbage.ckpt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a checkpoint";
  }
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
  std::filesystem::remove(path);
  EXPECT_ANY_THROW(load_checkpoint(path));
}

}  // namespace
}  // namespace amod::nn
