#include <gtest/gtest.h>

#include <cmath>

#include "amod/data.hpp"
#include "amod/training/losses.hpp"
#include "amod/training/replay_buffer.hpp"
#include "amod/training/schedule.hpp"
#include "amod/training/trainer.hpp"
#include "support/fixtures.hpp"

namespace amod {
namespace {

TEST(Advantage, Variants) {
  const ActionProbs pi{0.8, 0.2}, tgt{0.4, 0.6};
  const ActionValues q{1.0, 3.0};
  const auto coma = advantage(AdvantageVariant::coma, pi, tgt, q, 0.0);
  EXPECT_NEAR(coma[0], 1.0 - 1.4, 1e-12);
  EXPECT_NEAR(coma[1], 3.0 - 1.4, 1e-12);
  const auto equ = advantage(AdvantageVariant::equ, pi, tgt, q, 0.0);
  EXPECT_NEAR(equ[0], -1.0, 1e-12);
  EXPECT_NEAR(equ[1], 1.0, 1e-12);
  const auto t = advantage(AdvantageVariant::tgt, pi, tgt, q, 0.0);
  EXPECT_NEAR(t[0], 1.0 - 2.2, 1e-12);
  const auto adj = advantage(AdvantageVariant::adj, pi, tgt, q, 0.25);
  EXPECT_NEAR(adj[0], 0.75 * -1.0 + 0.25 * -1.2, 1e-12);
  EXPECT_NEAR(adj[1], 0.75 * 1.0 + 0.25 * 0.8, 1e-12);
  EXPECT_EQ(advantage(AdvantageVariant::adj, pi, tgt, q, 0.0), equ);
  EXPECT_EQ(advantage(AdvantageVariant::adj, pi, tgt, q, 1.0), t);
}

TEST(ActorLoss, ScalarFormulas) {
  ActorLossInputs in;
  in.probs = {0.7, 0.3};
  in.target_probs = {0.5, 0.5};
  in.q_local = {2.0, -1.0};
  in.q_global = {0.5, 1.5};
  in.alpha = 0.7;
  in.beta = 1.0;
  in.kappa = 0.25;
  const double ent = 0.7 * (0.7 * std::log(0.7) + 0.3 * std::log(0.3));
  EXPECT_NEAR(entropy_term(in.probs, 0.7), ent, 1e-12);
  const double local = ent - (0.7 * 2.0 + 0.3 * -1.0);
  EXPECT_NEAR(actor_loss(ActorLossKind::local, in), local, 1e-12);
  // COMA advantages average to zero under pi, leaving only the entropy term.
  EXPECT_NEAR(actor_loss(ActorLossKind::naive_coma, in), ent, 1e-12);
  const double adj = ent - (0.7 * (0.5 - 1.0) + 0.3 * (1.5 - 1.0));
  EXPECT_NEAR(actor_loss(ActorLossKind::adj, in), adj, 1e-12);
  EXPECT_NEAR(actor_loss(ActorLossKind::scheduled, in), 0.75 * local + 0.25 * adj, 1e-12);
}

TEST(ActorLoss, BatchMatchesScalarAndNaiveComaCollapses) {
  const nn::Matrix logits = (nn::Matrix(2, 2) << 0.3, -0.4, 1.2, 0.1).finished();
  const nn::Matrix tp = (nn::Matrix(2, 2) << 0.5, 0.5, 0.9, 0.1).finished();
  const nn::Matrix ql = (nn::Matrix(2, 2) << 1.0, 0.0, -0.5, 0.5).finished();
  const nn::Matrix qg = (nn::Matrix(2, 2) << 0.2, 0.9, 1.0, -1.0).finished();
  for (auto kind : {ActorLossKind::local, ActorLossKind::naive_coma, ActorLossKind::adj, ActorLossKind::scheduled}) {
    nn::Graph g(false);
    const nn::Matrix p = nn::softmax_rows(g.constant(logits)).value();
    double expected = 0.0;
    for (int i = 0; i < 2; ++i) {
      ActorLossInputs in{{p(i, 0), p(i, 1)}, {tp(i, 0), tp(i, 1)}, {ql(i, 0), ql(i, 1)}, {qg(i, 0), qg(i, 1)},
                         0.7, 0.4, 0.6};
      expected += actor_loss(kind, in) / 2.0;
    }
    const nn::Var loss = actor_loss(kind, g.constant(logits), tp, ql, qg, 0.7, 0.4, 0.6);
    EXPECT_NEAR(loss.value()(0, 0), expected, 1e-12) << to_string(kind);
  }
  // The naive COMA gradient equals the entropy gradient: the Q signal cancels.
  auto grad_of = [&](bool coma) {
    nn::ParameterSet ps;
    ps.add("logits", logits);
    nn::Graph g(true);
    const nn::Var l = g.param(ps[0]);
    nn::Var loss;
    if (coma) {
      loss = actor_loss(ActorLossKind::naive_coma, l, tp, ql, qg, 0.7, 0.0, 0.0);
    } else {
      const nn::Var p = nn::softmax_rows(l);
      loss = nn::scale(nn::mean_all(nn::row_sum(nn::mul(p, nn::log_softmax_rows(l)))), 0.7 * 2.0 / 2.0);
    }
    ps.zero_grad();
    g.backward(loss);
    return ps[0].grad;
  };
  EXPECT_TRUE(grad_of(true).isApprox(grad_of(false), 1e-9));
}

TEST(Losses, SoftValueAndTarget) {
  const double v = soft_value({0.25, 0.75}, {1.0, 2.0}, {0.5, 3.0}, 0.5);
  const double ent = 0.25 * std::log(0.25) + 0.75 * std::log(0.75);
  EXPECT_NEAR(v, 0.25 * 0.5 + 0.75 * 2.0 - 0.5 * ent, 1e-12);
  EXPECT_DOUBLE_EQ(critic_target(1.0, 0.9, false, 2.0), 2.8);
  EXPECT_DOUBLE_EQ(critic_target(1.0, 0.9, true, 2.0), 1.0);
  EXPECT_THROW(critic_target(NAN, 0.9, false, 1.0), nn::NumericalError);
}

TEST(Schedule, Values) {
  const ScheduleSpec lin{ScheduleKind::linear, 1.0};
  EXPECT_DOUBLE_EQ(schedule_value(lin, 0, 100), 0.0);
  EXPECT_DOUBLE_EQ(schedule_value(lin, 50, 100), 0.5);
  EXPECT_DOUBLE_EQ(schedule_value(lin, 100, 100), 1.0);
  EXPECT_DOUBLE_EQ(schedule_value(lin, 500, 100), 1.0);
  const ScheduleSpec pw{ScheduleKind::power, 0.25};
  EXPECT_NEAR(schedule_value(pw, 1, 16), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(schedule_value(pw, 0, 16), 0.0);
  const ScheduleSpec jp{ScheduleKind::jump, 0.25};
  EXPECT_DOUBLE_EQ(schedule_value(jp, 24, 100), 0.0);
  EXPECT_DOUBLE_EQ(schedule_value(jp, 25, 100), 1.0);
  const ScheduleSpec j0{ScheduleKind::jump, 0.0};
  EXPECT_DOUBLE_EQ(schedule_value(j0, 0, 100), 0.0);
  EXPECT_DOUBLE_EQ(schedule_value(j0, 1, 100), 1.0);
}

TEST(Schedule, ParseAndPrint) {
  EXPECT_EQ(parse_schedule("linear"), (ScheduleSpec{ScheduleKind::linear, 1.0}));
  EXPECT_EQ(parse_schedule(" power(0.5) "), (ScheduleSpec{ScheduleKind::power, 0.5}));
  EXPECT_EQ(parse_schedule("jump(0.75)"), (ScheduleSpec{ScheduleKind::jump, 0.75}));
  EXPECT_EQ(parse_schedule(to_string(ScheduleSpec{ScheduleKind::power, 0.25})),
            (ScheduleSpec{ScheduleKind::power, 0.25}));
  EXPECT_THROW(parse_schedule("power(-1)"), std::invalid_argument);
  EXPECT_THROW(parse_schedule("jump(1.5)"), std::invalid_argument);
  EXPECT_THROW(parse_schedule("cosine"), std::invalid_argument);
  EXPECT_THROW(parse_schedule("linear(2)"), std::invalid_argument);
}

StepRecord record(std::uint64_t episode, int step, int agents, double reward = 0.0) {
  StepRecord r;
  r.features.own = nn::Matrix::Zero(agents, 3);
  r.actions.assign(agents, 0);
  r.matched.assign(agents, true);
  r.local_rewards.assign(agents, 0.0);
  if (agents > 0) r.local_rewards[0] = reward;
  for (int a = 0; a < agents; ++a) {
    r.features.agent_request_row.push_back(a);
    r.features.agent_vehicle.push_back(a);
  }
  r.step = step;
  r.episode = episode;
  return r;
}

TEST(ReplayBuffer, LinksGapsAndTerminals) {
  ReplayBuffer b(10);
  b.push(record(0, 1, 2, 1.0));
  EXPECT_EQ(b.sampleable(), 0u);
  b.push(record(0, 4, 1));
  b.push(record(0, 5, 0));  // no agents: ignored
  EXPECT_EQ(b.size(), 2u);
  EXPECT_EQ(b[0].next_gap, 3);
  EXPECT_EQ(b.sampleable(), 1u);
  b.end_episode(0);
  EXPECT_TRUE(b[1].terminal);
  b.push(record(1, 2, 1));
  b.push(record(2, 1, 1));  // new episode without end_episode: previous becomes terminal
  EXPECT_TRUE(b[2].terminal);
  EXPECT_EQ(b.sampleable(), 3u);
  EXPECT_THROW(b.push(record(2, 1, 1)), std::invalid_argument);
  std::mt19937_64 rng(1);
  for (std::size_t i : b.sample(50, rng)) EXPECT_LT(i, 3u);
}

TEST(ReplayBuffer, EvictsOldestAndTracksRewardDensity) {
  ReplayBuffer b(3);
  b.push(record(0, 1, 2, 1.0));
  b.push(record(0, 2, 2, 0.0));
  b.push(record(0, 3, 2, 1.0));
  EXPECT_DOUBLE_EQ(b.mean_nonzero_rewards(), 1.0);  // floored
  b.push(record(0, 4, 2, 0.0));
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b[0].step, 2);
  EXPECT_DOUBLE_EQ(normalized_global_reward(3.0, 2.0), 1.5);
  EXPECT_DOUBLE_EQ(normalized_global_reward(3.0, 0.5), 3.0);
  ReplayBuffer dense(4);
  StepRecord r = record(0, 1, 3);
  r.local_rewards = {1.0, 2.0, 0.0};
  dense.push(r);
  EXPECT_DOUBLE_EQ(dense.mean_nonzero_rewards(), 2.0);
  EXPECT_DOUBLE_EQ(dense.normalized_global_reward(3.0), 1.5);
}

TEST(ReplayBuffer, SerializeRoundTrip) {
  ReplayBuffer b(5);
  StepRecord r = record(3, 2, 2, 0.25);
  r.features.requests = nn::Matrix::Constant(2, 4, 0.5);
  r.features.vehicles = nn::Matrix::Constant(3, 2, 0.125);
  r.features.agent_vehicle = {2, 0};
  r.step_profit = 0.459;
  b.push(r);
  b.push(record(3, 7, 1));
  const ReplayBuffer c = ReplayBuffer::deserialize(b.serialize());
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.capacity(), 5u);
  EXPECT_EQ(c[0].next_gap, 5);
  EXPECT_EQ(c[0].step_profit, 0.459);
  EXPECT_TRUE(c[0].features.requests == r.features.requests);
  EXPECT_TRUE(c[0].features.vehicles == r.features.vehicles);
  EXPECT_EQ(c[0].features.agent_vehicle, r.features.agent_vehicle);
  EXPECT_EQ(c[0].local_rewards, r.local_rewards);
  EXPECT_EQ(c.mean_nonzero_rewards(), b.mean_nonzero_rewards());
  EXPECT_ANY_THROW(ReplayBuffer::deserialize("garbage"));
}

TrainingConfig tiny_config(Algorithm algo, std::int64_t steps = 200) {
  TrainingConfig tc;
  tc.algorithm = algo;
  tc.total_steps = steps;
  tc.warmup_steps = 20;
  tc.batch_size = 8;
  tc.network = {8, 8, 8};
  tc.seed = 5;
  return tc;
}

Trainer tiny_trainer(const TrainingConfig& tc) {
  const EpisodeConfig inst = testing::five_zone_config({1, 3, 1, 3}, 12);
  SynthSpec spec = testing::benchmark_demand(0.4);
  spec.episode_length = 12;
  std::vector<RequestStream> val{synth_stream(inst.grid, spec, 900)};
  return Trainer(tc, inst, [inst, spec](std::uint64_t e) { return synth_stream(inst.grid, spec, 17 + e); }, val);
}

TEST(Trainer, CriticRoutingPerAlgorithm) {
  struct Row {
    Algorithm algo;
    bool local;
    bool global;
    RewardKind local_kind;
  };
  const Row rows[] = {{Algorithm::LRA, true, false, RewardKind::local},
                      {Algorithm::GRA, false, true, RewardKind::local},
                      {Algorithm::LGRA, true, false, RewardKind::mixed},
                      {Algorithm::COMAequ, false, true, RewardKind::local},
                      {Algorithm::COMAtgt, false, true, RewardKind::local},
                      {Algorithm::COMAadj, false, true, RewardKind::local},
                      {Algorithm::COMAscd, true, true, RewardKind::local}};
  for (const Row& r : rows) {
    const Trainer t = tiny_trainer(tiny_config(r.algo));
    EXPECT_EQ(t.local_critics() != nullptr, r.local) << to_string(r.algo);
    EXPECT_EQ(t.global_critics() != nullptr, r.global) << to_string(r.algo);
    if (r.local) {
      EXPECT_EQ(t.local_critics()->kind, r.local_kind);
    }
    if (r.global) {
      EXPECT_EQ(t.global_critics()->kind, RewardKind::global);
    }
    EXPECT_EQ(parse_algorithm(to_string(r.algo)), r.algo);
  }
  EXPECT_THROW(parse_algorithm("PPO"), std::invalid_argument);
}

TEST(Trainer, WarmupThenGradientSteps) {
  Trainer t = tiny_trainer(tiny_config(Algorithm::COMAscd, 60));
  bool any_gradient = false;
  while (!t.finished()) {
    const StepMetrics m = t.step();
    if (m.step <= 20) {
      EXPECT_FALSE(m.gradient_step);
    }
    if (m.gradient_step) {
      any_gradient = true;
      EXPECT_TRUE(m.critic_loss_local.has_value());
      EXPECT_TRUE(m.critic_loss_global.has_value());
      EXPECT_TRUE(std::isfinite(*m.actor_loss));
    }
  }
  EXPECT_TRUE(any_gradient);
  EXPECT_GT(t.buffer().size(), 0u);
  EXPECT_TRUE(std::isfinite(t.validate()));
}

TEST(Trainer, MixedRewardBlendsLocalAndGlobal) {
  Trainer t = tiny_trainer(tiny_config(Algorithm::LGRA, 40));
  while (!t.finished()) t.step();
  const ReplayBuffer& b = t.buffer();
  for (std::size_t i = 0; i < b.size(); ++i) {
    const double g = b.normalized_global_reward(b[i].step_profit);
    EXPECT_NEAR(t.reward_for(RewardKind::mixed, i, 0), 0.7 * b[i].local_rewards[0] + 0.3 * g, 1e-12);
    EXPECT_NEAR(t.reward_for(RewardKind::global, i, 0), g, 1e-12);
  }
}

// Recomputes the critic targets of one record from the networks directly.
std::vector<double> hand_targets(const Trainer& t, const CriticPair& pair, std::size_t i) {
  const ReplayBuffer& b = t.buffer();
  const StepRecord& r = b[i];
  const StepRecord& next = b.next_of(i);
  // The next state is scored with the matching that was realised there.
  const ObservationBatch nb = make_batch({&next.features}, {&next.matched}, t.dims());
  const auto probs = t.actor().probabilities(nb);
  const nn::Matrix q1 = pair.target1.evaluate(nb), q2 = pair.target2.evaluate(nb);
  std::vector<double> v(probs.size());
  for (std::size_t a = 0; a < probs.size(); ++a)
    v[a] = soft_value(probs[a], {q1(a, 0), q1(a, 1)}, {q2(a, 0), q2(a, 1)}, 0.7);
  double mean = 0.0;
  for (double x : v) mean += x / static_cast<double>(v.size());
  const double disc = std::pow(0.97, r.next_gap);
  std::vector<double> y;
  for (std::size_t a = 0; a < r.features.agent_count(); ++a) {
    double boot = mean;
    if (pair.kind == RewardKind::local) {
      // Own vehicle's next opportunities when it has any.
      double s = 0.0;
      int n = 0;
      for (std::size_t k = 0; k < v.size(); ++k)
        if (next.features.agent_vehicle[k] == r.features.agent_vehicle[a]) s += v[k], ++n;
      if (n > 0) boot = s / n;
    }
    const double reward = pair.kind == RewardKind::local ? r.local_rewards[a]
                                                         : b.normalized_global_reward(r.step_profit);
    y.push_back(reward + disc * boot);
  }
  return y;
}

TEST(Trainer, CriticTargetsMatchHandComputation) {
  for (Algorithm algo : {Algorithm::GRA, Algorithm::LRA}) {
    Trainer t = tiny_trainer(tiny_config(algo, 60));
    while (!t.finished()) t.step();
    const CriticPair& pair = algo == Algorithm::GRA ? *t.global_critics() : *t.local_critics();
    int checked = 0;
    for (std::size_t i = 0; i < t.buffer().sampleable(); ++i) {
      if (t.buffer()[i].terminal) continue;
      const std::vector<double> got = t.critic_targets(pair, {i});
      const std::vector<double> want = hand_targets(t, pair, i);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t a = 0; a < got.size(); ++a) EXPECT_NEAR(got[a], want[a], 1e-9) << to_string(algo);
      ++checked;
    }
    EXPECT_GT(checked, 3);
  }
}

TEST(Trainer, ZeroDiscountCriticConvergesToReward) {
  TrainingConfig tc = tiny_config(Algorithm::LRA, 30);
  tc.gamma = 0.0;
  tc.lr_critic = 3e-3;
  Trainer t = tiny_trainer(tc);
  while (!t.finished()) t.step();
  std::size_t i = 0;
  while (t.buffer()[i].nonzero_rewards() == 0 && i + 1 < t.buffer().sampleable()) ++i;
  CriticPair& pair = *t.mutable_local_critics();
  for (int k = 0; k < 1500; ++k) t.critic_update(pair, {i});
  const StepRecord& r = t.buffer()[i];
  const ObservationBatch obs = make_batch({&r.features}, {&r.matched}, t.dims());
  const nn::Matrix q = pair.q1.evaluate(obs);
  for (std::size_t a = 0; a < r.features.agent_count(); ++a)
    EXPECT_NEAR(q(static_cast<Eigen::Index>(a), r.actions[a]), r.local_rewards[a], 1e-3);
}

TEST(Trainer, DeterministicForSeed) {
  Trainer a = tiny_trainer(tiny_config(Algorithm::COMAadj, 80));
  Trainer b = tiny_trainer(tiny_config(Algorithm::COMAadj, 80));
  while (!a.finished()) a.step();
  while (!b.finished()) b.step();
  for (std::size_t i = 0; i < a.actor().params().size(); ++i)
    EXPECT_TRUE(a.actor().params()[i].value == b.actor().params()[i].value);
}

TEST(Trainer, ResumeIsBitExact) {
  const TrainingConfig tc = tiny_config(Algorithm::COMAscd, 150);
  Trainer straight = tiny_trainer(tc);
  while (!straight.finished()) straight.step();

  Trainer first = tiny_trainer(tc);
  while (first.steps_done() < 60 || !first.at_episode_boundary()) first.step();
  const nn::Checkpoint ck = first.checkpoint();
  Trainer resumed = tiny_trainer(tc);
  resumed.restore(ck);
  EXPECT_EQ(resumed.steps_done(), first.steps_done());
  while (!resumed.finished()) resumed.step();
  for (std::size_t i = 0; i < straight.actor().params().size(); ++i)
    EXPECT_TRUE(straight.actor().params()[i].value == resumed.actor().params()[i].value);
  EXPECT_EQ(straight.validate(), resumed.validate());
}

TEST(Trainer, ActorCheckpointRoundTrip) {
  Trainer t = tiny_trainer(tiny_config(Algorithm::LRA, 40));
  while (!t.finished()) t.step();
  nn::Checkpoint ck;
  Trainer::store_actor(ck, t.actor());
  const nn::ActorNet back = Trainer::load_actor(ck);
  EXPECT_EQ(back.shape(), t.actor().shape());
  for (std::size_t i = 0; i < back.params().size(); ++i)
    EXPECT_TRUE(back.params()[i].value == t.actor().params()[i].value);
}

TEST(Trainer, ConfigValidation) {
  TrainingConfig tc = tiny_config(Algorithm::LRA);
  tc.gamma = 1.5;
  EXPECT_THROW(tc.validate(), std::invalid_argument);
  tc = tiny_config(Algorithm::LRA);
  tc.beta_schedule = {ScheduleKind::jump, 0.5};
  EXPECT_THROW(tc.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace amod
