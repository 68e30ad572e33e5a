#include "amod/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace amod {
namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

const std::map<std::string, Algorithm>& algorithm_names() {
  static const std::map<std::string, Algorithm> names{
      {"LRA", Algorithm::LRA},         {"GRA", Algorithm::GRA},         {"LGRA", Algorithm::LGRA},
      {"COMAequ", Algorithm::COMAequ}, {"COMAtgt", Algorithm::COMAtgt}, {"COMAadj", Algorithm::COMAadj},
      {"COMAscd", Algorithm::COMAscd}};
  return names;
}

bool needs_local(Algorithm a) {
  return a == Algorithm::LRA || a == Algorithm::LGRA || a == Algorithm::COMAscd;
}
bool needs_global(Algorithm a) { return a != Algorithm::LRA && a != Algorithm::LGRA; }

ActionProbs row_probs(const nn::Matrix& m, Eigen::Index i) { return {m(i, 0), m(i, 1)}; }

}  // namespace

Algorithm parse_algorithm(const std::string& name) {
  const auto it = algorithm_names().find(name);
  if (it == algorithm_names().end()) throw std::invalid_argument("unknown algorithm '" + name + "'");
  return it->second;
}

std::string to_string(Algorithm a) {
  for (const auto& [name, value] : algorithm_names())
    if (value == a) return name;
  return "?";
}

void TrainingConfig::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (!(lr_actor > 0.0) || !(lr_critic > 0.0)) throw std::invalid_argument("learning rates must be positive");
  if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (buffer_capacity < static_cast<std::size_t>(batch_size))
    throw std::invalid_argument("buffer_capacity must hold at least one batch");
  if (warmup_steps < 0) throw std::invalid_argument("warmup_steps must be non-negative");
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
  if (!(lgra_global_share >= 0.0 && lgra_global_share <= 1.0))
    throw std::invalid_argument("lgra_global_share must lie in [0, 1]");
  if (total_steps < 1) throw std::invalid_argument("total_steps must be positive");
  if (!(reward_scale > 0.0)) throw std::invalid_argument("reward_scale must be positive");
  if (beta_schedule.kind == ScheduleKind::jump)
    throw std::invalid_argument("beta schedule must be linear or power");
  beta_schedule.validate();
  kappa_schedule.validate();
  if (network.embed < 1 || network.hidden < 1 || network.attention < 1)
    throw std::invalid_argument("network sizes must be positive");
}

ActorPolicy::ActorPolicy(const nn::ActorNet& actor, ScoreMode mode, std::uint64_t seed, std::string label)
    : actor_(actor), mode_(mode), rng_(seed), label_(std::move(label)) {}

GlobalAction ActorPolicy::decide(const SimState& state, const EpisodeConfig& cfg) {
  const AgentSet agents = build_agents(state, cfg);
  if (agents.empty()) return {};
  const StateFeatures f = encode_state(state, agents, cfg);
  const auto probs = actor_.probabilities(make_batch({&f}, {}, actor_.dims()));
  const auto decisions = score_agents(probs, mode_, rng_);
  std::vector<double> scores;
  scores.reserve(decisions.size());
  for (const auto& d : decisions) scores.push_back(d.score);
  return solve_matching(agents, scores);
}

Trainer::Trainer(TrainingConfig cfg, EpisodeConfig instance, StreamProvider training_streams,
                 std::vector<RequestStream> validation_streams)
    : cfg_(std::move(cfg)),
      instance_(std::move(instance)),
      streams_(std::move(training_streams)),
      validation_(std::move(validation_streams)),
      dims_(feature_dims(instance_.grid.size())),
      buffer_(cfg_.buffer_capacity),
      rng_(mix_seed(cfg_.seed, 0)) {
  cfg_.validate();
  instance_.validate();
  if (!streams_) throw std::invalid_argument("trainer needs a training stream provider");
  actor_ = nn::ActorNet(dims_, cfg_.network, mix_seed(cfg_.seed, 1));
  target_actor_ = actor_;
  actor_opt_ = nn::Adam(actor_.params(), {cfg_.lr_actor});
  if (cfg_.algorithm == Algorithm::LGRA) {
    local_ = make_pair(RewardKind::mixed, mix_seed(cfg_.seed, 2));
  } else if (needs_local(cfg_.algorithm)) {
    local_ = make_pair(RewardKind::local, mix_seed(cfg_.seed, 2));
  }
  if (needs_global(cfg_.algorithm)) global_ = make_pair(RewardKind::global, mix_seed(cfg_.seed, 3));
}

std::unique_ptr<CriticPair> Trainer::make_pair(RewardKind kind, std::uint64_t seed) const {
  auto p = std::make_unique<CriticPair>();
  p->kind = kind;
  p->q1 = nn::CriticNet(dims_, cfg_.network, mix_seed(seed, 0));
  p->q2 = nn::CriticNet(dims_, cfg_.network, mix_seed(seed, 1));
  p->target1 = p->q1;
  p->target2 = p->q2;
  p->opt1 = nn::Adam(p->q1.params(), {cfg_.lr_critic});
  p->opt2 = nn::Adam(p->q2.params(), {cfg_.lr_critic});
  return p;
}

ScheduleState Trainer::schedule() const {
  ScheduleState s;
  s.step = std::min(steps_, cfg_.total_steps);
  s.total_steps = cfg_.total_steps;
  s.beta_schedule = cfg_.beta_schedule;
  s.kappa_schedule = cfg_.kappa_schedule;
  return s;
}

StepMetrics Trainer::step() {
  if (!state_) {
    stream_ = streams_(episode_);
    state_ = initial_state(instance_, stream_);
    episode_return_ = 0.0;
  }
  StepMetrics m;
  const SimState& s = *state_;
  const AgentSet agents = build_agents(s, instance_);
  StepRecord rec;
  rec.step = s.step;
  rec.episode = episode_;
  GlobalAction action;
  if (!agents.empty()) {
    rec.features = encode_state(s, agents, instance_);
    std::vector<ActionProbs> probs;
    if (steps_ < cfg_.warmup_steps) {
      probs.assign(agents.size(), ActionProbs{0.5, 0.5});
    } else {
      probs = actor_.probabilities(make_batch({&rec.features}, {}, dims_));
    }
    const auto decisions = score_agents(probs, ScoreMode::train, rng_);
    std::vector<double> scores;
    for (const auto& d : decisions) {
      scores.push_back(d.score);
      rec.actions.push_back(static_cast<int>(d.action));
    }
    action = solve_matching(agents, scores);
    rec.matched = matched_flags(agents, action);
  }
  StepResult result = apply_dispatch(s, action, stream_, instance_);

  rec.local_rewards.assign(agents.size(), 0.0);
  for (std::size_t a = 0; a < agents.size(); ++a) {
    if (!rec.matched[a]) continue;
    for (const AgentProfit& p : result.agent_profits)
      if (p.vehicle == agents.agents[a].vehicle && p.request == agents.agents[a].request)
        rec.local_rewards[a] = p.profit * cfg_.reward_scale;
  }
  rec.step_profit = result.global_profit * cfg_.reward_scale;
  m.agents = static_cast<int>(agents.size());
  m.step_profit = result.global_profit;
  episode_return_ += result.global_profit;
  buffer_.push(std::move(rec));

  state_ = std::move(result.next);
  if (state_->done()) {
    buffer_.end_episode(episode_);
    m.episode_return = episode_return_;
    state_.reset();
    ++episode_;
  }
  ++steps_;
  m.step = steps_;
  const ScheduleState sched = schedule();
  m.beta = sched.beta();
  m.kappa = sched.kappa();
  if (steps_ > cfg_.warmup_steps && buffer_.sampleable() >= static_cast<std::size_t>(cfg_.batch_size))
    gradient_step(m);
  return m;
}

ObservationBatch Trainer::batch_of(const std::vector<std::size_t>& idx, bool next) const {
  std::vector<const StateFeatures*> states;
  std::vector<const std::vector<bool>*> post;
  for (std::size_t i : idx) {
    const StepRecord& r = next ? buffer_.next_of(i) : buffer_[i];
    states.push_back(&r.features);
    post.push_back(&r.matched);
  }
  return make_batch(states, post, dims_);
}

double Trainer::reward_for(RewardKind kind, std::size_t index, std::size_t agent) const {
  const StepRecord& r = buffer_[index];
  switch (kind) {
    case RewardKind::local:
      return r.local_rewards[agent];
    case RewardKind::global:
      return buffer_.normalized_global_reward(r.step_profit);
    case RewardKind::mixed:
      return (1.0 - cfg_.lgra_global_share) * r.local_rewards[agent] +
             cfg_.lgra_global_share * buffer_.normalized_global_reward(r.step_profit);
  }
  return 0.0;
}

std::vector<double> Trainer::critic_targets(const CriticPair& pair, const std::vector<std::size_t>& batch) const {
  std::vector<std::size_t> live;
  for (std::size_t i : batch)
    if (!buffer_[i].terminal) live.push_back(i);

  // Soft value of each distinct next state: the mean over all its agents,
  // and per vehicle the mean over that vehicle's agents.
  struct NextValue {
    double mean = 0.0;
    std::map<int, std::pair<double, int>> by_vehicle;
  };
  std::map<std::size_t, NextValue> next_value;
  if (!live.empty()) {
    std::sort(live.begin(), live.end());
    live.erase(std::unique(live.begin(), live.end()), live.end());
    const ObservationBatch nb = batch_of(live, true);
    nn::Graph g(false);
    const nn::Matrix probs = nn::softmax_rows(actor_.logits(g, nb)).value();
    const nn::Matrix t1 = pair.target1.evaluate(nb);
    const nn::Matrix t2 = pair.target2.evaluate(nb);
    for (std::size_t k = 0; k < live.size(); ++k) {
      const StateFeatures& next = buffer_.next_of(live[k]).features;
      const int begin = nb.state_offsets[k];
      const int end = nb.state_offsets[k + 1];
      NextValue& nv = next_value[live[k]];
      for (int a = begin; a < end; ++a) {
        const double v = soft_value(row_probs(probs, a), {t1(a, 0), t1(a, 1)}, {t2(a, 0), t2(a, 1)}, cfg_.alpha);
        nv.mean += v;
        auto& [sum, count] = nv.by_vehicle[next.agent_vehicle[static_cast<std::size_t>(a - begin)]];
        sum += v;
        ++count;
      }
      if (end > begin) nv.mean /= end - begin;
    }
  }

  std::vector<double> y;
  for (std::size_t i : batch) {
    const StepRecord& r = buffer_[i];
    const double discount = std::pow(cfg_.gamma, r.next_gap);
    const NextValue* nv = r.terminal ? nullptr : &next_value.at(i);
    for (std::size_t a = 0; a < r.features.agent_count(); ++a) {
      double v = 0.0;
      if (nv != nullptr) {
        v = nv->mean;
        // A local reward belongs to one vehicle, so its future is that
        // vehicle's next opportunities when it has any.
        if (pair.kind == RewardKind::local) {
          const auto it = nv->by_vehicle.find(r.features.agent_vehicle[a]);
          if (it != nv->by_vehicle.end()) v = it->second.first / it->second.second;
        }
      }
      y.push_back(critic_target(reward_for(pair.kind, i, a), discount, r.terminal, v));
    }
  }
  return y;
}

double Trainer::critic_update(CriticPair& pair, const std::vector<std::size_t>& batch, nn::Matrix* q_out) {
  const std::vector<double> y = critic_targets(pair, batch);
  const ObservationBatch obs = batch_of(batch, false);
  std::vector<int> actions;
  for (std::size_t i : batch)
    actions.insert(actions.end(), buffer_[i].actions.begin(), buffer_[i].actions.end());
  const nn::Matrix target = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));

  double total = 0.0;
  nn::Matrix q_min;
  auto fit = [&](nn::CriticNet& net, nn::Adam& opt) {
    nn::Graph g;
    const nn::Var q = net.q_values(g, obs);
    q_min = q_min.size() == 0 ? q.value() : q_min.cwiseMin(q.value()).eval();
    const nn::Var loss = nn::mean_all(nn::square(nn::sub(nn::pick_cols(q, actions), g.constant(target))));
    total += loss.value()(0, 0);
    nn::backward_and_step(g, loss, net.params(), opt);
  };
  fit(pair.q1, pair.opt1);
  fit(pair.q2, pair.opt2);
  if (q_out != nullptr) *q_out = std::move(q_min);
  return 0.5 * total;
}

void Trainer::gradient_step(StepMetrics& m) {
  const auto batch = buffer_.sample(static_cast<std::size_t>(cfg_.batch_size), rng_);
  nn::Matrix q_local, q_global;
  if (local_) m.critic_loss_local = critic_update(*local_, batch, &q_local);
  if (global_) m.critic_loss_global = critic_update(*global_, batch, &q_global);

  ActorLossKind kind = ActorLossKind::local;
  double beta = 0.0, kappa = 0.0;
  switch (cfg_.algorithm) {
    case Algorithm::LRA:
    case Algorithm::LGRA:
      break;
    case Algorithm::GRA:
      q_local = q_global;
      break;
    case Algorithm::COMAequ:
      kind = ActorLossKind::adj;
      break;
    case Algorithm::COMAtgt:
      kind = ActorLossKind::adj;
      beta = 1.0;
      break;
    case Algorithm::COMAadj:
      kind = ActorLossKind::adj;
      beta = m.beta;
      break;
    case Algorithm::COMAscd:
      kind = ActorLossKind::scheduled;
      beta = m.beta;
      kappa = m.kappa;
      break;
  }
  const ObservationBatch obs = batch_of(batch, false);
  const nn::Matrix target_probs = [&] {
    nn::Graph g(false);
    return nn::softmax_rows(target_actor_.logits(g, obs)).value();
  }();
  if (q_local.size() == 0) q_local = nn::Matrix::Zero(obs.own.rows(), kActionsPerAgent);
  if (q_global.size() == 0) q_global = nn::Matrix::Zero(obs.own.rows(), kActionsPerAgent);

  nn::Graph g;
  const nn::Var logits = actor_.logits(g, obs);
  const nn::Var loss = actor_loss(kind, logits, target_probs, q_local, q_global, cfg_.alpha, beta, kappa);
  {
    const nn::Matrix p = nn::softmax_rows(g.constant(logits.value())).value();
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (p.data()[i] > 0.0) h -= p.data()[i] * std::log(p.data()[i]);
    m.entropy = h / static_cast<double>(std::max<Eigen::Index>(1, p.rows()));
  }
  m.actor_loss = loss.value()(0, 0);
  nn::backward_and_step(g, loss, actor_.params(), actor_opt_);

  nn::soft_update(target_actor_.params(), actor_.params(), cfg_.tau);
  for (CriticPair* pair : {local_.get(), global_.get()}) {
    if (pair == nullptr) continue;
    nn::soft_update(pair->target1.params(), pair->q1.params(), cfg_.tau);
    nn::soft_update(pair->target2.params(), pair->q2.params(), cfg_.tau);
  }
  m.gradient_step = true;
}

double Trainer::validate() const {
  if (validation_.empty()) return 0.0;
  double total = 0.0;
  for (const RequestStream& stream : validation_) {
    ActorPolicy policy(actor_, ScoreMode::test);
    total += rollout(policy, instance_, stream).total_profit;
  }
  return total / static_cast<double>(validation_.size());
}

void Trainer::store_actor(nn::Checkpoint& ckpt, const nn::ActorNet& actor) {
  nn::store_params(ckpt, "actor", actor.params());
  ckpt.counters["dims.own"] = actor.dims().own;
  ckpt.counters["dims.request"] = actor.dims().request;
  ckpt.counters["dims.vehicle"] = actor.dims().vehicle;
  ckpt.counters["shape.embed"] = actor.shape().embed;
  ckpt.counters["shape.hidden"] = actor.shape().hidden;
  ckpt.counters["shape.attention"] = actor.shape().attention;
}

nn::ActorNet Trainer::load_actor(const nn::Checkpoint& ckpt) {
  auto get = [&](const std::string& key) {
    const auto it = ckpt.counters.find(key);
    if (it == ckpt.counters.end()) throw nn::CheckpointError("checkpoint lacks '" + key + "'");
    return static_cast<int>(it->second);
  };
  FeatureDims dims{get("dims.own"), get("dims.request"), get("dims.vehicle")};
  nn::NetworkShape shape{get("shape.embed"), get("shape.hidden"), get("shape.attention")};
  nn::ActorNet actor(dims, shape, 0);
  nn::restore_params(ckpt, "actor", actor.params());
  return actor;
}

nn::Checkpoint Trainer::checkpoint(bool include_replay) const {
  if (!at_episode_boundary()) throw std::logic_error("checkpoints are taken between episodes");
  nn::Checkpoint c;
  store_actor(c, actor_);
  nn::store_params(c, "target_actor", target_actor_.params());
  nn::store_optimizer(c, "opt.actor", actor_opt_);
  auto store_pair = [&](const std::string& key, const CriticPair& p) {
    nn::store_params(c, key + ".q1", p.q1.params());
    nn::store_params(c, key + ".q2", p.q2.params());
    nn::store_params(c, key + ".target1", p.target1.params());
    nn::store_params(c, key + ".target2", p.target2.params());
    nn::store_optimizer(c, "opt." + key + ".q1", p.opt1);
    nn::store_optimizer(c, "opt." + key + ".q2", p.opt2);
  };
  if (local_) store_pair("local", *local_);
  if (global_) store_pair("global", *global_);
  nn::store_rng(c, "rng", rng_);
  c.counters["steps"] = steps_;
  c.counters["episode"] = static_cast<std::int64_t>(episode_);
  c.blobs["algorithm"] = to_string(cfg_.algorithm);
  if (include_replay) c.blobs["replay"] = buffer_.serialize();
  return c;
}

void Trainer::restore(const nn::Checkpoint& c) {
  const auto algo = c.blobs.find("algorithm");
  if (algo == c.blobs.end() || algo->second != to_string(cfg_.algorithm))
    throw nn::CheckpointError("checkpoint algorithm does not match the run");
  const auto replay = c.blobs.find("replay");
  if (replay == c.blobs.end()) throw nn::CheckpointError("checkpoint has no replay buffer to resume from");
  nn::restore_params(c, "actor", actor_.params());
  nn::restore_params(c, "target_actor", target_actor_.params());
  nn::restore_optimizer(c, "opt.actor", actor_opt_);
  auto restore_pair = [&](const std::string& key, CriticPair& p) {
    nn::restore_params(c, key + ".q1", p.q1.params());
    nn::restore_params(c, key + ".q2", p.q2.params());
    nn::restore_params(c, key + ".target1", p.target1.params());
    nn::restore_params(c, key + ".target2", p.target2.params());
    nn::restore_optimizer(c, "opt." + key + ".q1", p.opt1);
    nn::restore_optimizer(c, "opt." + key + ".q2", p.opt2);
  };
  if (local_) restore_pair("local", *local_);
  if (global_) restore_pair("global", *global_);
  nn::restore_rng(c, "rng", rng_);
  steps_ = c.counters.at("steps");
  episode_ = static_cast<std::uint64_t>(c.counters.at("episode"));
  buffer_ = ReplayBuffer::deserialize(replay->second);
  state_.reset();
}

}  // namespace amod
