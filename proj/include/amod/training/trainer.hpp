#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "amod/dispatch.hpp"
#include "amod/episode_log.hpp"
#include "amod/features.hpp"
#include "amod/nn/checkpoint.hpp"
#include "amod/nn/networks.hpp"
#include "amod/nn/optim.hpp"
#include "amod/training/losses.hpp"
#include "amod/training/replay_buffer.hpp"
#include "amod/training/schedule.hpp"

namespace amod {

enum class Algorithm { LRA, GRA, LGRA, COMAequ, COMAtgt, COMAadj, COMAscd };

Algorithm parse_algorithm(const std::string& name);
std::string to_string(Algorithm a);

struct TrainingConfig {
  Algorithm algorithm = Algorithm::LRA;
  double alpha = 0.7;
  double gamma = 0.97;
  double lr_actor = 6e-4;
  double lr_critic = 3e-4;
  int batch_size = 32;
  std::size_t buffer_capacity = 100000;
  std::int64_t warmup_steps = 2000;
  double tau = 0.005;
  /// Share w of the normalized global reward in LGRA's critic target.
  double lgra_global_share = 0.3;
  ScheduleSpec beta_schedule{ScheduleKind::linear, 1.0};
  ScheduleSpec kappa_schedule{ScheduleKind::power, 0.25};
  std::int64_t total_steps = 200000;
  /// Multiplies every reward before it enters the buffer.
  double reward_scale = 1.0;
  nn::NetworkShape network;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Which reward a critic pair regresses on.
enum class RewardKind { local, global, mixed };

/// Twin critics with their target copies and optimizers.
struct CriticPair {
  RewardKind kind = RewardKind::local;
  nn::CriticNet q1, q2, target1, target2;
  nn::Adam opt1, opt2;
};

/// Test-mode (or sampled) dispatch by an actor network.
class ActorPolicy final : public DispatchPolicy {
 public:
  ActorPolicy(const nn::ActorNet& actor, ScoreMode mode, std::uint64_t seed = 0,
              std::string label = "actor");
  std::string name() const override { return label_; }
  GlobalAction decide(const SimState& state, const EpisodeConfig& cfg) override;

 private:
  const nn::ActorNet& actor_;
  ScoreMode mode_;
  std::mt19937_64 rng_;
  std::string label_;
};

struct StepMetrics {
  std::int64_t step = 0;
  int agents = 0;
  double step_profit = 0.0;
  bool gradient_step = false;
  std::optional<double> critic_loss_local;
  std::optional<double> critic_loss_global;
  std::optional<double> actor_loss;
  std::optional<double> entropy;
  double beta = 0.0;
  double kappa = 0.0;
  /// Set on the step that finishes a training episode.
  std::optional<double> episode_return;
};

/// Training episodes are drawn by index; the provider must be deterministic.
using StreamProvider = std::function<RequestStream(std::uint64_t episode)>;

class Trainer {
 public:
  Trainer(TrainingConfig cfg, EpisodeConfig instance, StreamProvider training_streams,
          std::vector<RequestStream> validation_streams);

  /// One environment step with sampled actions, then (after warmup and once
  /// a full batch is available) one gradient step.
  StepMetrics step();

  /// Mean test-mode episode profit over the validation streams.
  double validate() const;

  std::int64_t steps_done() const { return steps_; }
  bool finished() const { return steps_ >= cfg_.total_steps; }
  bool at_episode_boundary() const { return !state_.has_value(); }

  const TrainingConfig& config() const { return cfg_; }
  const EpisodeConfig& instance() const { return instance_; }
  const FeatureDims& dims() const { return dims_; }
  const nn::ActorNet& actor() const { return actor_; }
  const nn::ActorNet& target_actor() const { return target_actor_; }
  const CriticPair* local_critics() const { return local_.get(); }
  const CriticPair* global_critics() const { return global_.get(); }
  ScheduleState schedule() const;
  const ReplayBuffer& buffer() const { return buffer_; }
  ReplayBuffer& buffer() { return buffer_; }

  /// Gradient step on explicit buffer indices; returns the mean of the two
  /// critic losses and leaves min-twin Q values of the batch in `q_out`.
  double critic_update(CriticPair& pair, const std::vector<std::size_t>& batch, nn::Matrix* q_out = nullptr);
  /// Regression targets y for every agent of the batch.
  std::vector<double> critic_targets(const CriticPair& pair, const std::vector<std::size_t>& batch) const;
  /// Reward of agent `agent` of record `index` for the given critic kind.
  double reward_for(RewardKind kind, std::size_t index, std::size_t agent) const;

  CriticPair* mutable_local_critics() { return local_.get(); }
  CriticPair* mutable_global_critics() { return global_.get(); }
  nn::ActorNet& mutable_actor() { return actor_; }

  /// Full training state. Only valid between episodes.
  nn::Checkpoint checkpoint(bool include_replay = true) const;
  void restore(const nn::Checkpoint& ckpt);

  /// Parameters of the actor alone, for evaluation.
  static void store_actor(nn::Checkpoint& ckpt, const nn::ActorNet& actor);
  static nn::ActorNet load_actor(const nn::Checkpoint& ckpt);

 private:
  std::unique_ptr<CriticPair> make_pair(RewardKind kind, std::uint64_t seed) const;
  void gradient_step(StepMetrics& m);
  ObservationBatch batch_of(const std::vector<std::size_t>& idx, bool next) const;

  TrainingConfig cfg_;
  EpisodeConfig instance_;
  StreamProvider streams_;
  std::vector<RequestStream> validation_;
  FeatureDims dims_;

  nn::ActorNet actor_;
  nn::ActorNet target_actor_;
  nn::Adam actor_opt_;
  std::unique_ptr<CriticPair> local_;
  std::unique_ptr<CriticPair> global_;
  ReplayBuffer buffer_;
  std::mt19937_64 rng_;

  std::int64_t steps_ = 0;
  std::uint64_t episode_ = 0;
  std::optional<SimState> state_;
  RequestStream stream_;
  double episode_return_ = 0.0;
};

}  // namespace amod
