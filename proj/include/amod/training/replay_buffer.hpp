#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <string>
#include <vector>

#include "amod/features.hpp"

namespace amod {

/// One decision step with at least one agent. Steps without agents are not
/// stored; the gap to the next stored step of the same episode is kept
/// instead so the bootstrap can be discounted by the elapsed steps.
struct StepRecord {
  StateFeatures features;
  /// Pre-matching action per agent (0 accept, 1 reject).
  std::vector<int> actions;
  /// Whether each agent's pairing survived the matching.
  std::vector<bool> matched;
  std::vector<double> local_rewards;
  double step_profit = 0.0;
  int step = 0;
  std::uint64_t episode = 0;
  /// No later decision in this episode; bootstrap is off.
  bool terminal = false;
  /// Steps until the next stored record of the episode; 0 while unknown.
  int next_gap = 0;

  int nonzero_rewards() const;
  bool resolved() const { return terminal || next_gap > 0; }
};

/// FIFO store of StepRecords. A transition is a record together with its
/// successor, so only resolved records are sampled.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 100000);

  /// Links the previous record of the same episode to this one and evicts
  /// the oldest record when full. Records without agents are ignored.
  void push(StepRecord record);
  /// Marks the last record of `episode` terminal.
  void end_episode(std::uint64_t episode);

  std::size_t size() const { return records_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t sampleable() const;
  const StepRecord& operator[](std::size_t i) const { return records_[i]; }
  /// Successor of a non-terminal resolved record.
  const StepRecord& next_of(std::size_t i) const { return records_[i + 1]; }

  /// Mean over stored records of the count of non-zero local rewards,
  /// floored at 1.
  double mean_nonzero_rewards() const;
  double normalized_global_reward(double step_profit) const;

  /// Uniform draw with replacement over sampleable records.
  std::vector<std::size_t> sample(std::size_t n, std::mt19937_64& rng) const;

  /// Binary image for resumable checkpoints.
  std::string serialize() const;
  static ReplayBuffer deserialize(const std::string& bytes);

 private:
  std::size_t capacity_;
  std::deque<StepRecord> records_;
  std::int64_t nonzero_sum_ = 0;
};

/// step_profit / max(1, mean_nonzero).
double normalized_global_reward(double step_profit, double mean_nonzero);

}  // namespace amod
