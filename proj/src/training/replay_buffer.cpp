#include "amod/training/replay_buffer.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace amod {

int StepRecord::nonzero_rewards() const {
  return static_cast<int>(std::count_if(local_rewards.begin(), local_rewards.end(),
                                        [](double r) { return r != 0.0; }));
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay buffer capacity must be positive");
}

void ReplayBuffer::push(StepRecord record) {
  if (record.features.agent_count() == 0) return;
  const std::size_t n = record.features.agent_count();
  if (record.actions.size() != n || record.matched.size() != n || record.local_rewards.size() != n)
    throw std::invalid_argument("step record: per-agent vectors must match the agent count");
  if (!records_.empty()) {
    StepRecord& prev = records_.back();
    if (!prev.resolved() && prev.episode == record.episode) {
      if (record.step <= prev.step) throw std::invalid_argument("step record: steps must increase");
      prev.next_gap = record.step - prev.step;
    } else if (!prev.resolved()) {
      prev.terminal = true;
    }
  }
  if (records_.size() == capacity_) {
    nonzero_sum_ -= records_.front().nonzero_rewards();
    records_.pop_front();
  }
  nonzero_sum_ += record.nonzero_rewards();
  records_.push_back(std::move(record));
}

void ReplayBuffer::end_episode(std::uint64_t episode) {
  if (!records_.empty() && records_.back().episode == episode && !records_.back().resolved())
    records_.back().terminal = true;
}

std::size_t ReplayBuffer::sampleable() const {
  if (records_.empty()) return 0;
  return records_.back().resolved() ? records_.size() : records_.size() - 1;
}

double ReplayBuffer::mean_nonzero_rewards() const {
  if (records_.empty()) return 1.0;
  return std::max(1.0, static_cast<double>(nonzero_sum_) / static_cast<double>(records_.size()));
}

double ReplayBuffer::normalized_global_reward(double step_profit) const {
  return amod::normalized_global_reward(step_profit, mean_nonzero_rewards());
}

double normalized_global_reward(double step_profit, double mean_nonzero) {
  return step_profit / std::max(1.0, mean_nonzero);
}

std::vector<std::size_t> ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  const std::size_t k = sampleable();
  if (k == 0) throw std::logic_error("replay buffer has no complete transitions");
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::vector<std::size_t> out(n);
  for (auto& i : out) i = pick(rng);
  return out;
}

namespace {

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>(v >> (8 * i)));
}
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
void put_matrix(std::string& out, const nn::Matrix& m) {
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.size(); ++i) put_f64(out, m.data()[i]);
}

class Cursor {
 public:
  explicit Cursor(const std::string& s) : s_(s) {}
  std::uint64_t u64() {
    if (at_ + 8 > s_.size()) throw std::runtime_error("truncated replay image");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s_[at_ + i])) << (8 * i);
    at_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  nn::Matrix matrix() {
    const auto rows = static_cast<Eigen::Index>(u64());
    const auto cols = static_cast<Eigen::Index>(u64());
    if (rows * cols > (1LL << 26)) throw std::runtime_error("corrupt replay image");
    nn::Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
    return m;
  }
  bool done() const { return at_ == s_.size(); }

 private:
  const std::string& s_;
  std::size_t at_ = 0;
};

}  // namespace

std::string ReplayBuffer::serialize() const {
  std::string out;
  put_u64(out, capacity_);
  put_u64(out, records_.size());
  for (const StepRecord& r : records_) {
    put_matrix(out, r.features.own);
    put_matrix(out, r.features.requests);
    put_matrix(out, r.features.vehicles);
    for (int row : r.features.agent_request_row) put_u64(out, static_cast<std::uint64_t>(row));
    for (int v : r.features.agent_vehicle) put_u64(out, static_cast<std::uint64_t>(v));
    for (int a : r.actions) put_u64(out, static_cast<std::uint64_t>(a));
    for (bool m : r.matched) put_u64(out, m ? 1 : 0);
    for (double x : r.local_rewards) put_f64(out, x);
    put_f64(out, r.step_profit);
    put_u64(out, static_cast<std::uint64_t>(r.step));
    put_u64(out, r.episode);
    put_u64(out, r.terminal ? 1 : 0);
    put_u64(out, static_cast<std::uint64_t>(r.next_gap));
  }
  return out;
}

ReplayBuffer ReplayBuffer::deserialize(const std::string& bytes) {
  Cursor c(bytes);
  ReplayBuffer buf(c.u64());
  const std::uint64_t n = c.u64();
  for (std::uint64_t k = 0; k < n; ++k) {
    StepRecord r;
    r.features.own = c.matrix();
    r.features.requests = c.matrix();
    r.features.vehicles = c.matrix();
    const auto agents = static_cast<std::size_t>(r.features.own.rows());
    for (std::size_t i = 0; i < agents; ++i) r.features.agent_request_row.push_back(static_cast<int>(c.u64()));
    for (std::size_t i = 0; i < agents; ++i) r.features.agent_vehicle.push_back(static_cast<int>(c.u64()));
    for (std::size_t i = 0; i < agents; ++i) r.actions.push_back(static_cast<int>(c.u64()));
    for (std::size_t i = 0; i < agents; ++i) r.matched.push_back(c.u64() != 0);
    for (std::size_t i = 0; i < agents; ++i) r.local_rewards.push_back(c.f64());
    r.step_profit = c.f64();
    r.step = static_cast<int>(c.u64());
    r.episode = c.u64();
    r.terminal = c.u64() != 0;
    r.next_gap = static_cast<int>(c.u64());
    buf.nonzero_sum_ += r.nonzero_rewards();
    buf.records_.push_back(std::move(r));
  }
  if (!c.done()) throw std::runtime_error("trailing bytes in replay image");
  return buf;
}

}  // namespace amod
