#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "amod/nn/autodiff.hpp"
#include "amod/nn/optim.hpp"

namespace amod::nn {

/// Everything a training run needs to resume: named tensor groups,
/// opaque text blobs (RNG engines, config echo), counters and scalars.
///
/// On disk: "AMODCKPT", a u32 version, then each map as a count followed by
/// length-prefixed keys and raw little-endian payloads. Doubles are stored
/// as their bit patterns, so a save/load cycle is exact.
struct Checkpoint {
  std::map<std::string, std::vector<Matrix>> tensors;
  std::map<std::string, std::string> blobs;
  std::map<std::string, std::int64_t> counters;
  std::map<std::string, double> scalars;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Writes to a sibling temp file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

void store_params(Checkpoint& ckpt, const std::string& key, const ParameterSet& params);
/// Throws CheckpointError when the stored shapes differ from `params`.
void restore_params(const Checkpoint& ckpt, const std::string& key, ParameterSet& params);

void store_optimizer(Checkpoint& ckpt, const std::string& key, const Adam& opt);
void restore_optimizer(const Checkpoint& ckpt, const std::string& key, Adam& opt);

template <typename Engine>
void store_rng(Checkpoint& ckpt, const std::string& key, const Engine& rng) {
  std::ostringstream os;
  os << rng;
  ckpt.blobs[key] = os.str();
}

template <typename Engine>
void restore_rng(const Checkpoint& ckpt, const std::string& key, Engine& rng) {
  const auto it = ckpt.blobs.find(key);
  if (it == ckpt.blobs.end()) throw CheckpointError("checkpoint has no rng '" + key + "'");
  std::istringstream is(it->second);
  is >> rng;
  if (!is) throw CheckpointError("corrupt rng state '" + key + "'");
}

}  // namespace amod::nn
