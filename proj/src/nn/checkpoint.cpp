#include "amod/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace amod::nn {
namespace {

constexpr char kMagic[8] = {'A', 'M', 'O', 'D', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os_.write(reinterpret_cast<const char*>(b), 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    os_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::uint64_t u64() {
    unsigned char b[8];
    if (!is_.read(reinterpret_cast<char*>(b), 8)) throw CheckpointError("truncated checkpoint");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > (1ULL << 32)) throw CheckpointError("corrupt string length");
    std::string s(n, '\0');
    if (n > 0 && !is_.read(s.data(), static_cast<std::streamsize>(n)))
      throw CheckpointError("truncated checkpoint");
    return s;
  }

 private:
  std::istream& is_;
};

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw CheckpointError("cannot write " + tmp.string());
    os.write(kMagic, sizeof kMagic);
    Writer w(os);
    w.u64(kCheckpointVersion);
    w.u64(ckpt.tensors.size());
    for (const auto& [key, group] : ckpt.tensors) {
      w.str(key);
      w.u64(group.size());
      for (const Matrix& m : group) {
        w.u64(static_cast<std::uint64_t>(m.rows()));
        w.u64(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.size(); ++i) w.f64(m.data()[i]);
      }
    }
    w.u64(ckpt.blobs.size());
    for (const auto& [key, blob] : ckpt.blobs) {
      w.str(key);
      w.str(blob);
    }
    w.u64(ckpt.counters.size());
    for (const auto& [key, v] : ckpt.counters) {
      w.str(key);
      w.u64(static_cast<std::uint64_t>(v));
    }
    w.u64(ckpt.scalars.size());
    for (const auto& [key, v] : ckpt.scalars) {
      w.str(key);
      w.f64(v);
    }
    if (!os.flush()) throw CheckpointError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open checkpoint " + path.string());
  char magic[sizeof kMagic];
  if (!is.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
    throw CheckpointError("not a checkpoint: " + path.string());
  Reader r(is);
  const std::uint64_t version = r.u64();
  if (version != kCheckpointVersion)
    throw CheckpointError("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  for (std::uint64_t n = r.u64(); n > 0; --n) {
    std::string key = r.str();
    std::vector<Matrix> group(r.u64());
    for (Matrix& m : group) {
      const auto rows = static_cast<Eigen::Index>(r.u64());
      const auto cols = static_cast<Eigen::Index>(r.u64());
      if (rows < 0 || cols < 0 || rows * cols > (1LL << 28)) throw CheckpointError("corrupt tensor shape");
      m.resize(rows, cols);
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.f64();
    }
    ckpt.tensors.emplace(std::move(key), std::move(group));
  }
  for (std::uint64_t n = r.u64(); n > 0; --n) {
    std::string key = r.str();
    ckpt.blobs.emplace(std::move(key), r.str());
  }
  for (std::uint64_t n = r.u64(); n > 0; --n) {
    std::string key = r.str();
    ckpt.counters.emplace(std::move(key), static_cast<std::int64_t>(r.u64()));
  }
  for (std::uint64_t n = r.u64(); n > 0; --n) {
    std::string key = r.str();
    ckpt.scalars.emplace(std::move(key), r.f64());
  }
  return ckpt;
}

namespace {

const std::vector<Matrix>& group_of(const Checkpoint& ckpt, const std::string& key) {
  const auto it = ckpt.tensors.find(key);
  if (it == ckpt.tensors.end()) throw CheckpointError("checkpoint has no tensors '" + key + "'");
  return it->second;
}

void copy_checked(const std::vector<Matrix>& from, std::vector<Matrix*> to, const std::string& key) {
  if (from.size() != to.size()) throw CheckpointError("tensor count mismatch for '" + key + "'");
  for (std::size_t i = 0; i < from.size(); ++i) {
    if (from[i].rows() != to[i]->rows() || from[i].cols() != to[i]->cols())
      throw CheckpointError("tensor shape mismatch for '" + key + "'");
  }
  for (std::size_t i = 0; i < from.size(); ++i) *to[i] = from[i];
}

}  // namespace

void store_params(Checkpoint& ckpt, const std::string& key, const ParameterSet& params) {
  auto& group = ckpt.tensors[key];
  group.clear();
  for (const Parameter& p : params) group.push_back(p.value);
}

void restore_params(const Checkpoint& ckpt, const std::string& key, ParameterSet& params) {
  std::vector<Matrix*> to;
  for (Parameter& p : params) to.push_back(&p.value);
  copy_checked(group_of(ckpt, key), std::move(to), key);
}

void store_optimizer(Checkpoint& ckpt, const std::string& key, const Adam& opt) {
  ckpt.tensors[key + ".m"] = opt.first_moments();
  ckpt.tensors[key + ".v"] = opt.second_moments();
  ckpt.counters[key + ".t"] = opt.steps();
}

void restore_optimizer(const Checkpoint& ckpt, const std::string& key, Adam& opt) {
  std::vector<Matrix*> m, v;
  for (Matrix& x : opt.first_moments()) m.push_back(&x);
  for (Matrix& x : opt.second_moments()) v.push_back(&x);
  copy_checked(group_of(ckpt, key + ".m"), std::move(m), key);
  copy_checked(group_of(ckpt, key + ".v"), std::move(v), key);
  const auto it = ckpt.counters.find(key + ".t");
  if (it == ckpt.counters.end()) throw CheckpointError("checkpoint has no step count for '" + key + "'");
  opt.set_steps(it->second);
}

}  // namespace amod::nn
