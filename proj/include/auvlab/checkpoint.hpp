#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "auvlab/rng.hpp"

namespace auvlab {

static_assert(std::endian::native == std::endian::little,
              "checkpoint files are little-endian; big-endian hosts need "
              "byte swaps before this can work");

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Everything needed to resume or evaluate a training run: both network
/// parameter vectors, both Adam states, the sampling and shuffle RNG
/// states, and the progress counters.  Layer size lists make the file
/// self-describing so a mismatched load fails loudly.
struct Checkpoint {
  std::vector<std::uint32_t> actor_layers;
  std::vector<std::uint32_t> critic_layers;
  std::uint32_t n_agents = 0;
  std::uint32_t action_dim = 0;
  std::uint64_t env_steps = 0;
  std::uint64_t updates = 0;
  std::uint64_t episode_index = 0;
  std::uint8_t has_best = 0;
  double best_return = 0.0;
  Eigen::VectorXd actor_params;
  Eigen::VectorXd critic_params;
  Eigen::VectorXd actor_m, actor_v;
  std::uint64_t actor_t = 0;
  Eigen::VectorXd critic_m, critic_v;
  std::uint64_t critic_t = 0;
  Rng::State sample_rng{};
  Rng::State update_rng{};
};

namespace detail {

constexpr char kCheckpointMagic[8] = {'A', 'U', 'V', 'L', 'A', 'B', 'C', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;

inline void write_bytes(std::ostream& out, const void* p, size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void write_u32(std::ostream& out, std::uint32_t x) {
  write_bytes(out, &x, sizeof(x));
}

inline void write_u64(std::ostream& out, std::uint64_t x) {
  write_bytes(out, &x, sizeof(x));
}

inline void write_vector(std::ostream& out, const Eigen::VectorXd& v) {
  write_u64(out, static_cast<std::uint64_t>(v.size()));
  write_bytes(out, v.data(), sizeof(double) * v.size());
}

inline void read_bytes(std::istream& in, void* p, size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(in.gcount()) != n) {
    throw CheckpointError("checkpoint file is truncated");
  }
}

inline std::uint32_t read_u32(std::istream& in) {
  std::uint32_t x = 0;
  read_bytes(in, &x, sizeof(x));
  return x;
}

inline std::uint64_t read_u64(std::istream& in) {
  std::uint64_t x = 0;
  read_bytes(in, &x, sizeof(x));
  return x;
}

inline Eigen::VectorXd read_vector(std::istream& in) {
  const std::uint64_t n = read_u64(in);
  if (n > (1ull << 32)) {
    throw CheckpointError("checkpoint vector length is implausible");
  }
  Eigen::VectorXd v(static_cast<long>(n));
  read_bytes(in, v.data(), sizeof(double) * n);
  return v;
}

inline void write_layers(std::ostream& out,
                         const std::vector<std::uint32_t>& layers) {
  write_u32(out, static_cast<std::uint32_t>(layers.size()));
  for (std::uint32_t l : layers) write_u32(out, l);
}

inline std::vector<std::uint32_t> read_layers(std::istream& in) {
  const std::uint32_t n = read_u32(in);
  if (n > 64) throw CheckpointError("checkpoint layer count is implausible");
  std::vector<std::uint32_t> layers(n);
  for (auto& l : layers) l = read_u32(in);
  return layers;
}

inline void write_rng(std::ostream& out, const Rng::State& s) {
  for (std::uint64_t word : s) write_u64(out, word);
}

inline Rng::State read_rng(std::istream& in) {
  Rng::State s{};
  for (auto& word : s) word = read_u64(in);
  return s;
}

}  // namespace detail

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);
  detail::write_bytes(out, detail::kCheckpointMagic,
                      sizeof(detail::kCheckpointMagic));
  detail::write_u32(out, detail::kCheckpointVersion);
  detail::write_layers(out, ck.actor_layers);
  detail::write_layers(out, ck.critic_layers);
  detail::write_u32(out, ck.n_agents);
  detail::write_u32(out, ck.action_dim);
  detail::write_u64(out, ck.env_steps);
  detail::write_u64(out, ck.updates);
  detail::write_u64(out, ck.episode_index);
  detail::write_u32(out, ck.has_best);
  detail::write_bytes(out, &ck.best_return, sizeof(double));
  detail::write_vector(out, ck.actor_params);
  detail::write_vector(out, ck.critic_params);
  detail::write_vector(out, ck.actor_m);
  detail::write_vector(out, ck.actor_v);
  detail::write_u64(out, ck.actor_t);
  detail::write_vector(out, ck.critic_m);
  detail::write_vector(out, ck.critic_v);
  detail::write_u64(out, ck.critic_t);
  detail::write_rng(out, ck.sample_rng);
  detail::write_rng(out, ck.update_rng);
  if (!out) throw CheckpointError("write failed for checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[8];
  detail::read_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, detail::kCheckpointMagic, sizeof(magic)) != 0) {
    throw CheckpointError("not a checkpoint file: " + path);
  }
  const std::uint32_t version = detail::read_u32(in);
  if (version != detail::kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version " +
                          std::to_string(version));
  }
  Checkpoint ck;
  ck.actor_layers = detail::read_layers(in);
  ck.critic_layers = detail::read_layers(in);
  ck.n_agents = detail::read_u32(in);
  ck.action_dim = detail::read_u32(in);
  ck.env_steps = detail::read_u64(in);
  ck.updates = detail::read_u64(in);
  ck.episode_index = detail::read_u64(in);
  ck.has_best = static_cast<std::uint8_t>(detail::read_u32(in));
  detail::read_bytes(in, &ck.best_return, sizeof(double));
  ck.actor_params = detail::read_vector(in);
  ck.critic_params = detail::read_vector(in);
  ck.actor_m = detail::read_vector(in);
  ck.actor_v = detail::read_vector(in);
  ck.actor_t = detail::read_u64(in);
  ck.critic_m = detail::read_vector(in);
  ck.critic_v = detail::read_vector(in);
  ck.critic_t = detail::read_u64(in);
  ck.sample_rng = detail::read_rng(in);
  ck.update_rng = detail::read_rng(in);

  if (ck.actor_m.size() != ck.actor_params.size() ||
      ck.actor_v.size() != ck.actor_params.size() ||
      ck.critic_m.size() != ck.critic_params.size() ||
      ck.critic_v.size() != ck.critic_params.size()) {
    throw CheckpointError("checkpoint optimizer state does not match its "
                          "parameter vectors");
  }
  if (!ck.actor_params.allFinite() || !ck.critic_params.allFinite()) {
    throw CheckpointError("checkpoint holds non-finite parameters");
  }
  return ck;
}

}  // namespace auvlab
