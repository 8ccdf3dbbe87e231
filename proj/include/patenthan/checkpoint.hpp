#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "patenthan/autodiff.hpp"

namespace patenthan {

// CHAN parameter checkpoint, little-endian:
//   magic "CHAN", version u32 = 1,
//   config: d_e u32, m u32, n_encoders u32, ffn_mult u32, dropout f64,
//   block count u32, then per block:
//     name length u16, name bytes, rows u32, cols u32, rows*cols float32.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointConfig {
  std::uint32_t d_e = 0;
  std::uint32_t m = 0;
  std::uint32_t n_encoders = 0;
  std::uint32_t ffn_mult = 0;
  double dropout = 0.0;

  bool operator==(const CheckpointConfig&) const = default;
};

struct Checkpoint {
  CheckpointConfig config;
  std::vector<Parameter> params;
};

// Values are stored as float32; anything not exactly representable is rounded.
void write_checkpoint(std::ostream& out, const CheckpointConfig& config, std::span<const Parameter* const> params);
Checkpoint read_checkpoint(std::istream& in);

// Writes through a temporary file and renames it into place while holding an
// advisory lock on "<path>.lock".
void save_checkpoint(const std::filesystem::path& path, const CheckpointConfig& config,
                     std::span<const Parameter* const> params);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Rounds every entry to the nearest float32, i.e. what a checkpoint stores.
void round_to_float32(Matrix& m);

}  // namespace patenthan
