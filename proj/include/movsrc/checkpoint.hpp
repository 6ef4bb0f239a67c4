#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "movsrc/inference.hpp"

namespace movsrc {

/**
 * Binary chain checkpoint, little-endian:
 *
 *   "MOVSRCCK"  u32 version
 *   u64 seed  f64 delta  f64 beta  u64 burn_in  u64 thinning  u64 target
 *   u64 dim
 *   u64 n  f64[n] log-likelihood trace
 *   u64 n  u8[n] acceptance flags
 *   u64 n_probes  u64 len  f64[n_probes * len]
 *   u64 n  { u64 index  f64[dim] whitened }[n]
 *   f64[dim] current state  f64 current log-likelihood
 *   u64 len  char[len] rng state
 *   u64 FNV-1a hash of everything above
 *
 * Doubles are stored bit-exactly.
 */
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string encode_checkpoint(const ChainRecord& record);
ChainRecord decode_checkpoint(const std::string& bytes);

/// Writes atomically (temporary file, then rename).
void save_checkpoint(const std::filesystem::path& path, const ChainRecord& record);
ChainRecord load_checkpoint(const std::filesystem::path& path);

std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace movsrc
