#pragma once

#include <string>

#include "depthsr/network.hpp"

namespace depthsr {

/// Binary container of named arrays plus the network config.
///
///   magic    8 bytes  "DSRCKPT\0"
///   version  u32      (1)
///   config   u32 length + NetworkConfig::serialize() text
///   count    u32
///   count records:
///     u32 name length, name bytes, u8 element type (1 = float64),
///     u32 ndim, ndim x u64 dims, u64 payload byte length
///   count payloads, in record order, row-major little-endian
///
/// All integers are little-endian. Nothing may follow the last payload.
struct Checkpoint {
  NetworkConfig config;
  Parameters params;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string encode_checkpoint(const Parameters& p, const NetworkConfig& cfg);
/// Throws CorruptCheckpointError for malformed bytes and ValidationError when
/// the arrays do not match the layout of the stored config.
Checkpoint decode_checkpoint(const std::string& bytes);

/// Atomic: writes `path.partial` then renames.
void save_checkpoint(const Parameters& p, const NetworkConfig& cfg, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace depthsr
