#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <string>

namespace depthsr {

/// 64-bit FNV-1a, used for parameter digests and branch signatures.
class Fnv1a {
 public:
  void mix(std::uint8_t byte) {
    state_ ^= byte;
    state_ *= 0x100000001b3ULL;
  }
  void mix_bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    for (std::size_t i = 0; i < n; ++i) mix(p[i]);
  }
  void mix(double v) { mix_bytes(&v, sizeof v); }
  void mix(std::span<const double> v) { mix_bytes(v.data(), v.size_bytes()); }
  void mix(const std::string& s) { mix_bytes(s.data(), s.size()); }

  std::uint64_t digest() const { return state_; }
  std::string hex() const;

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

inline std::string Fnv1a::hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  std::uint64_t v = state_;
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = kDigits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace depthsr
