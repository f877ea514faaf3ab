#pragma once

#include <array>
#include <cmath>
#include <stdexcept>

namespace vinpaint {

inline constexpr int kTimeChannels = 16;

/// Sinusoidal encoding of t/T: 8 sine + 8 cosine channels at geometrically
/// spaced frequencies pi * 2^k, k = 0..7. Broadcast over all positions when
/// fed to the network; values are bounded in [-1, 1] by construction.
inline std::array<double, kTimeChannels> encode_time(int t, int timesteps) {
  if (t < 1 || t > timesteps) throw std::out_of_range("encode_time: t out of range [1, T]");
  std::array<double, kTimeChannels> enc{};
  const double u = static_cast<double>(t) / timesteps;
  for (int k = 0; k < kTimeChannels / 2; ++k) {
    const double omega = M_PI * static_cast<double>(1 << k);
    enc[2 * k] = std::sin(omega * u);
    enc[2 * k + 1] = std::cos(omega * u);
  }
  return enc;
}

}  // namespace vinpaint
