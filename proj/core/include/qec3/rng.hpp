#pragma once

#include <array>
#include <cstdint>

namespace qec3 {

// Philox4x32-10 counter-based generator. Every draw is addressed by
// (seed, trajectory, step, channel, purpose), so trajectories can be computed
// in any order, on any number of threads, with identical results.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key);

class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint32_t trajectory)
        : seed_(seed), traj_(trajectory) {}

    // Uniform double in the open interval (0, 1).
    double uniform(std::uint64_t step, std::uint16_t channel, std::uint8_t purpose) const;

    // Standard normal via Box-Muller (rejection-free, one draw per address).
    double normal(std::uint64_t step, std::uint16_t channel, std::uint8_t purpose) const;

  private:
    std::uint64_t seed_;
    std::uint32_t traj_;
};

} // namespace qec3
