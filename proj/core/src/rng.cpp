#include "qec3/rng.hpp"

#include <cmath>
#include <numbers>

namespace qec3 {

namespace {

constexpr std::uint32_t kM0 = 0xD2511F53u;
constexpr std::uint32_t kM1 = 0xCD9E8D57u;
constexpr std::uint32_t kW0 = 0x9E3779B9u;
constexpr std::uint32_t kW1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> round_once(const std::array<std::uint32_t, 4>& c,
                                               const std::array<std::uint32_t, 2>& k) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * c[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * c[2];
    return {static_cast<std::uint32_t>(p1 >> 32) ^ c[1] ^ k[0],
            static_cast<std::uint32_t>(p1),
            static_cast<std::uint32_t>(p0 >> 32) ^ c[3] ^ k[1],
            static_cast<std::uint32_t>(p0)};
}

inline double to_unit_open(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t x = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return (static_cast<double>(x >> 11) + 0.5) * 0x1p-53;
}

} // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                           std::array<std::uint32_t, 2> key) {
    ctr = round_once(ctr, key);
    for (int r = 1; r < 10; ++r) {
        key[0] += kW0;
        key[1] += kW1;
        ctr = round_once(ctr, key);
    }
    return ctr;
}

namespace {

inline std::array<std::uint32_t, 4> block_for(std::uint64_t seed, std::uint32_t traj,
                                              std::uint64_t step, std::uint16_t channel,
                                              std::uint8_t purpose) {
    const std::array<std::uint32_t, 4> ctr = {
        static_cast<std::uint32_t>(step),
        static_cast<std::uint32_t>(step >> 32),
        (static_cast<std::uint32_t>(channel) << 8) | purpose,
        traj};
    const std::array<std::uint32_t, 2> key = {static_cast<std::uint32_t>(seed),
                                              static_cast<std::uint32_t>(seed >> 32)};
    return philox4x32_10(ctr, key);
}

} // namespace

double CounterRng::uniform(std::uint64_t step, std::uint16_t channel, std::uint8_t purpose) const {
    const auto b = block_for(seed_, traj_, step, channel, purpose);
    return to_unit_open(b[0], b[1]);
}

double CounterRng::normal(std::uint64_t step, std::uint16_t channel, std::uint8_t purpose) const {
    const auto b = block_for(seed_, traj_, step, channel, purpose);
    const double u1 = to_unit_open(b[0], b[1]);
    const double u2 = to_unit_open(b[2], b[3]);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

} // namespace qec3
