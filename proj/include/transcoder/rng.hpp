#pragma once

// Counter-based random stream ("splitmix64ctr"): every draw is a hash of
// (seed, stream, block, counter), so frame-level workers can be seeded
// independently and results do not depend on worker count or scheduling.
// The generator name is recorded in result metadata.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace transcoder {

inline constexpr const char* kRngName = "splitmix64ctr";

class CounterRng {
  public:
    // stream separates independent purposes (noise, messages, snr, ...),
    // block is typically the frame index.
    explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0, std::uint64_t block = 0)
        : key_(mix(mix(seed + 0x9E3779B97F4A7C15ull * (stream + 1)) + 0xD1B54A32D192ED03ull * (block + 1))) {}

    std::uint64_t next_u64() { return mix(key_ + 0x9E3779B97F4A7C15ull * (++ctr_)); }

    bool next_bit() { return next_u64() >> 63; }

    // [0, 1)
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - next_double();  // (0, 1]
        const double u2 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

  private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stream ids used across the project so independent draws never collide.
namespace rng_stream {
inline constexpr std::uint64_t kMessage = 1;
inline constexpr std::uint64_t kNoise = 2;
inline constexpr std::uint64_t kSnr = 3;
inline constexpr std::uint64_t kInit = 4;
inline constexpr std::uint64_t kCalibration = 5;
inline constexpr std::uint64_t kPairs = 6;
}  // namespace rng_stream

}  // namespace transcoder
