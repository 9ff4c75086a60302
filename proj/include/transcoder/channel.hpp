#pragma once

// BPSK mapping, the AWGN channel, Eb/N0 bookkeeping and channel LLRs.
//
// Conventions used throughout the project:
//   symbols   s = 2c - 1            (bit 0 -> -1, bit 1 -> +1)
//   LLR       l = log P(c=0|y) / P(c=1|y) = -2 y / sigma^2, clamped to +-20
// The paper-facing l = y/(2 sigma^2) expression is not the posterior ratio
// under these two definitions; BP is scale sensitive, so the exact ratio is
// used and oracle-tested against the two-Gaussian computation.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "transcoder/rng.hpp"

namespace transcoder {

inline constexpr double kLlrMax = 20.0;

inline double clamp_llr(double x) {
    if (x > kLlrMax) return kLlrMax;
    if (x < -kLlrMax) return -kLlrMax;
    return x;
}

struct ModulatedFrame {
    std::vector<double> symbols;
};

struct NoisySignal {
    std::vector<double> samples;
    double sigma = 0.0;
};

struct LlrVector {
    std::vector<double> values;
};

inline ModulatedFrame bpsk_map(const std::vector<int>& c) {
    ModulatedFrame f;
    f.symbols.reserve(c.size());
    for (int b : c) f.symbols.push_back(b ? 1.0 : -1.0);
    return f;
}

inline NoisySignal awgn(const ModulatedFrame& s, double sigma, CounterRng& rng) {
    if (!(sigma > 0.0)) throw std::invalid_argument("awgn: sigma must be positive");
    NoisySignal y;
    y.sigma = sigma;
    y.samples.reserve(s.symbols.size());
    for (double v : s.symbols) y.samples.push_back(v + sigma * rng.gaussian());
    return y;
}

// sigma for unit-power real BPSK at rate R and the given Eb/N0 in dB
inline double sigma_from_ebn0(double ebn0_db, double rate) {
    if (!(rate > 0.0 && rate <= 1.0)) throw std::invalid_argument("sigma_from_ebn0: rate outside (0,1]");
    return std::sqrt(1.0 / (2.0 * rate * std::pow(10.0, ebn0_db / 10.0)));
}

inline LlrVector channel_llr(const NoisySignal& y) {
    LlrVector l;
    l.values.reserve(y.samples.size());
    const double scale = -2.0 / (y.sigma * y.sigma);
    for (double v : y.samples) l.values.push_back(clamp_llr(scale * v));
    return l;
}

inline double measure_average_power(const std::vector<ModulatedFrame>& frames) {
    if (frames.empty()) throw std::invalid_argument("measure_average_power: empty batch");
    double acc = 0.0;
    for (const auto& f : frames) {
        double e = 0.0;
        for (double v : f.symbols) e += v * v;
        acc += e / static_cast<double>(f.symbols.size());
    }
    return acc / static_cast<double>(frames.size());
}

// Q(x) = P(N(0,1) > x)
inline double q_function(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

}  // namespace transcoder
