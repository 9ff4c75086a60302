#pragma once

// Pairwise-distance histogram between mapped codewords. Distances are
// Euclidean, normalized by 2*sqrt(n) (the maximum BPSK distance), so plain
// BPSK puts every pair exactly at sqrt(w/n) for Hamming distance w. Ordered
// pairs of distinct messages are enumerated exhaustively when their count
// fits the requested budget, otherwise sampled uniformly.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "transcoder/linear_code.hpp"
#include "transcoder/rng.hpp"

namespace transcoder {

struct DistanceHistogram {
    std::size_t bins = 0;
    double lo = 0.0, hi = 1.0;
    std::vector<std::uint64_t> counts;
    std::vector<double> distances;  // raw normalized distances, one per pair
    std::uint64_t pairs = 0;
    bool exhaustive = false;
};

using SymbolMapper = std::function<std::vector<double>(const BitVector& codeword)>;

inline SymbolMapper bpsk_mapper() {
    return [](const BitVector& c) {
        std::vector<double> s(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) s[i] = c.get(i) ? 1.0 : -1.0;
        return s;
    };
}

inline DistanceHistogram distance_histogram(const LinearCode& code, const SymbolMapper& mapper,
                                            std::uint64_t pair_budget, std::size_t bins,
                                            std::uint64_t seed = 0) {
    if (code.k() >= 63) throw std::invalid_argument("distance_histogram: k too large");
    const std::uint64_t messages = std::uint64_t(1) << code.k();
    if (messages < 2) throw std::invalid_argument("distance_histogram: fewer than 2 codewords");
    const double norm = 2.0 * std::sqrt(static_cast<double>(code.n()));

    DistanceHistogram h;
    h.bins = bins;
    h.counts.assign(bins, 0);
    const bool exhaustive_pairs =
        messages <= 65536 && messages * (messages - 1) <= pair_budget;
    h.exhaustive = exhaustive_pairs;
    h.pairs = exhaustive_pairs ? messages * (messages - 1) : pair_budget;
    h.distances.reserve(h.pairs);

    auto message = [&](std::uint64_t i) {
        BitVector b(code.k());
        for (std::size_t j = 0; j < code.k(); ++j) b.set(j, (i >> j) & 1u);
        return b;
    };
    auto record = [&](std::uint64_t a, std::uint64_t b) {
        const auto sa = mapper(code.encode(message(a)));
        const auto sb = mapper(code.encode(message(b)));
        double d2 = 0.0;
        for (std::size_t i = 0; i < sa.size(); ++i) d2 += (sa[i] - sb[i]) * (sa[i] - sb[i]);
        const double d = std::sqrt(d2) / norm;
        h.distances.push_back(d);
        std::size_t bin = static_cast<std::size_t>(d / (h.hi - h.lo) * bins);
        if (bin >= bins) bin = bins - 1;
        ++h.counts[bin];
    };

    if (exhaustive_pairs) {
        for (std::uint64_t a = 0; a < messages; ++a)
            for (std::uint64_t b = 0; b < messages; ++b)
                if (a != b) record(a, b);
    } else {
        for (std::uint64_t p = 0; p < pair_budget; ++p) {
            CounterRng rng(seed, rng_stream::kPairs, p);
            const std::uint64_t a = rng.next_u64() % messages;
            std::uint64_t b = rng.next_u64() % messages;
            while (b == a) b = rng.next_u64() % messages;
            record(a, b);
        }
    }
    return h;
}

}  // namespace transcoder
