#pragma once

// Polar code specification: frozen/information sets and the Kronecker-power
// encoder. Kernel order is bit-natural (no bit-reversal permutation); the SC
// decoder in sc.hpp indexes the same way, which the round-trip tests pin
// down. Frozen sets come from a companion file when available, otherwise
// from Bhattacharyya-parameter ranking at a design Eb/N0.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "transcoder/channel.hpp"
#include "transcoder/gf2.hpp"

namespace transcoder {

struct PolarCodeSpec {
    std::size_t block_length = 0;        // N = 2^t
    std::vector<std::size_t> frozen;     // sorted, size N-k
    std::vector<std::size_t> info;       // sorted complement, size k
    std::vector<bool> is_frozen;         // length N

    std::size_t n() const { return block_length; }
    std::size_t k() const { return info.size(); }

    static PolarCodeSpec from_frozen(std::size_t n, std::vector<std::size_t> frozen_set) {
        if (n == 0 || (n & (n - 1)) != 0)
            throw std::invalid_argument("polar: block length must be a power of two");
        PolarCodeSpec s;
        s.block_length = n;
        std::sort(frozen_set.begin(), frozen_set.end());
        s.is_frozen.assign(n, false);
        for (auto i : frozen_set) {
            if (i >= n) throw std::invalid_argument("polar: frozen index out of range");
            if (s.is_frozen[i]) throw std::invalid_argument("polar: duplicate frozen index");
            s.is_frozen[i] = true;
        }
        s.frozen = std::move(frozen_set);
        for (std::size_t i = 0; i < n; ++i)
            if (!s.is_frozen[i]) s.info.push_back(i);
        if (s.info.empty() || s.frozen.empty())
            throw std::invalid_argument("polar: need both frozen and information positions");
        return s;
    }
};

// Bhattacharyya parameters of the synthetic channels, bit-natural order.
// Each doubling refines every channel into its degraded (even index) and
// upgraded (odd index) child, so the most significant index bit corresponds
// to the outermost polarization stage, matching the SC recursion. Initial
// value exp(-1/(2 sigma^2)) for unit-energy BPSK on AWGN.
inline std::vector<double> polar_bhattacharyya(std::size_t n, double sigma) {
    std::vector<double> z{std::exp(-1.0 / (2.0 * sigma * sigma))};
    while (z.size() < n) {
        std::vector<double> next(z.size() * 2);
        for (std::size_t i = 0; i < z.size(); ++i) {
            next[2 * i] = 2.0 * z[i] - z[i] * z[i];
            next[2 * i + 1] = z[i] * z[i];
        }
        z = std::move(next);
    }
    return z;
}

inline PolarCodeSpec polar_construct(std::size_t n, std::size_t k, double design_ebn0_db) {
    if (k == 0 || k >= n) throw std::invalid_argument("polar: dimension out of range");
    const double sigma = sigma_from_ebn0(design_ebn0_db, static_cast<double>(k) / n);
    const auto z = polar_bhattacharyya(n, sigma);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // info set = k most reliable channels; ties resolved toward lower index
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });
    std::vector<std::size_t> frozen(order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
    return PolarCodeSpec::from_frozen(n, std::move(frozen));
}

// Frozen-set file: one 0-based integer index per line.
inline PolarCodeSpec polar_load_frozen(std::size_t n, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("polar: cannot open frozen-set file " + path);
    std::vector<std::size_t> frozen;
    long v;
    while (in >> v) {
        if (v < 0) throw std::runtime_error("polar: negative index in " + path);
        frozen.push_back(static_cast<std::size_t>(v));
    }
    if (!in.eof()) throw std::runtime_error("polar: non-integer token in " + path);
    return PolarCodeSpec::from_frozen(n, std::move(frozen));
}

inline void polar_save_frozen(const PolarCodeSpec& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("polar: cannot write " + path);
    for (auto i : spec.frozen) out << i << "\n";
}

// u -> u F^{(x)t} with F = [[1,0],[1,1]], in place over ints (mod 2)
inline void polar_transform(std::vector<int>& u) {
    const std::size_t n = u.size();
    for (std::size_t half = 1; half < n; half <<= 1)
        for (std::size_t base = 0; base < n; base += 2 * half)
            for (std::size_t i = 0; i < half; ++i)
                u[base + i] ^= u[base + half + i];
}

inline std::vector<int> polar_encode(const PolarCodeSpec& spec, const std::vector<int>& b) {
    if (b.size() != spec.k()) throw std::invalid_argument("polar_encode: message length mismatch");
    std::vector<int> u(spec.n(), 0);
    for (std::size_t j = 0; j < spec.info.size(); ++j) u[spec.info[j]] = b[j] & 1;
    polar_transform(u);
    return u;
}

// Generator matrix view (rows of F^{(x)t} at information positions); used for
// codeinfo / histogram tooling on polar codes.
inline BitMatrix polar_generator(const PolarCodeSpec& spec) {
    BitMatrix g(spec.k(), spec.n());
    for (std::size_t j = 0; j < spec.k(); ++j) {
        std::vector<int> b(spec.k(), 0);
        b[j] = 1;
        auto c = polar_encode(spec, b);
        for (std::size_t i = 0; i < c.size(); ++i)
            if (c[i]) g.set(j, i, true);
    }
    return g;
}

// Parity-check matrix as a nullspace basis of the generator.
inline BitMatrix polar_parity(const PolarCodeSpec& spec) {
    BitMatrix g = polar_generator(spec);
    BitMatrix work = g;
    const auto pivots = work.rref();
    const std::size_t n = spec.n(), k = spec.k();
    std::vector<bool> is_pivot(n, false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<std::size_t> free_cols;
    for (std::size_t c = 0; c < n; ++c)
        if (!is_pivot[c]) free_cols.push_back(c);
    BitMatrix h(n - k, n);
    for (std::size_t j = 0; j < free_cols.size(); ++j) {
        h.set(j, free_cols[j], true);
        for (std::size_t r = 0; r < pivots.size(); ++r)
            if (work.get(r, free_cols[j])) h.set(j, pivots[r], true);
    }
    return h;
}

}  // namespace transcoder
