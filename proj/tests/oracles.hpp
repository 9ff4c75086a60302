#pragma once

// Test-only oracles: brute-force bitwise MAP over an explicit codeword list,
// brute-force ML decoding, and a central finite-difference gradient checker.
// These stay independent of the decoder/autodiff implementation paths they
// are used to verify.

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracles {

// Bitwise MAP LLRs log P(c_i=0|y)/P(c_i=1|y) by enumerating the codebook.
inline std::vector<double> map_bitwise_llr(const std::vector<std::vector<int>>& codewords,
                                           const std::vector<double>& y, double sigma) {
    const std::size_t n = y.size();
    std::vector<double> num(n, 0.0), den(n, 0.0);
    for (const auto& c : codewords) {
        double metric = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = c[i] ? 1.0 : -1.0;
            metric += (y[i] - s) * (y[i] - s);
        }
        const double w = std::exp(-metric / (2.0 * sigma * sigma));
        for (std::size_t i = 0; i < n; ++i) (c[i] ? den[i] : num[i]) += w;
    }
    std::vector<double> llr(n);
    for (std::size_t i = 0; i < n; ++i) llr[i] = std::log(num[i] / den[i]);
    return llr;
}

// ML codeword by correlation (equivalently minimum Euclidean distance).
inline std::size_t ml_codeword_index(const std::vector<std::vector<int>>& codewords,
                                     const std::vector<double>& y) {
    std::size_t best = 0;
    double best_corr = -1e300;
    for (std::size_t idx = 0; idx < codewords.size(); ++idx) {
        double corr = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            corr += y[i] * (codewords[idx][i] ? 1.0 : -1.0);
        if (corr > best_corr) {
            best_corr = corr;
            best = idx;
        }
    }
    return best;
}

// Central finite differences of f at x, step eps per coordinate.
inline std::vector<double> finite_difference(const std::function<double(const std::vector<double>&)>& f,
                                             std::vector<double> x, double eps = 1e-5) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + eps;
        const double up = f(x);
        x[i] = keep - eps;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2.0 * eps);
    }
    return g;
}

inline bool close_rel(double a, double b, double rtol, double atol = 1e-8) {
    return std::fabs(a - b) <= atol + rtol * std::max(std::fabs(a), std::fabs(b));
}

}  // namespace oracles
