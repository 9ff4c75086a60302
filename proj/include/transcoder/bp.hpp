#pragma once

// Flooding-schedule belief propagation on a Tanner graph. Soft-in/soft-out:
// input is the channel LLR vector, output the full posterior per bit.
// Sum-product check update 2*atanh(prod tanh(m/2)) with the inputs clamped
// to +-L_max and the atanh argument clamped to +-(1-1e-12); min-sum variant
// uses sign*min. Leave-one-out products run as forward/backward partials per
// check, so one iteration costs O(E).

#include <cmath>
#include <stdexcept>
#include <vector>

#include "transcoder/channel.hpp"
#include "transcoder/linear_code.hpp"

namespace transcoder {

enum class BpVariant { SumProduct, MinSum };

struct BpConfig {
    std::size_t iterations = 20;
    BpVariant variant = BpVariant::SumProduct;
    bool early_stop = false;  // stop when the posterior hard decision has zero syndrome
};

struct SoftEstimate {
    std::vector<double> values;  // LLR domain, log P(0)/P(1), clamped to +-L_max
};

inline std::vector<int> hard_decision(const std::vector<double>& x) {
    std::vector<int> c(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) c[i] = x[i] < 0.0 ? 1 : 0;  // sign(0) -> bit 0
    return c;
}

inline std::vector<int> hard_decision(const SoftEstimate& x) { return hard_decision(x.values); }

inline constexpr double kAtanhGuard = 1.0 - 1e-12;

namespace detail {

inline bool syndrome_is_zero(const TannerGraph& g, const std::vector<int>& c) {
    for (std::size_t chk = 0; chk < g.n_check; ++chk) {
        int parity = 0;
        for (auto e : g.check_edges[chk]) parity ^= c[g.edge_var[e]];
        if (parity) return false;
    }
    return true;
}

}  // namespace detail

// Returns the posterior; when `trace` is given, the posterior after every
// iteration is appended (the iterations actually run, so early stop
// truncates the trace).
inline SoftEstimate bp_decode(const TannerGraph& g, const LlrVector& llr, const BpConfig& cfg,
                              std::vector<std::vector<double>>* trace = nullptr) {
    if (llr.values.size() != g.n_var) throw std::invalid_argument("bp_decode: LLR length mismatch");
    if (cfg.iterations < 1) throw std::invalid_argument("bp_decode: iterations must be >= 1");

    std::vector<double> v2c(g.n_edges), c2v(g.n_edges, 0.0);
    for (std::size_t e = 0; e < g.n_edges; ++e) v2c[e] = llr.values[g.edge_var[e]];

    std::vector<double> posterior(g.n_var, 0.0);
    std::vector<double> fwd, bwd;

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        // check update
        for (std::size_t chk = 0; chk < g.n_check; ++chk) {
            const auto& edges = g.check_edges[chk];
            const std::size_t w = edges.size();
            fwd.resize(w);
            bwd.resize(w);
            if (cfg.variant == BpVariant::SumProduct) {
                auto t = [&](std::size_t j) { return std::tanh(0.5 * clamp_llr(v2c[edges[j]])); };
                fwd[0] = t(0);
                bwd[w - 1] = t(w - 1);
                for (std::size_t j = 1; j < w; ++j) {
                    fwd[j] = fwd[j - 1] * t(j);
                    bwd[w - 1 - j] = bwd[w - j] * t(w - 1 - j);
                }
                for (std::size_t j = 0; j < w; ++j) {
                    double prod = 1.0;
                    if (j > 0) prod *= fwd[j - 1];
                    if (j + 1 < w) prod *= bwd[j + 1];
                    if (prod > kAtanhGuard) prod = kAtanhGuard;
                    if (prod < -kAtanhGuard) prod = -kAtanhGuard;
                    c2v[edges[j]] = 2.0 * std::atanh(prod);
                }
            } else {
                // sign * min over the other edges, via forward/backward pairs
                // encoded as (sign, magnitude)
                auto sm = [&](std::size_t j) {
                    const double m = clamp_llr(v2c[edges[j]]);
                    return std::pair<double, double>(m < 0.0 ? -1.0 : 1.0, std::fabs(m));
                };
                std::vector<std::pair<double, double>> f(w), bvec(w);
                f[0] = sm(0);
                bvec[w - 1] = sm(w - 1);
                for (std::size_t j = 1; j < w; ++j) {
                    auto a = f[j - 1], x = sm(j);
                    f[j] = {a.first * x.first, std::min(a.second, x.second)};
                    auto c = bvec[w - j], y = sm(w - 1 - j);
                    bvec[w - 1 - j] = {c.first * y.first, std::min(c.second, y.second)};
                }
                for (std::size_t j = 0; j < w; ++j) {
                    double sgn = 1.0, mag = kLlrMax;
                    if (j > 0) {
                        sgn *= f[j - 1].first;
                        mag = std::min(mag, f[j - 1].second);
                    }
                    if (j + 1 < w) {
                        sgn *= bvec[j + 1].first;
                        mag = std::min(mag, bvec[j + 1].second);
                    }
                    c2v[edges[j]] = sgn * mag;
                }
            }
        }

        // variable update and posterior
        for (std::size_t v = 0; v < g.n_var; ++v) {
            double total = llr.values[v];
            for (auto e : g.var_edges[v]) total += c2v[e];
            posterior[v] = clamp_llr(total);
            for (auto e : g.var_edges[v]) v2c[e] = total - c2v[e];
        }

        if (trace) trace->push_back(posterior);
        if (cfg.early_stop && detail::syndrome_is_zero(g, hard_decision(posterior))) break;
    }

    return SoftEstimate{std::move(posterior)};
}

}  // namespace transcoder
