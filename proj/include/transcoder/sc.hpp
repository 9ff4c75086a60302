#pragma once

// Successive cancellation and SC list decoding for polar codes, bit-natural
// indexing (pairs (i, i+half) at every level, matching polar_transform).
// The fast path uses the min-sum f-update; sign(0) decodes to bit 0. SCL
// keeps the classic |LLR| penalty on sign-violating decisions, so the path
// metric never decreases along a path, and with min-sum updates a full list
// reproduces maximum-likelihood decoding (correlation metric), which the
// tests check against brute force on a tiny code.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "transcoder/bp.hpp"
#include "transcoder/polar.hpp"

namespace transcoder {

namespace polar_ops {

inline double f_minsum(double a, double b) {
    const double s = ((a < 0.0) != (b < 0.0)) ? -1.0 : 1.0;
    return s * std::min(std::fabs(a), std::fabs(b));
}

inline double g_update(double a, double b, int u_left) { return u_left ? b - a : b + a; }

}  // namespace polar_ops

struct ScResult {
    std::vector<int> u_hat;          // all N positions
    std::vector<int> codeword;       // re-encoded decisions
    std::vector<double> info_llrs;   // decision LLRs at the information positions, in info order
    std::vector<int> info_bits() const;
    const PolarCodeSpec* spec = nullptr;
};

inline std::vector<int> ScResult::info_bits() const {
    std::vector<int> b;
    b.reserve(spec->info.size());
    for (auto i : spec->info) b.push_back(u_hat[i]);
    return b;
}

namespace detail {

// Returns the partial-sum bits of the subtree rooted at u_offset.
inline std::vector<int> sc_rec(const PolarCodeSpec& spec, const std::vector<double>& alpha,
                               std::size_t u_offset, ScResult& out) {
    const std::size_t len = alpha.size();
    if (len == 1) {
        int u = 0;
        if (!spec.is_frozen[u_offset]) {
            u = alpha[0] < 0.0 ? 1 : 0;
            out.info_llrs.push_back(alpha[0]);
        }
        out.u_hat[u_offset] = u;
        return {u};
    }
    const std::size_t half = len / 2;
    std::vector<double> a(half);
    for (std::size_t i = 0; i < half; ++i) a[i] = polar_ops::f_minsum(alpha[i], alpha[i + half]);
    std::vector<int> beta_l = sc_rec(spec, a, u_offset, out);
    for (std::size_t i = 0; i < half; ++i) a[i] = polar_ops::g_update(alpha[i], alpha[i + half], beta_l[i]);
    std::vector<int> beta_r = sc_rec(spec, a, u_offset + half, out);
    std::vector<int> beta(len);
    for (std::size_t i = 0; i < half; ++i) {
        beta[i] = beta_l[i] ^ beta_r[i];
        beta[i + half] = beta_r[i];
    }
    return beta;
}

}  // namespace detail

inline ScResult sc_decode(const PolarCodeSpec& spec, const LlrVector& llr) {
    if (llr.values.size() != spec.n()) throw std::invalid_argument("sc_decode: LLR length mismatch");
    ScResult out;
    out.spec = &spec;
    out.u_hat.assign(spec.n(), 0);
    out.info_llrs.reserve(spec.k());
    out.codeword = detail::sc_rec(spec, llr.values, 0, out);
    return out;
}

struct SclConfig {
    std::size_t list_size = 8;
};

struct SclResult {
    std::vector<int> u_hat;
    std::vector<int> codeword;
    double metric = 0.0;
};

namespace detail {

struct SclPath {
    // alpha[l]: LLRs of the current node at level l (size N >> l)
    // beta[l]: partial sums of the most recently completed node at level l
    // beta_left[l]: partial sums of a completed left child, kept for g
    std::vector<std::vector<double>> alpha;
    std::vector<std::vector<int>> beta, beta_left;
    std::vector<int> u;
    double pm = 0.0;
};

}  // namespace detail

inline SclResult scl_decode(const PolarCodeSpec& spec, const LlrVector& llr, const SclConfig& cfg) {
    const std::size_t n = spec.n();
    if (llr.values.size() != n) throw std::invalid_argument("scl_decode: LLR length mismatch");
    if (cfg.list_size < 1) throw std::invalid_argument("scl_decode: list size must be >= 1");
    std::size_t t = 0;
    while ((std::size_t(1) << t) < n) ++t;

    using detail::SclPath;
    std::vector<SclPath> paths(1);
    {
        SclPath& p = paths[0];
        p.alpha.resize(t + 1);
        p.beta.resize(t + 1);
        p.beta_left.resize(t + 1);
        for (std::size_t l = 0; l <= t; ++l) {
            p.alpha[l].assign(n >> l, 0.0);
            p.beta[l].assign(n >> l, 0);
            p.beta_left[l].assign(n >> l, 0);
        }
        p.alpha[0] = llr.values;
        p.u.assign(n, 0);
    }

    struct Candidate {
        std::size_t parent;
        int bit;
        double pm;
    };

    for (std::size_t phi = 0; phi < n; ++phi) {
        // levels whose node changed at this leaf
        std::size_t lam_min = 1;
        if (phi != 0) {
            std::size_t ctz = 0;
            while (((phi >> ctz) & 1u) == 0) ++ctz;
            lam_min = t - ctz;
        }
        for (auto& p : paths) {
            for (std::size_t lam = lam_min; lam <= t; ++lam) {
                const std::size_t s = n >> lam;
                const auto& ap = p.alpha[lam - 1];
                auto& al = p.alpha[lam];
                const bool right = (phi >> (t - lam)) & 1u;
                if (!right)
                    for (std::size_t i = 0; i < s; ++i) al[i] = polar_ops::f_minsum(ap[i], ap[i + s]);
                else
                    for (std::size_t i = 0; i < s; ++i)
                        al[i] = polar_ops::g_update(ap[i], ap[i + s], p.beta_left[lam][i]);
            }
        }

        if (spec.is_frozen[phi]) {
            for (auto& p : paths) {
                const double a = p.alpha[t][0];
                if (a < 0.0) p.pm += -a;
                p.u[phi] = 0;
                p.beta[t][0] = 0;
            }
        } else {
            std::vector<Candidate> cands;
            cands.reserve(paths.size() * 2);
            for (std::size_t pi = 0; pi < paths.size(); ++pi) {
                const double a = paths[pi].alpha[t][0];
                const int hard = a < 0.0 ? 1 : 0;
                cands.push_back({pi, hard, paths[pi].pm});
                cands.push_back({pi, 1 - hard, paths[pi].pm + std::fabs(a)});
            }
            if (cands.size() > cfg.list_size) {
                std::sort(cands.begin(), cands.end(), [](const Candidate& x, const Candidate& y) {
                    if (x.pm != y.pm) return x.pm < y.pm;
                    if (x.parent != y.parent) return x.parent < y.parent;
                    return x.bit < y.bit;
                });
                cands.resize(cfg.list_size);
            }
            std::vector<int> uses(paths.size(), 0);
            for (const auto& c : cands) ++uses[c.parent];
            std::vector<SclPath> next;
            next.reserve(cands.size());
            for (const auto& c : cands) {
                if (--uses[c.parent] > 0)
                    next.push_back(paths[c.parent]);  // copy, parent used again
                else
                    next.push_back(std::move(paths[c.parent]));
                SclPath& p = next.back();
                p.pm = c.pm;
                p.u[phi] = c.bit;
                p.beta[t][0] = c.bit;
            }
            paths = std::move(next);
        }

        // propagate partial sums upward while completing right children
        for (auto& p : paths) {
            std::size_t lam = t, idx = phi;
            while (lam > 0 && (idx & 1u)) {
                const std::size_t s = n >> lam;
                auto& parent = p.beta[lam - 1];
                for (std::size_t i = 0; i < s; ++i) {
                    parent[i] = p.beta_left[lam][i] ^ p.beta[lam][i];
                    parent[i + s] = p.beta[lam][i];
                }
                idx >>= 1;
                --lam;
            }
            if (lam > 0) p.beta_left[lam] = p.beta[lam];
        }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < paths.size(); ++i)
        if (paths[i].pm < paths[best].pm) best = i;
    SclResult out;
    out.u_hat = paths[best].u;
    out.codeword = paths[best].beta[0];
    out.metric = paths[best].pm;
    return out;
}

}  // namespace transcoder
