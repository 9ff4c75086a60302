#pragma once

// Training-path decoders built on the autodiff tape.
//
// Differentiable BP uses the exact tanh/atanh sum-product updates, batched
// over frames as a [batch, E] message tensor. No +-L_max clamp is applied on
// this path; only the atanh-argument guard remains (hard clip, zero gradient
// outside). Where no clamp binds, the values coincide with the fast-path
// bp_decode to double precision.
//
// Soft SC replaces the min-sum f with the exact smooth sum-product combine
// and propagates soft symbols tanh(L/2) instead of hard partial sums; frozen
// positions stay hard (symbol +1). A plain-double twin of the recursion is
// provided for statistical comparisons at realistic sizes.

#include <cstdint>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include "transcoder/autodiff.hpp"
#include "transcoder/bp.hpp"
#include "transcoder/linear_code.hpp"
#include "transcoder/polar.hpp"

namespace transcoder {

// The double guard 1 - 1e-12 rounds to exactly 1 in float; the float path
// needs a representable bound (caps check messages near 2*atanh(1-1e-6)).
template <typename T>
constexpr double default_atanh_guard() {
    if constexpr (std::is_same_v<T, float>)
        return 1.0 - 1e-6;
    else
        return kAtanhGuard;
}

struct BpSoftOptions {
    std::size_t iterations = 10;
    double atanh_guard = kAtanhGuard;
};

// Posterior LLRs [batch, n] after `iterations` flooding iterations.
template <typename T>
ad::Tensor<T> soft_bp_decode(ad::Tape<T>& tape, const TannerGraph& g, ad::Tensor<T> llr,
                             const BpSoftOptions& opt) {
    const std::size_t n = g.n_var;
    if (llr.shape().size() != 2 || llr.shape()[1] != n)
        throw std::invalid_argument("soft_bp_decode: LLR batch must be [batch, n]");

    // edges are created in (check, col) order, so each check's edges are a
    // contiguous id range
    std::vector<std::size_t> var_of_edge(g.n_edges);
    for (std::size_t e = 0; e < g.n_edges; ++e) var_of_edge[e] = g.edge_var[e];
    std::vector<std::size_t> var_order;  // check-ordered edge ids grouped by variable
    var_order.reserve(g.n_edges);
    for (std::size_t v = 0; v < n; ++v)
        for (auto e : g.var_edges[v]) var_order.push_back(e);

    auto msgs = tape.gather_cols(llr, var_of_edge);  // v2c, [batch, E]
    ad::Tensor<T> posterior = llr;

    for (std::size_t it = 0; it < opt.iterations; ++it) {
        // check update per contiguous block
        std::vector<ad::Tensor<T>> check_blocks;
        check_blocks.reserve(g.n_check);
        for (std::size_t chk = 0; chk < g.n_check; ++chk) {
            const auto& edges = g.check_edges[chk];
            const std::size_t w = edges.size();
            auto mc = tape.slice_cols(msgs, edges.front(), w);
            auto t = tape.tanh(tape.mul_scalar(mc, 0.5));
            std::vector<ad::Tensor<T>> col(w), fwd(w), bwd(w);
            for (std::size_t j = 0; j < w; ++j) col[j] = tape.slice_cols(t, j, 1);
            fwd[0] = col[0];
            for (std::size_t j = 1; j < w; ++j) fwd[j] = tape.mul(fwd[j - 1], col[j]);
            bwd[w - 1] = col[w - 1];
            for (std::size_t j = w - 1; j-- > 0;) bwd[j] = tape.mul(bwd[j + 1], col[j]);
            std::vector<ad::Tensor<T>> outs(w);
            const std::size_t rows = llr.shape()[0];
            for (std::size_t j = 0; j < w; ++j) {
                ad::Tensor<T> prod;
                if (w == 1)
                    prod = tape.constant({rows, 1}, std::vector<T>(rows, T(1)));
                else if (j == 0)
                    prod = bwd[1];
                else if (j == w - 1)
                    prod = fwd[w - 2];
                else
                    prod = tape.mul(fwd[j - 1], bwd[j + 1]);
                auto guarded = tape.clip(prod, -opt.atanh_guard, opt.atanh_guard);
                outs[j] = tape.mul_scalar(tape.atanh(guarded), 2.0);
            }
            check_blocks.push_back(tape.concat_cols(outs));
        }
        auto c2v = tape.concat_cols(check_blocks);  // [batch, E] in check order

        // variable update: per-variable sums via the var-ordered view
        auto c2v_var = tape.gather_cols(c2v, var_order);
        std::vector<ad::Tensor<T>> var_sums;
        var_sums.reserve(n);
        std::size_t off = 0;
        for (std::size_t v = 0; v < n; ++v) {
            const std::size_t w = g.var_edges[v].size();
            var_sums.push_back(tape.sum_axis1(tape.slice_cols(c2v_var, off, w)));
            off += w;
        }
        posterior = tape.add(llr, tape.concat_cols(var_sums));
        msgs = tape.sub(tape.gather_cols(posterior, var_of_edge), c2v);
    }
    return posterior;
}

// ----------------------------------------------------------- soft SC ------

namespace detail {

inline double soft_f(double a, double b, double guard) {
    double p = std::tanh(0.5 * a) * std::tanh(0.5 * b);
    if (p > guard) p = guard;
    if (p < -guard) p = -guard;
    return 2.0 * std::atanh(p);
}

struct SoftScPlainState {
    const PolarCodeSpec* spec;
    std::vector<double> info_llrs;
    double guard;
};

// returns soft symbols (in [-1,1]) of the subtree's partial sums
inline std::vector<double> soft_sc_plain_rec(SoftScPlainState& st, const std::vector<double>& alpha,
                                             std::size_t u_offset) {
    const std::size_t len = alpha.size();
    if (len == 1) {
        if (st.spec->is_frozen[u_offset]) return {1.0};
        st.info_llrs.push_back(alpha[0]);
        return {std::tanh(0.5 * alpha[0])};
    }
    const std::size_t half = len / 2;
    std::vector<double> a(half);
    for (std::size_t i = 0; i < half; ++i) a[i] = soft_f(alpha[i], alpha[i + half], st.guard);
    auto sym_l = soft_sc_plain_rec(st, a, u_offset);
    for (std::size_t i = 0; i < half; ++i) a[i] = alpha[i + half] + sym_l[i] * alpha[i];
    auto sym_r = soft_sc_plain_rec(st, a, u_offset + half);
    std::vector<double> sym(len);
    for (std::size_t i = 0; i < half; ++i) {
        sym[i] = sym_l[i] * sym_r[i];
        sym[i + half] = sym_r[i];
    }
    return sym;
}

template <typename T>
struct SoftScTapeState {
    ad::Tape<T>* tape;
    const PolarCodeSpec* spec;
    std::vector<ad::Tensor<T>> info_llrs;  // each [1,1]
    double guard;
};

template <typename T>
ad::Tensor<T> soft_sc_tape_rec(SoftScTapeState<T>& st, ad::Tensor<T> alpha, std::size_t u_offset) {
    ad::Tape<T>& tape = *st.tape;
    const std::size_t len = alpha.shape()[1];
    if (len == 1) {
        if (st.spec->is_frozen[u_offset]) return tape.constant({1, 1}, {T(1)});
        st.info_llrs.push_back(alpha);
        return tape.tanh(tape.mul_scalar(alpha, 0.5));
    }
    const std::size_t half = len / 2;
    auto lo = tape.slice_cols(alpha, 0, half);
    auto hi = tape.slice_cols(alpha, half, half);
    auto prod = tape.mul(tape.tanh(tape.mul_scalar(lo, 0.5)), tape.tanh(tape.mul_scalar(hi, 0.5)));
    auto f = tape.mul_scalar(tape.atanh(tape.clip(prod, -st.guard, st.guard)), 2.0);
    auto sym_l = soft_sc_tape_rec(st, f, u_offset);
    auto gup = tape.add(hi, tape.mul(sym_l, lo));
    auto sym_r = soft_sc_tape_rec(st, gup, u_offset + half);
    return tape.concat_cols({tape.mul(sym_l, sym_r), sym_r});
}

}  // namespace detail

// Info-bit soft LLRs from the fully differentiable SC pass.
template <typename T>
ad::Tensor<T> soft_sc_decode(ad::Tape<T>& tape, const PolarCodeSpec& spec, ad::Tensor<T> llr,
                             double atanh_guard = default_atanh_guard<T>()) {
    if (llr.shape().size() != 2 || llr.shape()[0] != 1 || llr.shape()[1] != spec.n())
        throw std::invalid_argument("soft_sc_decode: LLR must be [1, N]");
    detail::SoftScTapeState<T> st{&tape, &spec, {}, atanh_guard};
    (void)detail::soft_sc_tape_rec(st, llr, 0);
    return tape.concat_cols(st.info_llrs);  // [1, k]
}

inline std::vector<double> soft_sc_decode_plain(const PolarCodeSpec& spec,
                                                const std::vector<double>& llr,
                                                double atanh_guard = kAtanhGuard) {
    if (llr.size() != spec.n()) throw std::invalid_argument("soft_sc_decode: LLR length mismatch");
    detail::SoftScPlainState st{&spec, {}, atanh_guard};
    st.info_llrs.reserve(spec.k());
    (void)detail::soft_sc_plain_rec(st, llr, 0);
    return st.info_llrs;
}

}  // namespace transcoder
