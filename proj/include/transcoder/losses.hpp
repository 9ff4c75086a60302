#pragma once

// Training losses: bitwise cross-entropy on TransCoder probabilities (L_TC),
// cross-entropy on channel-decoder soft estimates (L_CD), the soft-parity-
// check classification loss (L_H) and their BP combination (L_BP). All are
// negative log-likelihoods; batch reduction is the mean over frames of the
// per-frame sum (L_TC / L_CD) or the mean over parity rows (L_H).

#include <cmath>
#include <stdexcept>
#include <vector>

#include "transcoder/autodiff.hpp"
#include "transcoder/gf2.hpp"
#include "transcoder/nn.hpp"

namespace transcoder {

// Attainable soft-parity values of codewords: even integers from 0 up to the
// largest row weight of H (the zero class included).
struct SoftParityAlphabet {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }

    std::size_t class_of(double v) const {
        const auto idx = static_cast<std::size_t>(std::llround(v / 2.0));
        if (std::fabs(v - 2.0 * static_cast<double>(idx)) > 1e-9 || idx >= values.size())
            throw std::invalid_argument("soft parity value " + std::to_string(v) +
                                        " is not in the alphabet (convention bug)");
        return idx;
    }
};

inline SoftParityAlphabet build_soft_parity_alphabet(const BitMatrix& h) {
    std::size_t wmax = 0;
    for (std::size_t r = 0; r < h.rows(); ++r) wmax = std::max(wmax, h.row_weight(r));
    SoftParityAlphabet a;
    for (std::size_t v = 0; v <= wmax / 2; ++v) a.values.push_back(2.0 * static_cast<double>(v));
    return a;
}

namespace loss_detail {

template <typename T>
ad::Tensor<T> bits_tensor(ad::Tape<T>& tape, const std::vector<std::vector<int>>& c) {
    const std::size_t batch = c.size(), n = c[0].size();
    std::vector<T> v;
    v.reserve(batch * n);
    for (const auto& row : c)
        for (int b : row) v.push_back(static_cast<T>(b));
    return tape.constant({batch, n}, std::move(v));
}

// softplus(z) = log(1 + e^z), computed as relu(z) + log(1 + e^-|z|)
template <typename T>
ad::Tensor<T> softplus(ad::Tape<T>& tape, ad::Tensor<T> z) {
    auto tail = tape.log(tape.add_scalar(tape.exp(tape.neg(tape.abs(z))), 1.0));
    return tape.add(tape.relu(z), tail);
}

}  // namespace loss_detail

// L_TC: p holds per-bit probabilities of bit 1, shape [batch, n].
template <typename T>
ad::Tensor<T> loss_tc(ad::Tape<T>& tape, ad::Tensor<T> p, const std::vector<std::vector<int>>& c) {
    const std::size_t batch = c.size();
    auto ct = loss_detail::bits_tensor(tape, c);
    auto pc = tape.clip(p, prob_floor<T>(), 1.0 - prob_floor<T>());
    auto one_minus_c = tape.add_scalar(tape.neg(ct), 1.0);
    auto one_minus_p = tape.add_scalar(tape.neg(pc), 1.0);
    auto ll = tape.add(tape.mul(ct, tape.log(pc)), tape.mul(one_minus_c, tape.log(one_minus_p)));
    return tape.mul_scalar(tape.sum(ll), -1.0 / static_cast<double>(batch));
}

// L_CD: x is the decoder soft estimate in LLR domain (log P0/P1), so the
// bit-1 probability is sigmoid(-x); evaluated in softplus form, which is the
// same negative log-likelihood without intermediate saturation.
template <typename T>
ad::Tensor<T> loss_cd(ad::Tape<T>& tape, ad::Tensor<T> x, const std::vector<std::vector<int>>& c) {
    const std::size_t batch = c.size();
    auto ct = loss_detail::bits_tensor(tape, c);
    auto one_minus_c = tape.add_scalar(tape.neg(ct), 1.0);
    auto term1 = tape.mul(ct, loss_detail::softplus(tape, x));
    auto term0 = tape.mul(one_minus_c, loss_detail::softplus(tape, tape.neg(x)));
    return tape.mul_scalar(tape.sum(tape.add(term1, term0)), 1.0 / static_cast<double>(batch));
}

// L_H on the projected estimate. The projection maps saturated reliabilities
// onto the true bit values under l = log P0/P1: xbar = (clip(-x) + 1) / 2.
template <typename T>
ad::Tensor<T> loss_h(ad::Tape<T>& tape, ad::Tensor<T> x, const std::vector<std::vector<int>>& c,
                     const BitMatrix& h, const SoftParityAlphabet& alphabet) {
    const std::size_t batch = c.size(), n = h.cols(), npc = h.rows();
    auto xbar = tape.mul_scalar(tape.add_scalar(tape.clip(tape.neg(x), -1.0, 1.0), 1.0), 0.5);

    std::vector<T> ht(n * npc, T(0));
    for (std::size_t r = 0; r < npc; ++r)
        for (std::size_t col = 0; col < n; ++col)
            if (h.get(r, col)) ht[col * npc + r] = T(1);
    auto parities = tape.matmul(xbar, tape.constant({n, npc}, std::move(ht)));  // [batch, npc]

    std::vector<std::size_t> targets;
    targets.reserve(batch * npc);
    for (const auto& cw : c) {
        for (std::size_t r = 0; r < npc; ++r) {
            long dot = 0;
            for (std::size_t col = 0; col < n; ++col)
                if (h.get(r, col)) dot += cw[col];
            targets.push_back(alphabet.class_of(static_cast<double>(dot)));
        }
    }

    auto flat = tape.reshape(parities, {batch * npc, std::size_t(1)});
    auto logits = tape.neg(tape.pairwise_abs_diff(flat, alphabet.values));
    auto logp = tape.log_softmax(logits);
    return tape.neg(tape.mean(tape.take_per_row(logp, targets)));
}

// L_BP = (L_CD + L_H on the projection) / 2
template <typename T>
ad::Tensor<T> loss_bp(ad::Tape<T>& tape, ad::Tensor<T> x, const std::vector<std::vector<int>>& c,
                      const BitMatrix& h, const SoftParityAlphabet& alphabet) {
    return tape.mul_scalar(tape.add(loss_cd(tape, x, c), loss_h(tape, x, c, h, alphabet)), 0.5);
}

// Plain-number conveniences for tests and traces.

inline double loss_tc_value(const std::vector<std::vector<double>>& p,
                            const std::vector<std::vector<int>>& c) {
    ad::Tape<double> tape;
    std::vector<double> flat;
    for (const auto& row : p) flat.insert(flat.end(), row.begin(), row.end());
    auto pt = tape.constant({p.size(), p[0].size()}, std::move(flat));
    return loss_tc(tape, pt, c).item();
}

inline double loss_cd_value(const std::vector<std::vector<double>>& x,
                            const std::vector<std::vector<int>>& c) {
    ad::Tape<double> tape;
    std::vector<double> flat;
    for (const auto& row : x) flat.insert(flat.end(), row.begin(), row.end());
    auto xt = tape.constant({x.size(), x[0].size()}, std::move(flat));
    return loss_cd(tape, xt, c).item();
}

inline double loss_h_value(const std::vector<std::vector<double>>& x,
                           const std::vector<std::vector<int>>& c, const BitMatrix& h,
                           const SoftParityAlphabet& alphabet) {
    ad::Tape<double> tape;
    std::vector<double> flat;
    for (const auto& row : x) flat.insert(flat.end(), row.begin(), row.end());
    auto xt = tape.constant({x.size(), x[0].size()}, std::move(flat));
    return loss_h(tape, xt, c, h, alphabet).item();
}

}  // namespace transcoder
