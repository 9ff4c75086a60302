#pragma once

// End-to-end evaluation path: channel encoder, optional neural encoder with
// frozen power statistics, AWGN, optional neural decoder / refinement loop,
// and the classical channel decoder. One frame at a time; all randomness
// comes from counter streams keyed by the absolute frame index, so results
// are independent of scheduling.

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "transcoder/bp.hpp"
#include "transcoder/channel.hpp"
#include "transcoder/linear_code.hpp"
#include "transcoder/nn.hpp"
#include "transcoder/polar.hpp"
#include "transcoder/sc.hpp"

namespace transcoder {

enum class ModuleSet { None, Et, Dt, EtDt, DtRf, Full };

inline const char* module_set_name(ModuleSet m) {
    switch (m) {
        case ModuleSet::None: return "none";
        case ModuleSet::Et: return "E_T";
        case ModuleSet::Dt: return "D_T";
        case ModuleSet::EtDt: return "E_T+D_T";
        case ModuleSet::DtRf: return "D_T+D_T_rf";
        case ModuleSet::Full: return "full";
    }
    return "?";
}

inline bool module_set_has_encoder(ModuleSet m) {
    return m == ModuleSet::Et || m == ModuleSet::EtDt || m == ModuleSet::Full;
}
inline bool module_set_has_decoder(ModuleSet m) {
    return m == ModuleSet::Dt || m == ModuleSet::EtDt || m == ModuleSet::DtRf || m == ModuleSet::Full;
}
inline bool module_set_has_refine(ModuleSet m) {
    return m == ModuleSet::DtRf || m == ModuleSet::Full;
}

enum class DecoderKind { Bp, MinSum, Sc, Scl };

inline const char* decoder_kind_name(DecoderKind k) {
    switch (k) {
        case DecoderKind::Bp: return "bp";
        case DecoderKind::MinSum: return "minsum";
        case DecoderKind::Sc: return "sc";
        case DecoderKind::Scl: return "scl";
    }
    return "?";
}

struct DecoderSchedule {
    DecoderKind kind = DecoderKind::Bp;
    std::size_t runs = 1;       // channel-decoder runs r (r-1 refinement iterations)
    std::size_t iters = 20;     // BP iterations per run
    std::size_t list_size = 8;  // SCL only
    bool early_stop = false;

    std::string label() const {
        std::string s;
        if (runs > 1) s += std::to_string(runs) + "x";
        s += decoder_kind_name(kind);
        if (kind == DecoderKind::Bp || kind == DecoderKind::MinSum)
            s += "-" + std::to_string(iters);
        if (kind == DecoderKind::Scl) s += "-L" + std::to_string(list_size);
        return s;
    }
};

template <typename T>
struct Pipeline {
    const LinearCode* code = nullptr;      // BP-decoded codes
    const PolarCodeSpec* polar = nullptr;  // SC/SCL-decoded codes
    ModuleSet modules = ModuleSet::None;
    DecoderSchedule sched;
    const TransCoderModel<T>* model = nullptr;
    PowerStats<T> power_stats;  // frozen statistics for the current noise level
    std::string code_name;

    std::size_t n() const { return code ? code->n() : polar->n(); }
    std::size_t k() const { return code ? code->k() : polar->k(); }
    double rate() const { return static_cast<double>(k()) / static_cast<double>(n()); }

    std::string id() const {
        std::string s = module_set_name(modules);
        s += "/";
        s += sched.label();
        return s;
    }

    void validate() const {
        if (!code && !polar) throw std::invalid_argument("pipeline: no code attached");
        const bool is_polar_dec = sched.kind == DecoderKind::Sc || sched.kind == DecoderKind::Scl;
        if (is_polar_dec && !polar) throw std::invalid_argument("pipeline: SC/SCL needs a polar code");
        if (!is_polar_dec && !code) throw std::invalid_argument("pipeline: BP needs a parity-check code");
        if (module_set_has_refine(modules) && sched.runs < 2)
            throw std::invalid_argument("pipeline: refinement modules require r >= 2 decoder runs");
        if (!module_set_has_refine(modules) && sched.runs > 1)
            throw std::invalid_argument("pipeline: multiple decoder runs require the refinement module");
        if (is_polar_dec && sched.runs > 1)
            throw std::invalid_argument("pipeline: SC/SCL decoders are single-run");
        if (modules != ModuleSet::None) {
            if (!model) throw std::invalid_argument("pipeline: neural modules require a model");
            if (module_set_has_encoder(modules) && !model->cfg.use_encoder)
                throw std::invalid_argument("pipeline: model has no encoder module");
            if (module_set_has_decoder(modules) && !model->cfg.use_decoder)
                throw std::invalid_argument("pipeline: model has no decoder module");
            if (module_set_has_refine(modules) && !model->cfg.use_refine)
                throw std::invalid_argument("pipeline: model has no refinement module");
        }
    }

    void require_calibrated() const {
        if (module_set_has_encoder(modules) && !power_stats.valid)
            throw std::invalid_argument(
                "pipeline: neural encoder requires frozen power statistics (calibrate first)");
    }

    std::vector<int> random_message(std::uint64_t seed, std::uint64_t frame) const {
        CounterRng rng(seed, rng_stream::kMessage, frame);
        std::vector<int> b(k());
        for (auto& bit : b) bit = rng.next_bit() ? 1 : 0;
        return b;
    }

    std::vector<int> channel_encode(const std::vector<int>& b) const {
        return code ? code->encode_bits(b) : polar_encode(*polar, b);
    }
};

// Symbols for one codeword through the neural encoder with frozen stats.
template <typename T>
std::vector<double> neural_encode_frame(const Pipeline<T>& pl, const std::vector<int>& c,
                                        double sigma) {
    ad::Tape<T> tape;
    ModuleForward<T> fwd(tape, *pl.model, /*training=*/false);
    auto raw = encoder_trunk(fwd, c, sigma);
    auto norm = power_normalize_frozen(tape, raw, pl.power_stats);
    auto s = power_realloc(tape, norm, fwd.param("enc.rho"), pl.model->cfg.n);
    const auto& v = s.values();
    return std::vector<double>(v.begin(), v.end());
}

// Calibrate frozen power statistics at one noise level from `frames` random
// codewords (population mean/std per symbol index).
template <typename T>
PowerStats<T> calibrate_power(const TransCoderModel<T>& model,
                              const Pipeline<T>& pl, double sigma, std::size_t frames,
                              std::uint64_t seed) {
    const std::size_t n = model.cfg.n;
    std::vector<double> sum(n, 0.0), sumsq(n, 0.0);
    for (std::size_t f = 0; f < frames; ++f) {
        CounterRng rng(seed, rng_stream::kCalibration, f);
        std::vector<int> b(pl.k());
        for (auto& bit : b) bit = rng.next_bit() ? 1 : 0;
        const auto c = pl.channel_encode(b);
        ad::Tape<T> tape;
        ModuleForward<T> fwd(tape, model, false);
        const auto& raw = encoder_trunk(fwd, c, sigma).values();
        for (std::size_t i = 0; i < n; ++i) {
            sum[i] += raw[i];
            sumsq[i] += static_cast<double>(raw[i]) * raw[i];
        }
    }
    PowerStats<T> stats;
    stats.mu.resize(n);
    stats.sigma.resize(n);
    const double inv = 1.0 / static_cast<double>(frames);
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = sum[i] * inv;
        const double var = std::max(0.0, sumsq[i] * inv - mu * mu);
        stats.mu[i] = static_cast<T>(mu);
        stats.sigma[i] = static_cast<T>(std::sqrt(var));
    }
    stats.valid = true;
    return stats;
}

struct FrameOutcome {
    std::size_t bit_errors = 0;
    bool block_error = false;
};

// Decode one frame end to end. All draws are keyed by (seed, stream, frame).
template <typename T>
FrameOutcome run_frame(const Pipeline<T>& pl, std::uint64_t seed, std::uint64_t frame, double sigma,
                       bool zero_noise = false) {
    const auto b = pl.random_message(seed, frame);
    const auto c = pl.channel_encode(b);

    std::vector<double> symbols;
    if (module_set_has_encoder(pl.modules))
        symbols = neural_encode_frame(pl, c, sigma);
    else
        symbols = bpsk_map(c).symbols;

    NoisySignal y;
    y.sigma = sigma;
    y.samples = symbols;
    if (!zero_noise) {
        CounterRng noise(seed, rng_stream::kNoise, frame);
        for (auto& v : y.samples) v += sigma * noise.gaussian();
    }

    // receiver-side tape for the neural decoder passes
    ad::Tape<T> tape;
    std::unique_ptr<ModuleForward<T>> fwd;
    std::unique_ptr<BitWordTable> table;
    ad::Tensor<T> y_row;
    if (module_set_has_decoder(pl.modules)) {
        fwd = std::make_unique<ModuleForward<T>>(tape, *pl.model, false);
        std::vector<T> yv(y.samples.begin(), y.samples.end());
        y_row = tape.constant({1, pl.n()}, std::move(yv));
        table = std::make_unique<BitWordTable>(BitWordTable::make(pl.model->cfg.m));
    }

    auto first_llr = [&]() -> LlrVector {
        if (!module_set_has_decoder(pl.modules)) return channel_llr(y);
        auto probs = decoder_forward(*fwd, y_row, sigma);
        auto l = f_m2d_t(tape, probs, *table, pl.model->cfg.layout());
        const auto& v = l.values();
        return LlrVector{std::vector<double>(v.begin(), v.end())};
    };

    std::vector<int> b_hat;
    if (pl.sched.kind == DecoderKind::Sc) {
        b_hat = sc_decode(*pl.polar, first_llr()).info_bits();
    } else if (pl.sched.kind == DecoderKind::Scl) {
        auto res = scl_decode(*pl.polar, first_llr(), SclConfig{pl.sched.list_size});
        b_hat.reserve(pl.polar->info.size());
        for (auto i : pl.polar->info) b_hat.push_back(res.u_hat[i]);
    } else {
        BpConfig bp;
        bp.iterations = pl.sched.iters;
        bp.variant = pl.sched.kind == DecoderKind::MinSum ? BpVariant::MinSum : BpVariant::SumProduct;
        bp.early_stop = pl.sched.early_stop;
        SoftEstimate x = bp_decode(pl.code->graph(), first_llr(), bp);
        for (std::size_t run = 2; run <= pl.sched.runs; ++run) {
            const auto xhat = f_d2m(x.values);
            std::vector<T> xv(xhat.begin(), xhat.end());
            auto xhat_row = tape.constant({1, pl.n()}, std::move(xv));
            auto probs = refine_forward(*fwd, y_row, xhat_row, sigma);
            auto l = f_m2d_t(tape, probs, *table, pl.model->cfg.layout());
            const auto& lv = l.values();
            x = bp_decode(pl.code->graph(), LlrVector{std::vector<double>(lv.begin(), lv.end())}, bp);
        }
        const auto c_hat = hard_decision(x);
        const auto msg = pl.code->extract_message(BitVector::from_bits(c_hat));
        b_hat = msg.to_bits();
    }

    FrameOutcome out;
    for (std::size_t i = 0; i < b.size(); ++i)
        if (b[i] != b_hat[i]) ++out.bit_errors;
    out.block_error = out.bit_errors > 0;
    return out;
}

}  // namespace transcoder
