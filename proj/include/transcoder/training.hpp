#pragma once

// End-to-end training: per-frame SNR sampling, batch-statistic power
// normalization through the neural encoder, differentiable decoding (BP on
// tensors or soft SC), per-run loss averaging over the refinement loop, Adam
// with linear LR decay, and a CSV loss trace. Strictly sequential and
// reproducible from the seed.

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "transcoder/checkpoint.hpp"
#include "transcoder/losses.hpp"
#include "transcoder/nn.hpp"
#include "transcoder/optim.hpp"
#include "transcoder/pipeline.hpp"
#include "transcoder/soft_decoders.hpp"

namespace transcoder {

enum class LossKind { Tc, Cd, Bp };

inline const char* loss_kind_name(LossKind k) {
    switch (k) {
        case LossKind::Tc: return "tc";
        case LossKind::Cd: return "cd";
        case LossKind::Bp: return "bp";
    }
    return "?";
}

struct TrainConfig {
    std::uint64_t epochs = 10000;
    std::uint64_t batches_per_epoch = 1;
    std::size_t batch_size = 1000;
    double lr = 1e-3;
    double snr_lo_db = 2.0, snr_hi_db = 8.0;
    std::size_t decoder_runs = 1;    // r: total channel-decoder runs
    std::size_t decoder_iters = 10;  // BP iterations per run
    DecoderKind decoder = DecoderKind::Bp;
    LossKind loss = LossKind::Bp;
    std::uint64_t seed = 0;
};

struct TrainTarget {
    const LinearCode* code = nullptr;
    const PolarCodeSpec* polar = nullptr;

    std::size_t n() const { return code ? code->n() : polar->n(); }
    std::size_t k() const { return code ? code->k() : polar->k(); }
};

struct TraceRow {
    std::uint64_t epoch = 0;
    double lr = 0.0;
    std::vector<double> run_losses;
    double mean_loss = 0.0;
};

struct TrainResult {
    std::vector<TraceRow> trace;
};

namespace train_detail {

inline void validate(const TrainTarget& target, const TrainConfig& cfg, const ModelConfig& mc) {
    if (!target.code && !target.polar) throw std::invalid_argument("train: no code given");
    if (cfg.decoder == DecoderKind::MinSum || cfg.decoder == DecoderKind::Scl)
        throw std::invalid_argument(
            "train: decoder has no differentiable soft path (use bp or sc)");
    if (cfg.decoder == DecoderKind::Bp && !target.code)
        throw std::invalid_argument("train: BP training needs a parity-check code");
    if (cfg.decoder == DecoderKind::Sc && !target.polar)
        throw std::invalid_argument("train: SC training needs a polar code");
    if (cfg.decoder == DecoderKind::Sc && cfg.decoder_runs > 1)
        throw std::invalid_argument("train: refinement runs are only defined for BP decoding");
    if (cfg.decoder_runs > 1 && !mc.use_refine)
        throw std::invalid_argument("train: decoder_runs > 1 requires the refinement module");
    if (cfg.loss == LossKind::Tc && !mc.use_decoder)
        throw std::invalid_argument("train: the tc loss is computed on neural-decoder outputs");
    if (!mc.use_encoder && !mc.use_decoder && !mc.use_refine)
        throw std::invalid_argument("train: model has no trainable modules");
    if (cfg.loss == LossKind::Bp && cfg.decoder != DecoderKind::Bp)
        throw std::invalid_argument("train: the bp loss pairs with the BP decoder");
    if (cfg.batch_size < 2) throw std::invalid_argument("train: batch size must be >= 2");
}

struct Batch {
    std::vector<std::vector<int>> messages;   // [B][k]
    std::vector<std::vector<int>> codewords;  // [B][n]
    std::vector<double> sigma;                // per frame
    std::vector<double> noise;                // [B*n], unscaled N(0,1) draws
};

inline Batch make_batch(const TrainTarget& target, const TrainConfig& cfg, std::uint64_t seed,
                        std::uint64_t step_index) {
    const std::size_t n = target.n(), k = target.k();
    Batch b;
    b.messages.resize(cfg.batch_size);
    b.codewords.resize(cfg.batch_size);
    b.sigma.resize(cfg.batch_size);
    b.noise.resize(cfg.batch_size * n);
    const double rate = static_cast<double>(k) / static_cast<double>(n);
    for (std::size_t f = 0; f < cfg.batch_size; ++f) {
        const std::uint64_t frame = step_index * cfg.batch_size + f;
        CounterRng msg_rng(seed, rng_stream::kMessage, frame);
        auto& msg = b.messages[f];
        msg.resize(k);
        for (auto& bit : msg) bit = msg_rng.next_bit() ? 1 : 0;
        b.codewords[f] = target.code ? target.code->encode_bits(msg) : polar_encode(*target.polar, msg);
        CounterRng snr_rng(seed, rng_stream::kSnr, frame);
        b.sigma[f] = sigma_from_ebn0(snr_rng.uniform(cfg.snr_lo_db, cfg.snr_hi_db), rate);
        CounterRng noise_rng(seed, rng_stream::kNoise, frame);
        for (std::size_t i = 0; i < n; ++i) b.noise[f * n + i] = noise_rng.gaussian();
    }
    return b;
}

}  // namespace train_detail

template <typename T>
struct ForwardResult {
    ad::Tensor<T> loss;
    std::vector<double> run_losses;
};

// One full differentiable pass over a batch. `training` controls gradient
// tracking and running-statistics updates.
template <typename T>
ForwardResult<T> training_forward(ad::Tape<T>& tape, TransCoderModel<T>& model,
                                  const TrainTarget& target, const TrainConfig& cfg,
                                  const train_detail::Batch& batch, bool training) {
    const ModelConfig& mc = model.cfg;
    const std::size_t B = batch.messages.size(), n = target.n();
    ModuleForward<T> fwd(tape, model, training);
    const BitWordTable table = BitWordTable::make(mc.m);
    const BlockLayout layout = mc.layout();

    // transmitter
    ad::Tensor<T> s;
    if (mc.use_encoder) {
        std::vector<ad::Tensor<T>> rows(B);
        for (std::size_t f = 0; f < B; ++f)
            rows[f] = encoder_trunk(fwd, batch.codewords[f], batch.sigma[f]);
        auto raw = tape.concat_rows(rows);
        auto norm = power_normalize_batch(tape, raw, training ? &model : nullptr);
        s = power_realloc(tape, norm, fwd.param("enc.rho"), n);
    } else {
        std::vector<T> premod(B * n);
        for (std::size_t f = 0; f < B; ++f)
            for (std::size_t i = 0; i < n; ++i)
                premod[f * n + i] = batch.codewords[f][i] ? T(1) : T(-1);
        s = tape.constant({B, n}, std::move(premod));
    }

    // channel
    std::vector<T> scaled_noise(B * n);
    for (std::size_t f = 0; f < B; ++f)
        for (std::size_t i = 0; i < n; ++i)
            scaled_noise[f * n + i] = static_cast<T>(batch.sigma[f] * batch.noise[f * n + i]);
    auto y = tape.add(s, tape.constant({B, n}, std::move(scaled_noise)));

    // receiver: first LLR estimate (and, for the tc loss, bit-1 marginals)
    auto decoder_pass = [&](bool marginals) -> ad::Tensor<T> {
        std::vector<ad::Tensor<T>> rows(B);
        for (std::size_t f = 0; f < B; ++f) {
            auto yr = tape.slice_rows(y, f, 1);
            auto probs = decoder_forward(fwd, yr, batch.sigma[f]);
            rows[f] = marginals ? f_m2d_marginals_t(tape, probs, table, layout)
                                : f_m2d_t(tape, probs, table, layout);
        }
        return tape.concat_rows(rows);
    };

    if (cfg.loss == LossKind::Tc) {
        auto p = decoder_pass(/*marginals=*/true);
        auto loss = loss_tc(tape, p, batch.codewords);
        return {loss, {loss.item()}};
    }

    ad::Tensor<T> llr;
    if (mc.use_decoder) {
        llr = decoder_pass(false);
    } else {
        std::vector<T> scale(B * n);
        for (std::size_t f = 0; f < B; ++f)
            for (std::size_t i = 0; i < n; ++i)
                scale[f * n + i] = static_cast<T>(-2.0 / (batch.sigma[f] * batch.sigma[f]));
        llr = tape.clip(tape.mul(y, tape.constant({B, n}, std::move(scale))), -kLlrMax, kLlrMax);
    }

    SoftParityAlphabet alphabet;
    if (cfg.loss == LossKind::Bp) alphabet = build_soft_parity_alphabet(target.code->h().bits);
    auto run_loss = [&](ad::Tensor<T> x) {
        return cfg.loss == LossKind::Bp
                   ? loss_bp(tape, x, batch.codewords, target.code->h().bits, alphabet)
                   : loss_cd(tape, x, cfg.decoder == DecoderKind::Sc ? batch.messages
                                                                      : batch.codewords);
    };

    std::vector<ad::Tensor<T>> losses;
    std::vector<double> run_values;
    if (cfg.decoder == DecoderKind::Sc) {
        std::vector<ad::Tensor<T>> xrows(B);
        for (std::size_t f = 0; f < B; ++f)
            xrows[f] = soft_sc_decode(tape, *target.polar, tape.slice_rows(llr, f, 1));
        auto x = tape.concat_rows(xrows);
        losses.push_back(run_loss(x));
        run_values.push_back(losses.back().item());
    } else {
        BpSoftOptions bp;
        bp.iterations = cfg.decoder_iters;
        bp.atanh_guard = default_atanh_guard<T>();
        auto x = soft_bp_decode(tape, target.code->graph(), llr, bp);
        losses.push_back(run_loss(x));
        run_values.push_back(losses.back().item());
        for (std::size_t run = 2; run <= cfg.decoder_runs; ++run) {
            auto xhat = f_d2m_t(tape, x);
            std::vector<ad::Tensor<T>> rows(B);
            for (std::size_t f = 0; f < B; ++f) {
                auto yr = tape.slice_rows(y, f, 1);
                auto xr = tape.slice_rows(xhat, f, 1);
                auto probs = refine_forward(fwd, yr, xr, batch.sigma[f]);
                rows[f] = f_m2d_t(tape, probs, table, layout);
            }
            x = soft_bp_decode(tape, target.code->graph(), tape.concat_rows(rows), bp);
            losses.push_back(run_loss(x));
            run_values.push_back(losses.back().item());
        }
    }

    ad::Tensor<T> total = losses[0];
    for (std::size_t i = 1; i < losses.size(); ++i) total = tape.add(total, losses[i]);
    total = tape.mul_scalar(total, 1.0 / static_cast<double>(losses.size()));
    return {total, run_values};
}

// Mean loss over a batch drawn from a separate seed, without touching the
// model (no gradient, no running-statistics update).
template <typename T>
double validation_loss(TransCoderModel<T>& model, const TrainTarget& target, const TrainConfig& cfg,
                       std::uint64_t val_seed, std::size_t batch_size) {
    TrainConfig vcfg = cfg;
    vcfg.batch_size = batch_size;
    const auto batch = train_detail::make_batch(target, vcfg, val_seed, 0);
    ad::Tape<T> tape;
    auto res = training_forward(tape, model, target, vcfg, batch, /*training=*/false);
    return static_cast<double>(res.loss.item());
}

template <typename T>
TrainResult train(TransCoderModel<T>& model, const TrainTarget& target, const TrainConfig& cfg) {
    train_detail::validate(target, cfg, model.cfg);
    AdamState<T> adam = AdamState<T>::template for_params<T>(model.params);
    TrainResult result;
    result.trace.reserve(cfg.epochs);

    for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_schedule(epoch, cfg.epochs, cfg.lr);
        TraceRow row;
        row.epoch = epoch;
        row.lr = lr;
        std::vector<double> run_acc(std::max<std::size_t>(
            1, cfg.loss == LossKind::Tc ? 1 : cfg.decoder_runs), 0.0);
        for (std::uint64_t b = 0; b < cfg.batches_per_epoch; ++b) {
            const std::uint64_t step = epoch * cfg.batches_per_epoch + b;
            const auto batch = train_detail::make_batch(target, cfg, cfg.seed, step);
            ad::Tape<T> tape;
            auto res = training_forward(tape, model, target, cfg, batch, /*training=*/true);
            tape.backward(res.loss);
            // parameter leaves are the first tape nodes, in parameter order
            std::vector<std::vector<T>> grads(model.params.count());
            for (std::size_t i = 0; i < model.params.count(); ++i)
                grads[i] = tape.grad(ad::Tensor<T>{&tape, i});
            adam_step(model.params, grads, adam, lr);
            model.renormalize_realloc();
            for (std::size_t i = 0; i < res.run_losses.size(); ++i)
                run_acc[i] += res.run_losses[i];
        }
        for (auto& v : run_acc) v /= static_cast<double>(cfg.batches_per_epoch);
        row.run_losses = run_acc;
        double mean = 0.0;
        for (auto v : run_acc) mean += v;
        row.mean_loss = mean / static_cast<double>(run_acc.size());
        result.trace.push_back(std::move(row));
    }
    return result;
}

inline void write_loss_trace(const TrainResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("trace: cannot write " + path);
    const std::size_t runs = result.trace.empty() ? 1 : result.trace.front().run_losses.size();
    out << "epoch,lr";
    for (std::size_t i = 1; i <= runs; ++i) out << ",loss_run_" << i;
    out << ",mean_loss\n";
    out.precision(12);
    for (const auto& row : result.trace) {
        out << row.epoch << "," << row.lr;
        for (auto v : row.run_losses) out << "," << v;
        out << "," << row.mean_loss << "\n";
    }
}

}  // namespace transcoder
