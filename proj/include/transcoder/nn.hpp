#pragma once

// The TransCoder neural modules: block partitioning, feature extractor,
// positional encoding, attention-feature gating, the sequence-to-sequence
// transformer stack, the output mapping heads, the domain conversions
// f_m2d / f_d2m, and index-wise power normalization + reallocation.
//
// Everything runs on the autodiff tape; evaluation just uses a tape whose
// leaves carry no gradient. Shapes are per frame: a block sequence is
// [n_b, width], a batch of symbol frames is [batch, n].

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "transcoder/autodiff.hpp"
#include "transcoder/channel.hpp"
#include "transcoder/optim.hpp"
#include "transcoder/rng.hpp"

namespace transcoder {

// ---------------------------------------------------------------- blocks --

struct BlockLayout {
    std::size_t n = 0;       // payload length
    std::size_t m = 0;       // block width
    std::size_t n_b = 0;     // ceil(n/m)
    std::size_t pad = 0;     // trailing padded positions

    static BlockLayout make(std::size_t n, std::size_t m) {
        if (m == 0) throw std::invalid_argument("block width must be >= 1");
        BlockLayout l;
        l.n = n;
        l.m = m;
        l.n_b = (n + m - 1) / m;
        l.pad = l.n_b * m - n;
        return l;
    }
};

inline constexpr double kPadSymbol = 1.0;  // appendix padding rule: literal ones

struct BlockSequence {
    BlockLayout layout;
    std::vector<double> data;  // n_b x width, row-major

    std::size_t width() const { return layout.n_b == 0 ? 0 : data.size() / layout.n_b; }
};

inline BlockSequence partition_pad(const std::vector<double>& v, std::size_t m) {
    BlockSequence s;
    s.layout = BlockLayout::make(v.size(), m);
    s.data = v;
    s.data.resize(s.layout.n_b * m, kPadSymbol);
    return s;
}

inline std::vector<double> flatten_strip(const BlockSequence& s) {
    return std::vector<double>(s.data.begin(), s.data.begin() + static_cast<std::ptrdiff_t>(s.layout.n));
}

template <typename T>
ad::Tensor<T> partition_pad_t(ad::Tape<T>& tape, ad::Tensor<T> row, const BlockLayout& l) {
    // row: [1, n] -> [n_b, m]
    ad::Tensor<T> padded = row;
    if (l.pad > 0) {
        auto pad = tape.constant({1, l.pad}, std::vector<T>(l.pad, static_cast<T>(kPadSymbol)));
        padded = tape.concat_cols({row, pad});
    }
    return tape.reshape(padded, {l.n_b, l.m});
}

template <typename T>
ad::Tensor<T> flatten_strip_t(ad::Tape<T>& tape, ad::Tensor<T> blocks, const BlockLayout& l) {
    auto flat = tape.reshape(blocks, {std::size_t(1), l.n_b * l.m});
    return l.pad > 0 ? tape.slice_cols(flat, 0, l.n) : flat;
}

// ------------------------------------------------------------ bit words --

// Ordered table of the 2^m binary words, q_j = binary representation of j,
// most significant bit first.
struct BitWordTable {
    std::size_t m = 0;
    std::vector<double> words;  // 2^m x m, row-major

    static BitWordTable make(std::size_t m) {
        if (m == 0 || m > 16) throw std::invalid_argument("bit word table: width out of range");
        BitWordTable t;
        t.m = m;
        const std::size_t count = std::size_t(1) << m;
        t.words.resize(count * m);
        for (std::size_t j = 0; j < count; ++j)
            for (std::size_t b = 0; b < m; ++b)
                t.words[j * m + b] = static_cast<double>((j >> (m - 1 - b)) & 1u);
        return t;
    }
};

// ----------------------------------------------------------- model setup --

struct ModelConfig {
    std::size_t n = 0;  // code block length
    std::size_t m = 3;
    std::size_t d_model = 16;
    std::size_t n_heads = 1;
    std::size_t d_khead = 16;
    std::size_t enc_layers = 2;
    std::size_t dec_layers = 3;
    std::size_t refine_iters = 1;  // default decoder runs r for evaluation
    bool use_encoder = true;
    bool use_decoder = true;
    bool use_refine = true;

    BlockLayout layout() const { return BlockLayout::make(n, m); }
    std::size_t words() const { return std::size_t(1) << m; }
};

namespace nn_detail {

template <typename T>
void add_affine(ParamSet<T>& p, const std::string& name, std::size_t in, std::size_t out,
                CounterRng& rng) {
    const double s = 1.0 / std::sqrt(static_cast<double>(in));
    std::vector<T> w(in * out);
    for (auto& v : w) v = static_cast<T>(rng.uniform(-s, s));
    p.add(name + ".w", {in, out}, std::move(w));
    p.add(name + ".b", {1, out}, std::vector<T>(out, T(0)));
}

template <typename T>
void add_layernorm(ParamSet<T>& p, const std::string& name, std::size_t d) {
    p.add(name + ".g", {1, d}, std::vector<T>(d, T(1)));
    p.add(name + ".b", {1, d}, std::vector<T>(d, T(0)));
}

template <typename T>
void add_block_module(ParamSet<T>& p, const std::string& prefix, std::size_t in_width,
                      std::size_t out_width, std::size_t layers, const ModelConfig& cfg,
                      CounterRng& rng) {
    const std::size_t d = cfg.d_model, dk = cfg.d_khead;
    add_affine(p, prefix + ".fe0", in_width, d, rng);
    add_affine(p, prefix + ".fe1", d, d, rng);
    add_affine(p, prefix + ".fe2", d, d, rng);
    for (std::size_t l = 0; l < layers; ++l) {
        const std::string lp = prefix + ".l" + std::to_string(l);
        add_affine(p, lp + ".af1", d + 1, d, rng);
        add_affine(p, lp + ".af2", d, d, rng);
        add_affine(p, lp + ".wq", d, dk, rng);
        add_affine(p, lp + ".wk", d, dk, rng);
        add_affine(p, lp + ".wv", d, dk, rng);
        add_affine(p, lp + ".wo", dk, d, rng);
        add_layernorm(p, lp + ".ln1", d);
        add_affine(p, lp + ".ff1", d, 4 * d, rng);
        add_affine(p, lp + ".ff2", 4 * d, d, rng);
        add_layernorm(p, lp + ".ln2", d);
    }
    add_affine(p, prefix + ".fmap", d, out_width, rng);
}

}  // namespace nn_detail

template <typename T>
struct TransCoderModel {
    ModelConfig cfg;
    ParamSet<T> params;   // trainable
    ParamSet<T> buffers;  // running power statistics (not trained)

    static TransCoderModel init(const ModelConfig& cfg, std::uint64_t seed) {
        if (cfg.n == 0) throw std::invalid_argument("model: code length n must be set");
        if (cfg.n_heads != 1)
            throw std::invalid_argument("model: only single-head attention is implemented");
        TransCoderModel m;
        m.cfg = cfg;
        CounterRng rng(seed, rng_stream::kInit);
        if (cfg.use_encoder) {
            nn_detail::add_block_module(m.params, "enc", cfg.m, cfg.m, cfg.enc_layers, cfg, rng);
            m.params.add("enc.rho", {1, cfg.n}, std::vector<T>(cfg.n, T(1)));
            m.buffers.add("enc.power_mu", {1, cfg.n}, std::vector<T>(cfg.n, T(0)));
            m.buffers.add("enc.power_sigma", {1, cfg.n}, std::vector<T>(cfg.n, T(1)));
        }
        if (cfg.use_decoder)
            nn_detail::add_block_module(m.params, "dec", cfg.m, cfg.words(), cfg.dec_layers, cfg, rng);
        if (cfg.use_refine)
            nn_detail::add_block_module(m.params, "rf", 2 * cfg.m, cfg.words(), cfg.dec_layers, cfg, rng);
        return m;
    }

    // Enforced after every optimizer step: sum rho_i^2 = n.
    void renormalize_realloc() {
        Param<T>* rho = params.find("enc.rho");
        if (!rho) return;
        double ss = 0.0;
        for (auto v : rho->data) ss += static_cast<double>(v) * v;
        const double scale = std::sqrt(static_cast<double>(cfg.n) / ss);
        for (auto& v : rho->data) v = static_cast<T>(v * scale);
    }
};

// --------------------------------------------------- positional encoding --

inline std::vector<double> positional_encoding(std::size_t n_b, std::size_t d_model) {
    constexpr double kBase = 1000.0;
    constexpr double kL = 200.0;
    std::vector<double> pe(n_b * d_model);
    for (std::size_t i = 0; i < n_b; ++i)
        for (std::size_t c = 0; c < d_model; ++c) {
            const double angle = static_cast<double>(i) / std::pow(kBase, static_cast<double>(c) / kL);
            pe[i * d_model + c] = (c % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    return pe;
}

template <typename T>
ad::Tensor<T> positional_encoding_t(ad::Tape<T>& tape, std::size_t n_b, std::size_t d_model) {
    const auto pe = positional_encoding(n_b, d_model);
    std::vector<T> v(pe.begin(), pe.end());
    return tape.constant({n_b, d_model}, std::move(v));
}

// ------------------------------------------------------ forward building --

template <typename T>
class ModuleForward {
  public:
    // Leaves for every parameter are created once per tape; requires_grad
    // follows the training flag.
    ModuleForward(ad::Tape<T>& tape, const TransCoderModel<T>& model, bool training)
        : tape_(tape), model_(model), training_(training) {
        leaves_.resize(model.params.count());
        for (std::size_t i = 0; i < model.params.count(); ++i)
            leaves_[i] = tape.leaf(model.params[i].shape, model.params[i].data, training);
    }

    ad::Tape<T>& tape() { return tape_; }
    const ModelConfig& cfg() const { return model_.cfg; }

    ad::Tensor<T> param(const std::string& name) const {
        for (std::size_t i = 0; i < model_.params.count(); ++i)
            if (model_.params[i].name == name) return leaves_[i];
        throw std::invalid_argument("model parameter not found: " + name);
    }

    // gradient of a parameter after backward
    const std::vector<T>& grad(const std::string& name) const {
        for (std::size_t i = 0; i < model_.params.count(); ++i)
            if (model_.params[i].name == name) return tape_.grad(leaves_[i]);
        throw std::invalid_argument("model parameter not found: " + name);
    }

    std::vector<std::vector<T>> all_grads() const {
        std::vector<std::vector<T>> g(leaves_.size());
        for (std::size_t i = 0; i < leaves_.size(); ++i) g[i] = tape_.grad(leaves_[i]);
        return g;
    }

    ad::Tensor<T> affine(ad::Tensor<T> x, const std::string& name) const {
        return tape_.add(tape_.matmul(x, param(name + ".w")), param(name + ".b"));
    }

    ad::Tensor<T> feature_extract(ad::Tensor<T> blocks, const std::string& prefix) const {
        auto h = tape_.relu(affine(blocks, prefix + ".fe0"));
        h = tape_.relu(affine(h, prefix + ".fe1"));
        return tape_.relu(affine(h, prefix + ".fe2"));
    }

    ad::Tensor<T> attention_feature(ad::Tensor<T> x, double sigma, const std::string& lp) const {
        const std::size_t n_b = x.shape()[0];
        auto sig = tape_.constant({n_b, 1}, std::vector<T>(n_b, static_cast<T>(sigma)));
        auto xi = tape_.concat_cols({x, sig});
        auto mask = tape_.sigmoid(affine(affine(xi, lp + ".af1"), lp + ".af2"));
        return tape_.mul(x, mask);
    }

    ad::Tensor<T> self_attention(ad::Tensor<T> x, const std::string& lp) const {
        auto q = affine(x, lp + ".wq");
        auto k = affine(x, lp + ".wk");
        auto v = affine(x, lp + ".wv");
        const double scale = 1.0 / std::sqrt(static_cast<double>(cfg().d_khead));
        auto scores = tape_.mul_scalar(tape_.matmul(q, tape_.transpose(k)), scale);
        auto ctx = tape_.matmul(tape_.softmax(scores), v);
        return affine(ctx, lp + ".wo");
    }

    // Post-norm transformer layer with attention-feature gating on the input.
    ad::Tensor<T> s2s_layer(ad::Tensor<T> x, double sigma, const std::string& lp) const {
        auto h = attention_feature(x, sigma, lp);
        auto z = tape_.layernorm(tape_.add(h, self_attention(h, lp)), param(lp + ".ln1.g"),
                                 param(lp + ".ln1.b"));
        auto f = affine(tape_.relu(affine(z, lp + ".ff1")), lp + ".ff2");
        return tape_.layernorm(tape_.add(z, f), param(lp + ".ln2.g"), param(lp + ".ln2.b"));
    }

    ad::Tensor<T> s2s_encode(ad::Tensor<T> x, double sigma, const std::string& prefix,
                             std::size_t layers) const {
        for (std::size_t l = 0; l < layers; ++l)
            x = s2s_layer(x, sigma, prefix + ".l" + std::to_string(l));
        return x;
    }

    // Shared trunk: blocks -> FE -> +PE -> S2S.
    ad::Tensor<T> block_trunk(ad::Tensor<T> blocks, double sigma, const std::string& prefix,
                              std::size_t layers) const {
        auto h = feature_extract(blocks, prefix);
        h = tape_.add(h, positional_encoding_t(tape_, h.shape()[0], cfg().d_model));
        return s2s_encode(h, sigma, prefix, layers);
    }

  private:
    ad::Tape<T>& tape_;
    const TransCoderModel<T>& model_;
    bool training_;
    std::vector<ad::Tensor<T>> leaves_;
};

// -------------------------------------------------- domain conversions --

inline constexpr double kProbFloor = 1.0 / (1.0 + 4.85165195409790278e8);  // sigmoid(-L_max), e^20

// In float the double floor rounds to 0 / 1 exactly, so the float path uses
// a floor that stays representable (caps |llr| near 13.8 instead of 20).
template <typename T>
constexpr double prob_floor() {
    if constexpr (std::is_same_v<T, float>)
        return 1e-6;
    else
        return kProbFloor;
}

// Per-block bit-1 marginals from block-word probabilities, flattened and
// stripped of padding, then LLR l = log((1-p)/p) with p clamped so l stays
// inside +-L_max.
template <typename T>
ad::Tensor<T> f_m2d_t(ad::Tape<T>& tape, ad::Tensor<T> probs, const BitWordTable& table,
                      const BlockLayout& layout) {
    std::vector<T> words(table.words.begin(), table.words.end());
    auto q = tape.constant({std::size_t(1) << table.m, table.m}, std::move(words));
    auto marg = tape.matmul(probs, q);                       // [n_b, m]
    auto p = flatten_strip_t(tape, marg, layout);            // [1, n]
    p = tape.clip(p, prob_floor<T>(), 1.0 - prob_floor<T>());
    auto one_minus = tape.add_scalar(tape.neg(p), 1.0);
    return tape.sub(tape.log(one_minus), tape.log(p));
}

// Bit-1 marginals only (used by the decoder-free training loss).
template <typename T>
ad::Tensor<T> f_m2d_marginals_t(ad::Tape<T>& tape, ad::Tensor<T> probs, const BitWordTable& table,
                                const BlockLayout& layout) {
    std::vector<T> words(table.words.begin(), table.words.end());
    auto q = tape.constant({std::size_t(1) << table.m, table.m}, std::move(words));
    auto p = flatten_strip_t(tape, tape.matmul(probs, q), layout);
    return tape.clip(p, prob_floor<T>(), 1.0 - prob_floor<T>());
}

// Posterior-mean symbol under l = log P(0)/P(1): E[2c-1 | l] = -tanh(l/2).
template <typename T>
ad::Tensor<T> f_d2m_t(ad::Tape<T>& tape, ad::Tensor<T> x) {
    return tape.neg(tape.tanh(tape.mul_scalar(x, 0.5)));
}

struct BlockProbabilities {
    BlockLayout layout;
    std::vector<double> data;  // n_b x 2^m
};

inline LlrVector f_m2d(const BlockProbabilities& probs, const BitWordTable& table) {
    ad::Tape<double> tape;
    auto p = tape.constant({probs.layout.n_b, std::size_t(1) << table.m},
                           std::vector<double>(probs.data));
    auto l = f_m2d_t(tape, p, table, probs.layout);
    return LlrVector{l.values()};
}

inline std::vector<double> f_d2m(const std::vector<double>& x) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = -std::tanh(0.5 * x[i]);
    return out;
}

// ------------------------------------------------------ power machinery --

template <typename T>
struct PowerStats {
    std::vector<T> mu, sigma;
    bool valid = false;
};

inline constexpr double kPowerEps = 1e-8;

// Batch mode: statistics from the batch itself (differentiable), running
// buffers updated with momentum 0.1.
template <typename T>
ad::Tensor<T> power_normalize_batch(ad::Tape<T>& tape, ad::Tensor<T> s, TransCoderModel<T>* model) {
    if (s.shape()[0] < 2)
        throw std::invalid_argument("power_normalize: batch mode needs at least two frames");
    auto mu = tape.mean_axis0(s);
    auto diff = tape.sub(s, mu);
    auto var = tape.mean_axis0(tape.mul(diff, diff));
    auto sd = tape.sqrt(var);
    auto out = tape.div(diff, tape.add_scalar(sd, kPowerEps));
    if (model) {
        auto* bmu = model->buffers.find("enc.power_mu");
        auto* bsd = model->buffers.find("enc.power_sigma");
        const auto& muv = mu.values();
        const auto& sdv = sd.values();
        for (std::size_t i = 0; i < bmu->data.size(); ++i) {
            bmu->data[i] = static_cast<T>(0.9 * bmu->data[i] + 0.1 * muv[i]);
            bsd->data[i] = static_cast<T>(0.9 * bsd->data[i] + 0.1 * sdv[i]);
        }
    }
    return out;
}

template <typename T>
ad::Tensor<T> power_normalize_frozen(ad::Tape<T>& tape, ad::Tensor<T> s, const PowerStats<T>& stats) {
    if (!stats.valid) throw std::invalid_argument("power_normalize: frozen statistics missing");
    const std::size_t n = s.shape()[1];
    if (stats.mu.size() != n) throw std::invalid_argument("power_normalize: statistics length mismatch");
    auto mu = tape.constant({1, n}, std::vector<T>(stats.mu));
    auto sd = tape.constant({1, n}, std::vector<T>(stats.sigma));
    return tape.div(tape.sub(s, mu), tape.add_scalar(sd, kPowerEps));
}

template <typename T>
ad::Tensor<T> power_realloc(ad::Tape<T>& tape, ad::Tensor<T> s_norm, ad::Tensor<T> rho,
                            std::size_t n) {
    const auto& rv = rho.values();
    double ss = 0.0;
    for (auto v : rv) ss += static_cast<double>(v) * v;
    if (std::fabs(ss - static_cast<double>(n)) > 1e-6 * static_cast<double>(n))
        throw std::invalid_argument("power_realloc: sum rho^2 = " + std::to_string(ss) +
                                    " violates the power constraint");
    return tape.mul(s_norm, rho);
}

// ------------------------------------------------------- module wiring --

// E_T trunk up to the raw (pre-normalization) symbols of one frame.
template <typename T>
ad::Tensor<T> encoder_trunk(ModuleForward<T>& fwd, const std::vector<int>& codeword, double sigma) {
    const ModelConfig& cfg = fwd.cfg();
    const BlockLayout layout = cfg.layout();
    if (codeword.size() != cfg.n) throw std::invalid_argument("encoder: codeword length mismatch");
    std::vector<T> premod(cfg.n);
    for (std::size_t i = 0; i < cfg.n; ++i) premod[i] = codeword[i] ? T(1) : T(-1);
    auto row = fwd.tape().constant({1, cfg.n}, std::move(premod));
    auto blocks = partition_pad_t(fwd.tape(), row, layout);
    auto h = fwd.block_trunk(blocks, sigma, "enc", cfg.enc_layers);
    auto symbols = fwd.affine(h, "enc.fmap");  // [n_b, m]
    return flatten_strip_t(fwd.tape(), symbols, layout);
}

// D_T: noisy frame row [1,n] -> block probabilities [n_b, 2^m].
template <typename T>
ad::Tensor<T> decoder_forward(ModuleForward<T>& fwd, ad::Tensor<T> y_row, double sigma) {
    const ModelConfig& cfg = fwd.cfg();
    auto blocks = partition_pad_t(fwd.tape(), y_row, cfg.layout());
    auto h = fwd.block_trunk(blocks, sigma, "dec", cfg.dec_layers);
    return fwd.tape().softmax(fwd.affine(h, "dec.fmap"));
}

// D_T^rf: channel output and rescaled reliabilities, concatenated per block.
template <typename T>
ad::Tensor<T> refine_forward(ModuleForward<T>& fwd, ad::Tensor<T> y_row, ad::Tensor<T> xhat_row,
                             double sigma) {
    const ModelConfig& cfg = fwd.cfg();
    const BlockLayout layout = cfg.layout();
    auto yb = partition_pad_t(fwd.tape(), y_row, layout);
    auto xb = partition_pad_t(fwd.tape(), xhat_row, layout);
    auto blocks = fwd.tape().concat_cols({yb, xb});  // [n_b, 2m]
    auto h = fwd.block_trunk(blocks, sigma, "rf", cfg.dec_layers);
    return fwd.tape().softmax(fwd.affine(h, "rf.fmap"));
}

}  // namespace transcoder
