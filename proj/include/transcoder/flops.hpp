#pragma once

// Analytic operation counts (multiplications or additions) for BP decoding,
// the TransCoder modules, and the ECCT / CrossMPT transformer decoders.
// Exact integer formulas; a helper compares a computed count against a
// rounded display string like "36k" or "1.2M" at that display's precision.
//
// n_pc is the number of parity checks (H rows); for codes whose published H
// carries redundant rows this exceeds n - k, so it is a free parameter here.

#include <cctype>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace transcoder {

struct FlopParams {
    std::uint64_t n = 0;        // code length
    std::uint64_t n_pc = 0;     // parity checks (H rows)
    std::uint64_t m = 3;        // TransCoder block size
    std::uint64_t d_model = 16; // TransCoder embedding
    std::uint64_t d_cm = 128;   // ECCT / CrossMPT embedding
    std::uint64_t h = 8;        // ECCT / CrossMPT attention heads
    std::uint64_t edges = 0;    // Tanner graph edges E

    std::uint64_t n_b() const { return (n + m - 1) / m; }
};

namespace flops {

inline std::uint64_t bp_iteration(const FlopParams& p) { return p.edges; }

inline std::uint64_t bp_total(const FlopParams& p, std::uint64_t iterations) {
    return p.edges * iterations;
}

inline std::uint64_t transcoder_layer(const FlopParams& p) {
    const std::uint64_t nb = p.n_b(), d = p.d_model;
    return 12 * nb * d * d + nb * nb * d + 2 * nb * nb;
}

inline std::uint64_t transcoder_fe_embedding(const FlopParams& p) {
    const std::uint64_t nb = p.n_b(), d = p.d_model;
    return 12 * nb * d * d + 3 * p.m * nb * d;
}

inline std::uint64_t transcoder_module(const FlopParams& p, std::uint64_t layers) {
    return layers * transcoder_layer(p) + transcoder_fe_embedding(p);
}

inline std::uint64_t transcoder_encoder(const FlopParams& p) { return transcoder_module(p, 2); }
inline std::uint64_t transcoder_decoder(const FlopParams& p) { return transcoder_module(p, 3); }

inline std::uint64_t crossmpt_layer(const FlopParams& p) {
    return (11 * p.n + 13 * p.n_pc) * p.d_cm * p.d_cm + 4 * p.n_pc * p.n * (p.d_cm + p.h);
}

inline std::uint64_t crossmpt_final_embedding(const FlopParams& p) {
    return p.n * (p.n + p.n_pc);
}

inline std::uint64_t crossmpt_decoder(const FlopParams& p) {
    return 6 * crossmpt_layer(p) + crossmpt_final_embedding(p);
}

inline std::uint64_t ecct_layer(const FlopParams& p) {
    const std::uint64_t s = p.n + p.n_pc;
    return 12 * s * p.d_cm * p.d_cm + 2 * s * s * (p.d_cm + p.h);
}

inline std::uint64_t ecct_final_embedding(const FlopParams& p) {
    const std::uint64_t s = p.n + p.n_pc;
    return s * s;
}

inline std::uint64_t ecct_decoder(const FlopParams& p) {
    return 6 * ecct_layer(p) + ecct_final_embedding(p);
}

}  // namespace flops

// Parse a display like "726", "36k", "1.2M", "278M" into (value, granularity)
// where granularity is one unit in the last printed digit.
struct DisplayCount {
    double value = 0.0;
    double granularity = 1.0;
};

inline DisplayCount parse_display_count(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty display count");
    double mult = 1.0;
    std::string digits = text;
    switch (digits.back()) {
        case 'k': mult = 1e3; digits.pop_back(); break;
        case 'M': mult = 1e6; digits.pop_back(); break;
        case 'G': mult = 1e9; digits.pop_back(); break;
        default: break;
    }
    double granularity = mult;
    const auto dot = digits.find('.');
    if (dot != std::string::npos) {
        const std::size_t decimals = digits.size() - dot - 1;
        for (std::size_t i = 0; i < decimals; ++i) granularity /= 10.0;
    }
    for (char ch : digits)
        if (!std::isdigit(static_cast<unsigned char>(ch)) && ch != '.')
            throw std::invalid_argument("bad display count: " + text);
    return DisplayCount{std::stod(digits) * mult, granularity};
}

// True when `computed` rounds/truncates to the display within one unit of
// its last printed digit.
inline bool matches_display(std::uint64_t computed, const std::string& display) {
    const DisplayCount d = parse_display_count(display);
    return std::abs(static_cast<double>(computed) - d.value) < d.granularity;
}

}  // namespace transcoder
