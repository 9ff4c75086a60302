#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "transcoder/channel.hpp"

using namespace transcoder;

TEST_CASE("BPSK mapping") {
    auto f = bpsk_map({0, 1, 1});
    CHECK(f.symbols == std::vector<double>{-1.0, 1.0, 1.0});

    auto zero = bpsk_map(std::vector<int>(16, 0));
    CHECK(measure_average_power({zero}) == 1.0);

    // hard slicing at zero recovers the bits in a noiseless channel
    for (int bit : {0, 1}) {
        auto s = bpsk_map({bit});
        CHECK((s.symbols[0] > 0.0 ? 1 : 0) == bit);
    }
}

TEST_CASE("AWGN sampling") {
    auto s = bpsk_map(std::vector<int>(8, 0));

    SECTION("rejects nonpositive sigma") {
        CounterRng rng(1);
        CHECK_THROWS(awgn(s, 0.0, rng));
        CHECK_THROWS(awgn(s, -1.0, rng));
    }
    SECTION("tiny sigma reproduces the symbols") {
        CounterRng rng(1);
        auto y = awgn(s, 1e-12, rng);
        for (std::size_t i = 0; i < 8; ++i) CHECK(y.samples[i] == Catch::Approx(-1.0).margin(1e-9));
    }
    SECTION("same seed gives identical samples") {
        CounterRng a(42, rng_stream::kNoise, 7), b(42, rng_stream::kNoise, 7);
        auto ya = awgn(s, 0.8, a), yb = awgn(s, 0.8, b);
        CHECK(ya.samples == yb.samples);
    }
    SECTION("empirical variance matches sigma^2 within 1%") {
        const double sigma = 0.7;
        double sum = 0.0, sumsq = 0.0;
        const std::size_t count = 1'000'000;
        for (std::size_t f = 0; f < count / 8; ++f) {
            CounterRng rng(5, rng_stream::kNoise, f);
            auto y = awgn(s, sigma, rng);
            for (std::size_t i = 0; i < 8; ++i) {
                const double w = y.samples[i] - s.symbols[i];
                sum += w;
                sumsq += w * w;
            }
        }
        const double var = sumsq / count - (sum / count) * (sum / count);
        CHECK(var == Catch::Approx(sigma * sigma).epsilon(0.01));
    }
}

TEST_CASE("Eb/N0 to sigma conversion") {
    CHECK(sigma_from_ebn0(0.0, 1.0) == Catch::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(sigma_from_ebn0(4.0, 0.5) ==
          Catch::Approx(std::sqrt(1.0 / (2.0 * 0.5 * std::pow(10.0, 0.4)))).epsilon(1e-12));
    CHECK_THROWS(sigma_from_ebn0(4.0, 0.0));
    CHECK_THROWS(sigma_from_ebn0(4.0, 1.5));
}

TEST_CASE("channel LLRs are the exact two-Gaussian posterior ratio") {
    const double sigma = 0.8;
    NoisySignal y;
    y.sigma = sigma;
    y.samples = {0.0, 0.3, -1.2, 2.0, -0.05};
    auto l = channel_llr(y);

    SECTION("zero observation gives zero LLR") { CHECK(l.values[0] == 0.0); }

    SECTION("matches log Pr(c=0|y)/Pr(c=1|y) from the two densities to 1e-12") {
        auto density = [&](double yy, double s0) {
            return std::exp(-(yy - s0) * (yy - s0) / (2.0 * sigma * sigma));
        };
        for (std::size_t i = 0; i < y.samples.size(); ++i) {
            const double oracle =
                std::log(density(y.samples[i], -1.0) / density(y.samples[i], +1.0));
            CHECK(l.values[i] == Catch::Approx(oracle).margin(1e-12));
        }
    }

    SECTION("clamps at +-L_max") {
        NoisySignal big;
        big.sigma = sigma;
        big.samples = {sigma * sigma * 10.0, -sigma * sigma * 10.0};
        auto lb = channel_llr(big);
        CHECK(lb.values[0] == -kLlrMax);
        CHECK(lb.values[1] == kLlrMax);
    }

    SECTION("antisymmetric in y before clamping") {
        NoisySignal neg;
        neg.sigma = sigma;
        for (double v : y.samples) neg.samples.push_back(-v);
        auto ln = channel_llr(neg);
        for (std::size_t i = 0; i < y.samples.size(); ++i)
            CHECK(ln.values[i] == Catch::Approx(-l.values[i]).margin(1e-15));
    }
}

TEST_CASE("average power measurement") {
    CHECK_THROWS(measure_average_power({}));
    ModulatedFrame zero;
    zero.symbols.assign(4, 0.0);
    CHECK(measure_average_power({zero}) == 0.0);
    ModulatedFrame f;
    f.symbols = {2.0, 0.0};
    CHECK(measure_average_power({f, zero}) == Catch::Approx(1.0));
}

TEST_CASE("uncoded BPSK BER matches Q(1/sigma)") {
    for (double sigma : {0.5, 0.7, 1.0}) {
        const std::size_t bits = 100'000;
        std::size_t errors = 0;
        for (std::size_t f = 0; f < bits; ++f) {
            CounterRng rng(11, rng_stream::kNoise, f);
            const double y = 1.0 + sigma * rng.gaussian();  // bit 1 -> +1
            errors += (y < 0.0);
        }
        const double p = q_function(1.0 / sigma);
        const double se = std::sqrt(p * (1.0 - p) / bits);
        CHECK(std::fabs(static_cast<double>(errors) / bits - p) <= 3.0 * se);
    }
}
