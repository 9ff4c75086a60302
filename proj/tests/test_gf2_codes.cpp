#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>

#include "transcoder/alist.hpp"
#include "transcoder/linear_code.hpp"
#include "transcoder/polar.hpp"
#include "transcoder/registry.hpp"

using namespace transcoder;

namespace {

const std::string kDataDir = TRANSCODER_DATA_DIR;

BitMatrix hamming_h() {
    BitMatrix h(3, 7);
    const int rows[3][7] = {{1, 0, 1, 0, 1, 0, 1}, {0, 1, 1, 0, 0, 1, 1}, {0, 0, 0, 1, 1, 1, 1}};
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 7; ++c)
            if (rows[r][c]) h.set(r, c, true);
    return h;
}

std::string write_temp(const std::string& name, const std::string& contents) {
    const std::string path = "/tmp/transcoder_test_" + name;
    std::ofstream out(path);
    out << contents;
    return path;
}

}  // namespace

TEST_CASE("alist loads the Hamming(7,4) parity-check matrix") {
    const BitMatrix h = load_alist(kDataDir + "/codes/hamming_7_4.alist");
    REQUIRE(h.rows() == 3);
    REQUIRE(h.cols() == 7);
    CHECK(h.popcount() == 12);
    CHECK(h == hamming_h());
}

TEST_CASE("alist rejects degree disagreements with a line number") {
    // column 1 claims degree 2 but lists a single entry
    const std::string path = write_temp("bad_degree.alist",
                                        "3 2\n2 2\n2 1 1\n2 1\n1\n1 2\n2\n1 2\n3\n");
    try {
        load_alist(path);
        FAIL("expected a parse error");
    } catch (const AlistError& e) {
        const std::string what = e.what();
        CHECK(what.find(path + ":") != std::string::npos);
        CHECK(what.find("column 1") != std::string::npos);
    }
}

TEST_CASE("alist rejects out-of-range indices") {
    const std::string path = write_temp("bad_index.alist", "2 2\n1 1\n1 1\n1 1\n3\n2\n1\n2\n");
    REQUIRE_THROWS_AS(load_alist(path), AlistError);
}

TEST_CASE("the LDPC(49,24) database file is full rank with 147 edges") {
    const BitMatrix h = load_alist(kDataDir + "/codes/ldpc_49_24.alist");
    REQUIRE(h.rows() == 25);
    REQUIRE(h.cols() == 49);
    CHECK(h.popcount() == 147);
    CHECK(h.rank() == 25);
}

TEST_CASE("generator derived from Hamming H annihilates H and has rank k") {
    auto h = ParityCheckMatrix::from_matrix(hamming_h());
    auto g = generator_from_parity(h);
    REQUIRE(g.rows() == 4);
    REQUIRE(g.cols() == 7);
    CHECK(g.bits.mul_transpose(h.bits).is_zero());
    CHECK(g.bits.rank() == 4);
}

TEST_CASE("repetition code generator") {
    BitMatrix h(1, 2);
    h.set(0, 0, true);
    h.set(0, 1, true);
    auto g = generator_from_parity(ParityCheckMatrix::from_matrix(h));
    REQUIRE(g.rows() == 1);
    CHECK(g.bits.get(0, 0));
    CHECK(g.bits.get(0, 1));
}

TEST_CASE("generator identity holds for random full-rank parity checks") {
    std::size_t tested = 0;
    for (std::uint64_t seed = 0; tested < 100 && seed < 400; ++seed) {
        CounterRng rng(seed, 17);
        BitMatrix h(10, 20);
        for (std::size_t r = 0; r < 10; ++r)
            for (std::size_t c = 0; c < 20; ++c)
                if (rng.next_double() < 0.3) h.set(r, c, true);
        bool ok = h.rank() == 10;
        for (std::size_t r = 0; ok && r < 10; ++r) ok = h.row_weight(r) > 0;
        if (!ok) continue;
        auto g = generator_from_parity(ParityCheckMatrix::from_matrix(h));
        REQUIRE(g.bits.mul_transpose(h.bits).is_zero());
        ++tested;
    }
    REQUIRE(tested == 100);
}

TEST_CASE("rank-deficient parity checks are rejected") {
    BitMatrix h(2, 3);
    h.set(0, 0, true);
    h.set(0, 1, true);
    h.set(1, 0, true);
    h.set(1, 1, true);  // duplicate row
    CHECK_THROWS_AS(ParityCheckMatrix::from_matrix(h), CodeError);
}

TEST_CASE("encoding and syndromes on Hamming(7,4)") {
    LinearCode code("hamming", ParityCheckMatrix::from_matrix(hamming_h()));
    REQUIRE(code.n() == 7);
    REQUIRE(code.k() == 4);

    SECTION("all-zero message encodes to the all-zero codeword") {
        auto c = code.encode_bits({0, 0, 0, 0});
        CHECK(c == std::vector<int>(7, 0));
    }
    SECTION("every message encodes to a codeword, and the message reads back") {
        for (int m = 0; m < 16; ++m) {
            BitVector b(4);
            for (int j = 0; j < 4; ++j) b.set(j, (m >> j) & 1);
            auto c = code.encode(b);
            CHECK_FALSE(code.syndrome(c).any());
            CHECK(code.extract_message(c) == b);
        }
    }
    SECTION("flipping bit i moves the syndrome to column i of H") {
        auto c = code.encode(BitVector::from_bits({1, 0, 1, 1}));
        for (std::size_t i = 0; i < 7; ++i) {
            BitVector flipped = c;
            flipped.flip(i);
            auto s = code.syndrome(flipped);
            for (std::size_t r = 0; r < 3; ++r) CHECK(s.get(r) == hamming_h().get(r, i));
        }
    }
    SECTION("syndrome is nonzero exactly off the codeword set") {
        std::set<std::vector<int>> codewords;
        for (int m = 0; m < 16; ++m) {
            BitVector b(4);
            for (int j = 0; j < 4; ++j) b.set(j, (m >> j) & 1);
            codewords.insert(code.encode(b).to_bits());
        }
        REQUIRE(codewords.size() == 16);
        for (int w = 0; w < 128; ++w) {
            BitVector v(7);
            for (int j = 0; j < 7; ++j) v.set(j, (w >> j) & 1);
            const bool member = codewords.count(v.to_bits()) > 0;
            CHECK(code.syndrome(v).any() == !member);
        }
    }
    SECTION("length mismatches are rejected") {
        CHECK_THROWS_AS(code.encode(BitVector(3)), CodeError);
        CHECK_THROWS_AS(code.syndrome(BitVector(6)), CodeError);
    }
}

TEST_CASE("Tanner graph matches H and round-trips") {
    const BitMatrix h = load_alist(kDataDir + "/codes/ldpc_49_24.alist");
    const auto g = TannerGraph::from_parity(h);
    CHECK(g.n_edges == h.popcount());
    CHECK(g.to_parity() == h);
    for (std::size_t e = 0; e < g.n_edges; ++e)
        CHECK(h.get(g.edge_check[e], g.edge_var[e]));
}

TEST_CASE("codeword enumeration") {
    LinearCode code("hamming", ParityCheckMatrix::from_matrix(hamming_h()));
    SECTION("exhaustive over 2^k") {
        CodewordEnumerator en(code, 1 << 16);
        REQUIRE(en.exhaustive());
        REQUIRE(en.size() == 16);
        std::set<std::vector<int>> seen;
        for (std::uint64_t i = 0; i < en.size(); ++i) seen.insert(en.codeword(i).to_bits());
        CHECK(seen.size() == 16);
    }
    SECTION("BCH(31,16) enumerates 65536 codewords") {
        LinearCode bch("bch", ParityCheckMatrix::from_matrix(
                                  load_alist(kDataDir + "/codes/bch_31_16.alist")));
        CodewordEnumerator en(bch, std::uint64_t(1) << 16);
        REQUIRE(en.exhaustive());
        CHECK(en.size() == 65536);
    }
    SECTION("cap below 2^k switches to sampling") {
        CodewordEnumerator en(code, 8, 5, 3);
        REQUIRE_FALSE(en.exhaustive());
        REQUIRE(en.size() == 5);
        for (std::uint64_t i = 0; i < 5; ++i)
            CHECK_FALSE(code.syndrome(en.codeword(i)).any());
    }
}

TEST_CASE("polar encoding") {
    SECTION("all-zero info bits give the all-zero codeword") {
        auto spec = PolarCodeSpec::from_frozen(8, {0, 1, 2, 4});
        CHECK(polar_encode(spec, {0, 0, 0, 0}) == std::vector<int>(8, 0));
    }
    SECTION("N=2, frozen {0}") {
        auto spec = PolarCodeSpec::from_frozen(2, {0});
        CHECK(polar_encode(spec, {1}) == std::vector<int>{1, 1});
    }
    SECTION("N=4, frozen {0,1}, b=[1,0] expands by two kernel stages") {
        auto spec = PolarCodeSpec::from_frozen(4, {0, 1});
        // u = [0,0,1,0]; c = u F^{(x)2} = third row of the transform
        CHECK(polar_encode(spec, {1, 0}) == std::vector<int>{1, 0, 1, 0});
    }
    SECTION("encoding is linear") {
        auto spec = polar_construct(64, 32, 2.0);
        for (std::uint64_t s = 0; s < 50; ++s) {
            CounterRng rng(s, 23);
            std::vector<int> a(32), b(32), ab(32);
            for (std::size_t i = 0; i < 32; ++i) {
                a[i] = rng.next_bit();
                b[i] = rng.next_bit();
                ab[i] = a[i] ^ b[i];
            }
            auto ca = polar_encode(spec, a);
            auto cb = polar_encode(spec, b);
            auto cab = polar_encode(spec, ab);
            for (std::size_t i = 0; i < 64; ++i) CHECK(cab[i] == (ca[i] ^ cb[i]));
        }
    }
    SECTION("length and power-of-two validation") {
        auto spec = PolarCodeSpec::from_frozen(8, {0, 1, 2, 4});
        CHECK_THROWS(polar_encode(spec, {1, 0, 1}));
        CHECK_THROWS(PolarCodeSpec::from_frozen(12, {0, 1}));
    }
}

TEST_CASE("frozen-set files round-trip and registry resolves codes") {
    auto spec = polar_construct(128, 64, 2.0);
    const std::string path = "/tmp/transcoder_test_frozen.txt";
    polar_save_frozen(spec, path);
    auto back = polar_load_frozen(128, path);
    CHECK(back.frozen == spec.frozen);

    auto handle = load_code("polar_128_64", kDataDir);
    REQUIRE(handle.is_polar());
    CHECK(handle.polar->frozen == spec.frozen);  // shipped file matches construction

    auto ldpc = load_code("ldpc_49_24", kDataDir);
    REQUIRE(ldpc.linear != nullptr);
    CHECK(ldpc.n() == 49);
    CHECK(ldpc.k() == 24);
    CHECK_THROWS(load_code("nonexistent_code", kDataDir));
}

TEST_CASE("polar generator matrix matches the transform and annihilates its H") {
    auto spec = polar_construct(16, 8, 2.0);
    auto g = polar_generator(spec);
    auto h = polar_parity(spec);
    CHECK(g.mul_transpose(h).is_zero());
    CHECK(g.rank() == 8);
    CHECK(h.rank() == 8);
}
