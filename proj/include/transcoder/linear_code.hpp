#pragma once

// Binary linear block codes: parity-check / generator matrices, the Tanner
// graph used by BP, encoding, syndromes, and codeword enumeration. Generator
// matrices are always derived from H by GF(2) elimination; the elimination's
// column bookkeeping gives the information positions used to read a message
// back out of a codeword estimate.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "transcoder/gf2.hpp"
#include "transcoder/rng.hpp"

namespace transcoder {

struct CodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParityCheckMatrix {
    BitMatrix bits;  // (n-k) x n, full row rank

    std::size_t rows() const { return bits.rows(); }
    std::size_t cols() const { return bits.cols(); }

    static ParityCheckMatrix from_matrix(BitMatrix m) {
        for (std::size_t r = 0; r < m.rows(); ++r)
            if (m.row_weight(r) == 0)
                throw CodeError("parity-check matrix has an all-zero row (row " + std::to_string(r) + ")");
        if (m.rank() != m.rows())
            throw CodeError("parity-check matrix is not full row rank (rank " +
                            std::to_string(m.rank()) + " of " + std::to_string(m.rows()) + " rows)");
        return ParityCheckMatrix{std::move(m)};
    }
};

struct GeneratorMatrix {
    BitMatrix bits;  // k x n

    std::size_t rows() const { return bits.rows(); }
    std::size_t cols() const { return bits.cols(); }
};

// Sparse adjacency view of H. Edges are indexed in (check, column) order so
// check-side message blocks are contiguous; var_edges maps the same edges
// grouped per variable.
struct TannerGraph {
    std::size_t n_var = 0, n_check = 0, n_edges = 0;
    std::vector<std::vector<std::size_t>> check_edges;  // per check: edge ids (ascending)
    std::vector<std::vector<std::size_t>> var_edges;    // per variable: edge ids
    std::vector<std::size_t> edge_var;                  // edge id -> variable
    std::vector<std::size_t> edge_check;                // edge id -> check

    static TannerGraph from_parity(const BitMatrix& h) {
        TannerGraph g;
        g.n_var = h.cols();
        g.n_check = h.rows();
        g.check_edges.resize(g.n_check);
        g.var_edges.resize(g.n_var);
        for (std::size_t r = 0; r < h.rows(); ++r)
            for (std::size_t c = 0; c < h.cols(); ++c)
                if (h.get(r, c)) {
                    const std::size_t e = g.n_edges++;
                    g.check_edges[r].push_back(e);
                    g.var_edges[c].push_back(e);
                    g.edge_var.push_back(c);
                    g.edge_check.push_back(r);
                }
        return g;
    }

    BitMatrix to_parity() const {
        BitMatrix h(n_check, n_var);
        for (std::size_t e = 0; e < n_edges; ++e) h.set(edge_check[e], edge_var[e], true);
        return h;
    }
};

// Systematic-form elimination of H. Pivot columns carry the parity bits,
// the remaining k columns are the information positions.
inline GeneratorMatrix generator_from_parity(const ParityCheckMatrix& h,
                                             std::vector<std::size_t>* info_positions = nullptr) {
    BitMatrix red = h.bits;
    const std::vector<std::size_t> pivots = red.rref();
    if (pivots.size() != h.rows())
        throw CodeError("generator_from_parity: H is rank deficient");

    const std::size_t n = h.cols();
    const std::size_t k = n - h.rows();
    std::vector<bool> is_pivot(n, false);
    for (auto p : pivots) is_pivot[p] = true;
    std::vector<std::size_t> info;
    for (std::size_t c = 0; c < n; ++c)
        if (!is_pivot[c]) info.push_back(c);

    // Codeword for info word e_j: info bits e_j, parity bit of pivot row r
    // equals red[r][info_j] (since red * c^T = 0 and red is reduced).
    BitMatrix g(k, n);
    for (std::size_t j = 0; j < k; ++j) {
        g.set(j, info[j], true);
        for (std::size_t r = 0; r < pivots.size(); ++r)
            if (red.get(r, info[j])) g.set(j, pivots[r], true);
    }
    if (info_positions) *info_positions = info;
    return GeneratorMatrix{std::move(g)};
}

class LinearCode {
  public:
    LinearCode(std::string name, ParityCheckMatrix h)
        : name_(std::move(name)), h_(std::move(h)) {
        n_ = h_.cols();
        k_ = n_ - h_.rows();
        if (k_ == 0 || k_ >= n_) throw CodeError("code dimension out of range: k=" + std::to_string(k_));
        g_ = generator_from_parity(h_, &info_positions_);
        if (!g_.bits.mul_transpose(h_.bits).is_zero())
            throw CodeError("derived generator does not annihilate H");
        graph_ = TannerGraph::from_parity(h_.bits);
    }

    const std::string& name() const { return name_; }
    std::size_t n() const { return n_; }
    std::size_t k() const { return k_; }
    double rate() const { return static_cast<double>(k_) / static_cast<double>(n_); }
    const ParityCheckMatrix& h() const { return h_; }
    const GeneratorMatrix& g() const { return g_; }
    const TannerGraph& graph() const { return graph_; }
    const std::vector<std::size_t>& info_positions() const { return info_positions_; }

    BitVector encode(const BitVector& b) const {
        if (b.size() != k_) throw CodeError("encode: message length mismatch");
        return g_.bits.left_mul(b);
    }

    std::vector<int> encode_bits(const std::vector<int>& b) const {
        return encode(BitVector::from_bits(b)).to_bits();
    }

    BitVector syndrome(const BitVector& c_hat) const {
        if (c_hat.size() != n_) throw CodeError("syndrome: word length mismatch");
        return h_.bits.right_mul(c_hat);
    }

    bool is_codeword(const BitVector& c_hat) const { return !syndrome(c_hat).any(); }

    BitVector extract_message(const BitVector& c_hat) const {
        BitVector b(k_);
        for (std::size_t j = 0; j < k_; ++j) b.set(j, c_hat.get(info_positions_[j]));
        return b;
    }

  private:
    std::string name_;
    ParityCheckMatrix h_;
    GeneratorMatrix g_;
    TannerGraph graph_;
    std::vector<std::size_t> info_positions_;
    std::size_t n_ = 0, k_ = 0;
};

// Exhaustive enumeration when 2^k fits below cap, otherwise uniform random
// messages (`count` draws from the given stream).
class CodewordEnumerator {
  public:
    CodewordEnumerator(const LinearCode& code, std::uint64_t cap,
                       std::uint64_t sample_count = 0, std::uint64_t seed = 0)
        : code_(code), seed_(seed) {
        exhaustive_ = code.k() < 63 && (std::uint64_t(1) << code.k()) <= cap;
        total_ = exhaustive_ ? (std::uint64_t(1) << code.k()) : sample_count;
        if (!exhaustive_ && sample_count == 0)
            throw CodeError("enumerate_codewords: cap below 2^k requires a sample count");
    }

    bool exhaustive() const { return exhaustive_; }
    std::uint64_t size() const { return total_; }

    BitVector message(std::uint64_t i) const {
        BitVector b(code_.k());
        if (exhaustive_) {
            for (std::size_t j = 0; j < code_.k(); ++j) b.set(j, (i >> j) & 1u);
        } else {
            CounterRng rng(seed_, /*stream=*/0x656e756du, i);
            for (std::size_t j = 0; j < code_.k(); ++j) b.set(j, rng.next_bit());
        }
        return b;
    }

    BitVector codeword(std::uint64_t i) const { return code_.encode(message(i)); }

  private:
    const LinearCode& code_;
    std::uint64_t seed_;
    bool exhaustive_ = false;
    std::uint64_t total_ = 0;
};

}  // namespace transcoder
