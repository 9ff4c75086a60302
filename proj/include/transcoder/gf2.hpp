#pragma once

// Word-packed GF(2) vectors and dense matrices. Everything the code layer
// needs: rank, systematic elimination, products, popcounts. Block lengths in
// this project stay <= 1024, so dense packing wins over sparse storage here;
// the Tanner graph (sparse adjacency) is built separately for BP.

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace transcoder {

class BitVector {
  public:
    BitVector() = default;
    explicit BitVector(std::size_t n) : n_(n), w_((n + 63) / 64, 0) {}

    static BitVector from_bits(const std::vector<int>& bits) {
        BitVector v(bits.size());
        for (std::size_t i = 0; i < bits.size(); ++i)
            if (bits[i]) v.set(i, true);
        return v;
    }

    std::size_t size() const { return n_; }

    bool get(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }

    void set(std::size_t i, bool b) {
        const std::uint64_t mask = std::uint64_t(1) << (i & 63);
        if (b)
            w_[i >> 6] |= mask;
        else
            w_[i >> 6] &= ~mask;
    }

    void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t(1) << (i & 63); }

    void xor_with(const BitVector& o) {
        for (std::size_t i = 0; i < w_.size(); ++i) w_[i] ^= o.w_[i];
    }

    std::size_t popcount() const {
        std::size_t c = 0;
        for (auto w : w_) c += std::popcount(w);
        return c;
    }

    bool any() const {
        for (auto w : w_)
            if (w) return true;
        return false;
    }

    // parity of <this, other>
    bool dot(const BitVector& o) const {
        std::uint64_t acc = 0;
        for (std::size_t i = 0; i < w_.size(); ++i) acc ^= w_[i] & o.w_[i];
        return std::popcount(acc) & 1u;
    }

    std::vector<int> to_bits() const {
        std::vector<int> out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = get(i) ? 1 : 0;
        return out;
    }

    bool operator==(const BitVector& o) const { return n_ == o.n_ && w_ == o.w_; }

  private:
    std::size_t n_ = 0;
    std::vector<std::uint64_t> w_;
};

class BitMatrix {
  public:
    BitMatrix() = default;
    BitMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), row_(rows, BitVector(cols)) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool get(std::size_t r, std::size_t c) const { return row_[r].get(c); }
    void set(std::size_t r, std::size_t c, bool b) { row_[r].set(c, b); }

    const BitVector& row(std::size_t r) const { return row_[r]; }
    BitVector& row(std::size_t r) { return row_[r]; }

    std::size_t popcount() const {
        std::size_t c = 0;
        for (auto& r : row_) c += r.popcount();
        return c;
    }

    std::size_t row_weight(std::size_t r) const { return row_[r].popcount(); }

    std::size_t col_weight(std::size_t c) const {
        std::size_t w = 0;
        for (std::size_t r = 0; r < rows_; ++r) w += get(r, c);
        return w;
    }

    BitMatrix transposed() const {
        BitMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c)
                if (get(r, c)) t.set(c, r, true);
        return t;
    }

    // this * other^T over GF(2)
    BitMatrix mul_transpose(const BitMatrix& other) const {
        if (cols_ != other.cols_)
            throw std::invalid_argument("gf2: dimension mismatch in mul_transpose");
        BitMatrix out(rows_, other.rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t s = 0; s < other.rows_; ++s)
                if (row_[r].dot(other.row_[s])) out.set(r, s, true);
        return out;
    }

    // row-vector * matrix: accumulate rows selected by v
    BitVector left_mul(const BitVector& v) const {
        if (v.size() != rows_) throw std::invalid_argument("gf2: dimension mismatch in left_mul");
        BitVector acc(cols_);
        for (std::size_t r = 0; r < rows_; ++r)
            if (v.get(r)) acc.xor_with(row_[r]);
        return acc;
    }

    // matrix * column-vector
    BitVector right_mul(const BitVector& v) const {
        if (v.size() != cols_) throw std::invalid_argument("gf2: dimension mismatch in right_mul");
        BitVector out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out.set(r, row_[r].dot(v));
        return out;
    }

    bool is_zero() const {
        for (auto& r : row_)
            if (r.any()) return false;
        return true;
    }

    std::size_t rank() const {
        BitMatrix m = *this;
        std::size_t r = 0;
        for (std::size_t c = 0; c < cols_ && r < rows_; ++c) {
            std::size_t piv = r;
            while (piv < rows_ && !m.get(piv, c)) ++piv;
            if (piv == rows_) continue;
            std::swap(m.row_[r], m.row_[piv]);
            for (std::size_t i = 0; i < rows_; ++i)
                if (i != r && m.get(i, c)) m.row_[i].xor_with(m.row_[r]);
            ++r;
        }
        return r;
    }

    // Reduced row echelon form in place; returns pivot column per reduced row.
    std::vector<std::size_t> rref() {
        std::vector<std::size_t> pivots;
        std::size_t r = 0;
        for (std::size_t c = 0; c < cols_ && r < rows_; ++c) {
            std::size_t piv = r;
            while (piv < rows_ && !get(piv, c)) ++piv;
            if (piv == rows_) continue;
            std::swap(row_[r], row_[piv]);
            for (std::size_t i = 0; i < rows_; ++i)
                if (i != r && get(i, c)) row_[i].xor_with(row_[r]);
            pivots.push_back(c);
            ++r;
        }
        return pivots;
    }

    bool operator==(const BitMatrix& o) const {
        return rows_ == o.rows_ && cols_ == o.cols_ && row_ == o.row_;
    }

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<BitVector> row_;
};

}  // namespace transcoder
