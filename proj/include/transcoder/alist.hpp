#pragma once

// Reader/writer for the alist text format (MacKay convention, 1-based
// indices). Both the exact-degree and the zero-padded per-node line variants
// are accepted. Parse failures report the offending line number.

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "transcoder/gf2.hpp"

namespace transcoder {

struct AlistError : std::runtime_error {
    AlistError(const std::string& path, int line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what) {}
};

namespace detail {

class LineTokens {
  public:
    explicit LineTokens(std::istream& in, const std::string& path) : in_(in), path_(path) {}

    // next non-empty line split into integers
    std::vector<long> next_line() {
        std::string line;
        while (std::getline(in_, line)) {
            ++lineno_;
            std::istringstream ss(line);
            std::vector<long> vals;
            long v;
            while (ss >> v) vals.push_back(v);
            std::string trailing;
            if (!ss.eof() && ss.fail()) {
                ss.clear();
                ss >> trailing;
                if (!trailing.empty()) fail("non-integer token '" + trailing + "'");
            }
            if (!vals.empty()) return vals;
        }
        fail("unexpected end of file");
        return {};
    }

    int lineno() const { return lineno_; }
    [[noreturn]] void fail(const std::string& what) const { throw AlistError(path_, lineno_, what); }

  private:
    std::istream& in_;
    std::string path_;
    int lineno_ = 0;
};

}  // namespace detail

// Returns the dense binary matrix described by an alist file. Shape is
// rows x cols with cols = n (first header number) and rows = number of
// checks (second header number).
inline BitMatrix load_alist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("alist: cannot open " + path);
    detail::LineTokens tok(in, path);

    auto header = tok.next_line();
    if (header.size() != 2) tok.fail("header must be 'n m'");
    const long n = header[0], m = header[1];
    if (n <= 0 || m <= 0) tok.fail("non-positive dimensions in header");

    auto maxdeg = tok.next_line();
    if (maxdeg.size() != 2) tok.fail("expected max column/row degrees");
    const long max_col = maxdeg[0], max_row = maxdeg[1];

    auto col_deg = tok.next_line();
    if (static_cast<long>(col_deg.size()) != n) tok.fail("expected " + std::to_string(n) + " column degrees");
    auto row_deg = tok.next_line();
    if (static_cast<long>(row_deg.size()) != m) tok.fail("expected " + std::to_string(m) + " row degrees");

    for (long d : col_deg)
        if (d < 0 || d > max_col) tok.fail("column degree outside [0, max]");
    for (long d : row_deg)
        if (d < 0 || d > max_row) tok.fail("row degree outside [0, max]");

    BitMatrix h(static_cast<std::size_t>(m), static_cast<std::size_t>(n));

    // per-column row indices
    for (long c = 0; c < n; ++c) {
        auto idx = tok.next_line();
        long listed = 0;
        for (long v : idx) {
            if (v == 0) continue;  // zero padding
            if (v < 1 || v > m) tok.fail("row index " + std::to_string(v) + " out of range");
            if (h.get(static_cast<std::size_t>(v - 1), static_cast<std::size_t>(c)))
                tok.fail("duplicate entry in column " + std::to_string(c + 1));
            h.set(static_cast<std::size_t>(v - 1), static_cast<std::size_t>(c), true);
            ++listed;
        }
        if (listed != col_deg[static_cast<std::size_t>(c)])
            tok.fail("column " + std::to_string(c + 1) + " lists " + std::to_string(listed) +
                     " entries, header says " + std::to_string(col_deg[static_cast<std::size_t>(c)]));
    }

    // per-row column indices; must agree with what the columns described
    for (long r = 0; r < m; ++r) {
        auto idx = tok.next_line();
        long listed = 0;
        for (long v : idx) {
            if (v == 0) continue;
            if (v < 1 || v > n) tok.fail("column index " + std::to_string(v) + " out of range");
            if (!h.get(static_cast<std::size_t>(r), static_cast<std::size_t>(v - 1)))
                tok.fail("row " + std::to_string(r + 1) + " disagrees with column lists");
            ++listed;
        }
        if (listed != row_deg[static_cast<std::size_t>(r)])
            tok.fail("row " + std::to_string(r + 1) + " lists " + std::to_string(listed) +
                     " entries, header says " + std::to_string(row_deg[static_cast<std::size_t>(r)]));
    }

    if (h.popcount() != [&] {
            std::size_t s = 0;
            for (long d : col_deg) s += static_cast<std::size_t>(d);
            return s;
        }())
        tok.fail("total entry count disagrees with degree lists");

    return h;
}

inline void save_alist(const BitMatrix& h, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("alist: cannot write " + path);
    const std::size_t m = h.rows(), n = h.cols();
    std::size_t max_col = 0, max_row = 0;
    for (std::size_t c = 0; c < n; ++c) max_col = std::max(max_col, h.col_weight(c));
    for (std::size_t r = 0; r < m; ++r) max_row = std::max(max_row, h.row_weight(r));
    out << n << " " << m << "\n" << max_col << " " << max_row << "\n";
    for (std::size_t c = 0; c < n; ++c) out << h.col_weight(c) << (c + 1 < n ? " " : "\n");
    for (std::size_t r = 0; r < m; ++r) out << h.row_weight(r) << (r + 1 < m ? " " : "\n");
    for (std::size_t c = 0; c < n; ++c) {
        bool first = true;
        for (std::size_t r = 0; r < m; ++r)
            if (h.get(r, c)) {
                out << (first ? "" : " ") << (r + 1);
                first = false;
            }
        out << "\n";
    }
    for (std::size_t r = 0; r < m; ++r) {
        bool first = true;
        for (std::size_t c = 0; c < n; ++c)
            if (h.get(r, c)) {
                out << (first ? "" : " ") << (c + 1);
                first = false;
            }
        out << "\n";
    }
}

}  // namespace transcoder
