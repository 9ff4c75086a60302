#pragma once

// Minimal reverse-mode engine on a dynamic tape. Values are computed eagerly
// when an op node is created; backward() walks the tape once in reverse
// creation order (creation order is topological by construction). Tensors
// are cheap handles (tape pointer + node id). The scalar type is a template
// parameter: tests run the engine in double for finite-difference checks,
// training/eval default to float.
//
// Elementwise broadcasting is restricted to leading-1 dimensions, which in
// row-major storage is a modulo lookup; everything that would need more
// (layer norm, softmax) is a fused op with a hand-written backward.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace transcoder::ad {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& s) {
    std::size_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
    return out + "]";
}

struct AutodiffError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Op {
    Leaf, Detach,
    Add, Sub, Mul, Div,
    Neg, Relu, Tanh, Atanh, Sigmoid, Exp, Log, Sqrt, Abs, Clip,
    AddScalar, MulScalar,
    MatMul, Transpose, Reshape,
    Concat0, Concat1, Slice0, Slice1, GatherCols, TakePerRow, PairwiseAbsDiff,
    Sum, Mean, SumAxis0, MeanAxis0, SumAxis1,
    Softmax, LogSoftmax, LayerNorm,
};

template <typename T>
class Tape;

template <typename T>
struct Tensor {
    Tape<T>* tape = nullptr;
    std::size_t id = 0;

    const Shape& shape() const;
    const std::vector<T>& values() const;
    std::size_t size() const { return values().size(); }
    T item() const;
};

template <typename T>
class Tape {
  public:
    struct Node {
        Op op = Op::Leaf;
        Shape shape;
        std::vector<T> val;
        std::vector<T> grad;
        std::vector<std::size_t> parents;
        std::vector<std::int64_t> iargs;
        std::vector<double> dargs;
        bool requires_grad = false;
    };

    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::size_t id) const { return nodes_[id]; }

    Tensor<T> leaf(Shape shape, std::vector<T> values, bool requires_grad) {
        if (numel(shape) != values.size())
            throw AutodiffError("leaf: shape " + shape_str(shape) + " does not match value count");
        Node n;
        n.op = Op::Leaf;
        n.shape = std::move(shape);
        n.val = std::move(values);
        n.requires_grad = requires_grad;
        return push(std::move(n));
    }

    Tensor<T> constant(Shape shape, std::vector<T> values) {
        return leaf(std::move(shape), std::move(values), false);
    }

    Tensor<T> scalar(T v, bool requires_grad = false) { return leaf({1}, {v}, requires_grad); }

    Tensor<T> detach(Tensor<T> a) {
        Node n;
        n.op = Op::Detach;
        n.shape = nodes_[a.id].shape;
        n.val = nodes_[a.id].val;
        n.requires_grad = false;
        return push(std::move(n));
    }

    // ---- elementwise binary with leading-1 broadcasting ----

    Tensor<T> add(Tensor<T> a, Tensor<T> b) { return binary(Op::Add, a, b); }
    Tensor<T> sub(Tensor<T> a, Tensor<T> b) { return binary(Op::Sub, a, b); }
    Tensor<T> mul(Tensor<T> a, Tensor<T> b) { return binary(Op::Mul, a, b); }
    Tensor<T> div(Tensor<T> a, Tensor<T> b) { return binary(Op::Div, a, b); }

    // ---- elementwise unary ----

    Tensor<T> neg(Tensor<T> a) { return unary(Op::Neg, a); }
    Tensor<T> relu(Tensor<T> a) { return unary(Op::Relu, a); }
    Tensor<T> tanh(Tensor<T> a) { return unary(Op::Tanh, a); }
    Tensor<T> atanh(Tensor<T> a) { return unary(Op::Atanh, a); }
    Tensor<T> sigmoid(Tensor<T> a) { return unary(Op::Sigmoid, a); }
    Tensor<T> exp(Tensor<T> a) { return unary(Op::Exp, a); }
    Tensor<T> log(Tensor<T> a) { return unary(Op::Log, a); }
    Tensor<T> sqrt(Tensor<T> a) { return unary(Op::Sqrt, a); }
    Tensor<T> abs(Tensor<T> a) { return unary(Op::Abs, a); }

    Tensor<T> clip(Tensor<T> a, double lo, double hi) {
        Node n = make_like(Op::Clip, a);
        n.dargs = {lo, hi};
        for (auto& v : n.val) v = std::clamp(v, static_cast<T>(lo), static_cast<T>(hi));
        return push(std::move(n));
    }

    Tensor<T> add_scalar(Tensor<T> a, double c) {
        Node n = make_like(Op::AddScalar, a);
        n.dargs = {c};
        for (auto& v : n.val) v += static_cast<T>(c);
        return push(std::move(n));
    }

    Tensor<T> mul_scalar(Tensor<T> a, double c) {
        Node n = make_like(Op::MulScalar, a);
        n.dargs = {c};
        for (auto& v : n.val) v *= static_cast<T>(c);
        return push(std::move(n));
    }

    // ---- linear algebra / structure ----

    Tensor<T> matmul(Tensor<T> a, Tensor<T> b) {
        const Node& na = nodes_[a.id];
        const Node& nb = nodes_[b.id];
        require_2d(na, "matmul lhs");
        require_2d(nb, "matmul rhs");
        if (na.shape[1] != nb.shape[0])
            throw AutodiffError("matmul: inner dimensions disagree, " + shape_str(na.shape) + " x " +
                                shape_str(nb.shape));
        const std::size_t r = na.shape[0], m = na.shape[1], c = nb.shape[1];
        Node n;
        n.op = Op::MatMul;
        n.shape = {r, c};
        n.parents = {a.id, b.id};
        n.requires_grad = na.requires_grad || nb.requires_grad;
        n.val.assign(r * c, T(0));
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                const T aij = na.val[i * m + j];
                if (aij == T(0)) continue;
                const T* brow = &nb.val[j * c];
                T* orow = &n.val[i * c];
                for (std::size_t l = 0; l < c; ++l) orow[l] += aij * brow[l];
            }
        return push(std::move(n));
    }

    Tensor<T> transpose(Tensor<T> a) {
        const Node& na = nodes_[a.id];
        require_2d(na, "transpose");
        const std::size_t r = na.shape[0], c = na.shape[1];
        Node n;
        n.op = Op::Transpose;
        n.shape = {c, r};
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        n.val.resize(r * c);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) n.val[j * r + i] = na.val[i * c + j];
        return push(std::move(n));
    }

    Tensor<T> reshape(Tensor<T> a, Shape shape) {
        const Node& na = nodes_[a.id];
        if (numel(shape) != na.val.size())
            throw AutodiffError("reshape: cannot view " + shape_str(na.shape) + " as " + shape_str(shape));
        Node n;
        n.op = Op::Reshape;
        n.shape = std::move(shape);
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        n.val = na.val;
        return push(std::move(n));
    }

    Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) { return concat(parts, 0); }
    Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) { return concat(parts, 1); }

    Tensor<T> concat(const std::vector<Tensor<T>>& parts, int axis) {
        if (parts.empty()) throw AutodiffError("concat: no inputs");
        if (axis != 0 && axis != 1) throw AutodiffError("concat: axis must be 0 or 1");
        const Node& first = nodes_[parts[0].id];
        require_2d(first, "concat");
        const std::size_t fixed = first.shape[axis == 0 ? 1 : 0];
        std::size_t total = 0;
        Node n;
        n.op = axis == 0 ? Op::Concat0 : Op::Concat1;
        for (auto& p : parts) {
            const Node& np = nodes_[p.id];
            require_2d(np, "concat");
            if (np.shape[axis == 0 ? 1 : 0] != fixed)
                throw AutodiffError("concat: mismatched shapes " + shape_str(first.shape) + " vs " +
                                    shape_str(np.shape));
            total += np.shape[axis];
            n.parents.push_back(p.id);
            n.requires_grad = n.requires_grad || np.requires_grad;
        }
        if (axis == 0) {
            n.shape = {total, fixed};
            n.val.reserve(total * fixed);
            for (auto& p : parts) {
                const auto& v = nodes_[p.id].val;
                n.val.insert(n.val.end(), v.begin(), v.end());
            }
        } else {
            n.shape = {fixed, total};
            n.val.assign(fixed * total, T(0));
            std::size_t off = 0;
            for (auto& p : parts) {
                const Node& np = nodes_[p.id];
                const std::size_t w = np.shape[1];
                for (std::size_t i = 0; i < fixed; ++i)
                    for (std::size_t j = 0; j < w; ++j) n.val[i * total + off + j] = np.val[i * w + j];
                off += w;
            }
        }
        return push(std::move(n));
    }

    Tensor<T> slice_rows(Tensor<T> a, std::size_t start, std::size_t len) { return slice(a, 0, start, len); }
    Tensor<T> slice_cols(Tensor<T> a, std::size_t start, std::size_t len) { return slice(a, 1, start, len); }

    Tensor<T> slice(Tensor<T> a, int axis, std::size_t start, std::size_t len) {
        const Node& na = nodes_[a.id];
        require_2d(na, "slice");
        if (axis != 0 && axis != 1) throw AutodiffError("slice: axis must be 0 or 1");
        if (start + len > na.shape[axis]) throw AutodiffError("slice: out of range");
        Node n;
        n.op = axis == 0 ? Op::Slice0 : Op::Slice1;
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        n.iargs = {static_cast<std::int64_t>(start), static_cast<std::int64_t>(len)};
        const std::size_t r = na.shape[0], c = na.shape[1];
        if (axis == 0) {
            n.shape = {len, c};
            n.val.assign(na.val.begin() + static_cast<std::ptrdiff_t>(start * c),
                         na.val.begin() + static_cast<std::ptrdiff_t>((start + len) * c));
        } else {
            n.shape = {r, len};
            n.val.resize(r * len);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < len; ++j) n.val[i * len + j] = na.val[i * c + start + j];
        }
        return push(std::move(n));
    }

    // out[:, j] = a[:, idx[j]]; duplicate indices allowed
    Tensor<T> gather_cols(Tensor<T> a, const std::vector<std::size_t>& idx) {
        const Node& na = nodes_[a.id];
        require_2d(na, "gather_cols");
        const std::size_t r = na.shape[0], c = na.shape[1];
        Node n;
        n.op = Op::GatherCols;
        n.shape = {r, idx.size()};
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        n.iargs.reserve(idx.size());
        for (auto j : idx) {
            if (j >= c) throw AutodiffError("gather_cols: index out of range");
            n.iargs.push_back(static_cast<std::int64_t>(j));
        }
        n.val.resize(r * idx.size());
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < idx.size(); ++j) n.val[i * idx.size() + j] = na.val[i * c + idx[j]];
        return push(std::move(n));
    }

    // out[i] = a[i, idx[i]], result shape [rows, 1]
    Tensor<T> take_per_row(Tensor<T> a, const std::vector<std::size_t>& idx) {
        const Node& na = nodes_[a.id];
        require_2d(na, "take_per_row");
        const std::size_t r = na.shape[0], c = na.shape[1];
        if (idx.size() != r) throw AutodiffError("take_per_row: one index per row required");
        Node n;
        n.op = Op::TakePerRow;
        n.shape = {r, 1};
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        n.val.resize(r);
        for (std::size_t i = 0; i < r; ++i) {
            if (idx[i] >= c) throw AutodiffError("take_per_row: index out of range");
            n.iargs.push_back(static_cast<std::int64_t>(idx[i]));
            n.val[i] = na.val[i * c + idx[i]];
        }
        return push(std::move(n));
    }

    // out[i, j] = |a[i] - centers[j]| for a of shape [r] or [r,1]
    Tensor<T> pairwise_abs_diff(Tensor<T> a, const std::vector<double>& centers) {
        const Node& na = nodes_[a.id];
        const std::size_t r = na.val.size();
        if (!(na.shape.size() == 1 || (na.shape.size() == 2 && na.shape[1] == 1)))
            throw AutodiffError("pairwise_abs_diff: input must be a column");
        Node n;
        n.op = Op::PairwiseAbsDiff;
        n.shape = {r, centers.size()};
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        n.dargs = centers;
        n.val.resize(r * centers.size());
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < centers.size(); ++j)
                n.val[i * centers.size() + j] =
                    std::fabs(static_cast<double>(na.val[i]) - centers[j]);
        return push(std::move(n));
    }

    // ---- reductions ----

    Tensor<T> sum(Tensor<T> a) {
        const Node& na = nodes_[a.id];
        Node n;
        n.op = Op::Sum;
        n.shape = {1};
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        T acc = T(0);
        for (auto v : na.val) acc += v;
        n.val = {acc};
        return push(std::move(n));
    }

    Tensor<T> mean(Tensor<T> a) {
        const Node& na = nodes_[a.id];
        Node n;
        n.op = Op::Mean;
        n.shape = {1};
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        T acc = T(0);
        for (auto v : na.val) acc += v;
        n.val = {static_cast<T>(acc / static_cast<T>(na.val.size()))};
        return push(std::move(n));
    }

    Tensor<T> sum_axis0(Tensor<T> a) { return reduce_axis0(Op::SumAxis0, a); }
    Tensor<T> mean_axis0(Tensor<T> a) { return reduce_axis0(Op::MeanAxis0, a); }

    Tensor<T> sum_axis1(Tensor<T> a) {
        const Node& na = nodes_[a.id];
        require_2d(na, "axis-1 reduction");
        const std::size_t r = na.shape[0], c = na.shape[1];
        Node n;
        n.op = Op::SumAxis1;
        n.shape = {r, 1};
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        n.val.assign(r, T(0));
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) n.val[i] += na.val[i * c + j];
        return push(std::move(n));
    }

    // ---- fused row ops ----

    Tensor<T> softmax(Tensor<T> a) { return rowwise(Op::Softmax, a); }
    Tensor<T> log_softmax(Tensor<T> a) { return rowwise(Op::LogSoftmax, a); }

    // Normalization over the last axis with eps = 1e-5; gain/bias shaped [1, cols].
    Tensor<T> layernorm(Tensor<T> a, Tensor<T> gain, Tensor<T> bias) {
        const Node& na = nodes_[a.id];
        const Node& ng = nodes_[gain.id];
        const Node& nb = nodes_[bias.id];
        require_2d(na, "layernorm");
        const std::size_t r = na.shape[0], c = na.shape[1];
        if (ng.val.size() != c || nb.val.size() != c)
            throw AutodiffError("layernorm: gain/bias must have one entry per column");
        Node n;
        n.op = Op::LayerNorm;
        n.shape = na.shape;
        n.parents = {a.id, gain.id, bias.id};
        n.requires_grad = na.requires_grad || ng.requires_grad || nb.requires_grad;
        n.val.resize(r * c);
        for (std::size_t i = 0; i < r; ++i) {
            const T* x = &na.val[i * c];
            T mu = T(0);
            for (std::size_t j = 0; j < c; ++j) mu += x[j];
            mu /= static_cast<T>(c);
            T var = T(0);
            for (std::size_t j = 0; j < c; ++j) var += (x[j] - mu) * (x[j] - mu);
            var /= static_cast<T>(c);
            const T inv = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
            for (std::size_t j = 0; j < c; ++j)
                n.val[i * c + j] = (x[j] - mu) * inv * ng.val[j] + nb.val[j];
        }
        return push(std::move(n));
    }

    static constexpr double kLayerNormEps = 1e-5;

    // ---- backward ----

    void backward(Tensor<T> loss) {
        const Node& nl = nodes_[loss.id];
        if (nl.val.size() != 1)
            throw AutodiffError("backward: loss must be scalar, got " + shape_str(nl.shape));
        if (backward_done_)
            throw AutodiffError("backward: tape already differentiated; rebuild the tape before "
                                "calling backward again");
        backward_done_ = true;
        for (auto& n : nodes_)
            if (n.requires_grad) n.grad.assign(n.val.size(), T(0));
        if (!nodes_[loss.id].requires_grad) return;  // nothing depends on a leaf with grads
        nodes_[loss.id].grad[0] = T(1);
        for (std::size_t idp = nodes_.size(); idp-- > 0;) {
            Node& n = nodes_[idp];
            if (!n.requires_grad || n.op == Op::Leaf) continue;
            backprop_node(n);
        }
    }

    const std::vector<T>& grad(Tensor<T> a) const {
        const Node& n = nodes_[a.id];
        if (n.grad.empty())
            throw AutodiffError("grad: no gradient stored for this tensor (requires_grad unset "
                                "or backward not run)");
        return n.grad;
    }

    bool backward_done() const { return backward_done_; }

    void clear() {
        nodes_.clear();
        backward_done_ = false;
    }

  private:
    std::vector<Node> nodes_;
    bool backward_done_ = false;

    Tensor<T> push(Node&& n) {
        nodes_.push_back(std::move(n));
        return Tensor<T>{this, nodes_.size() - 1};
    }

    static void require_2d(const Node& n, const char* what) {
        if (n.shape.size() != 2)
            throw AutodiffError(std::string(what) + ": expected 2-d tensor, got " + shape_str(n.shape));
    }

    Node make_like(Op op, Tensor<T> a) {
        const Node& na = nodes_[a.id];
        Node n;
        n.op = op;
        n.shape = na.shape;
        n.val = na.val;
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        return n;
    }

    Tensor<T> unary(Op op, Tensor<T> a) {
        Node n = make_like(op, a);
        switch (op) {
            case Op::Neg:
                for (auto& v : n.val) v = -v;
                break;
            case Op::Relu:
                for (auto& v : n.val) v = v > T(0) ? v : T(0);
                break;
            case Op::Tanh:
                for (auto& v : n.val) v = std::tanh(v);
                break;
            case Op::Atanh:
                for (auto& v : n.val) v = std::atanh(v);
                break;
            case Op::Sigmoid:
                for (auto& v : n.val) v = T(1) / (T(1) + std::exp(-v));
                break;
            case Op::Exp:
                for (auto& v : n.val) v = std::exp(v);
                break;
            case Op::Log:
                for (auto& v : n.val) v = std::log(v);
                break;
            case Op::Sqrt:
                for (auto& v : n.val) v = std::sqrt(v);
                break;
            case Op::Abs:
                for (auto& v : n.val) v = std::fabs(v);
                break;
            default:
                throw AutodiffError("unary: bad op");
        }
        return push(std::move(n));
    }

    // Broadcast layout: if the smaller operand's shape, right-aligned, matches
    // the larger with only leading ones, its flat index is out_index % numel.
    static void check_broadcast(const Shape& big, const Shape& small) {
        if (small.size() > big.size())
            throw AutodiffError("broadcast: rank mismatch " + shape_str(big) + " vs " + shape_str(small));
        const std::size_t off = big.size() - small.size();
        bool still_leading = true;
        for (std::size_t i = 0; i < small.size(); ++i) {
            if (small[i] == 1 && big[off + i] != 1) {
                if (!still_leading)
                    throw AutodiffError("broadcast: only leading-1 dimensions may broadcast, " +
                                        shape_str(big) + " vs " + shape_str(small));
                continue;
            }
            still_leading = false;
            if (small[i] != big[off + i])
                throw AutodiffError("broadcast: incompatible shapes " + shape_str(big) + " vs " +
                                    shape_str(small));
        }
    }

    Tensor<T> binary(Op op, Tensor<T> a, Tensor<T> b) {
        const Node& na = nodes_[a.id];
        const Node& nb = nodes_[b.id];
        const bool b_small = nb.val.size() <= na.val.size();
        const Node& big = b_small ? na : nb;
        const Node& small = b_small ? nb : na;
        check_broadcast(big.shape, small.shape);
        const std::size_t nsmall = small.val.size();

        Node n;
        n.op = op;
        n.shape = big.shape;
        n.parents = {a.id, b.id};
        n.requires_grad = na.requires_grad || nb.requires_grad;
        n.val.resize(big.val.size());
        for (std::size_t i = 0; i < n.val.size(); ++i) {
            const T av = na.val[b_small ? i : i % nsmall];
            const T bv = nb.val[b_small ? i % nsmall : i];
            switch (op) {
                case Op::Add: n.val[i] = av + bv; break;
                case Op::Sub: n.val[i] = av - bv; break;
                case Op::Mul: n.val[i] = av * bv; break;
                case Op::Div: n.val[i] = av / bv; break;
                default: throw AutodiffError("binary: bad op");
            }
        }
        return push(std::move(n));
    }

    Tensor<T> reduce_axis0(Op op, Tensor<T> a) {
        const Node& na = nodes_[a.id];
        require_2d(na, "axis-0 reduction");
        const std::size_t r = na.shape[0], c = na.shape[1];
        Node n;
        n.op = op;
        n.shape = {1, c};
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        n.val.assign(c, T(0));
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < c; ++j) n.val[j] += na.val[i * c + j];
        if (op == Op::MeanAxis0)
            for (auto& v : n.val) v /= static_cast<T>(r);
        return push(std::move(n));
    }

    Tensor<T> rowwise(Op op, Tensor<T> a) {
        const Node& na = nodes_[a.id];
        require_2d(na, "softmax");
        const std::size_t r = na.shape[0], c = na.shape[1];
        Node n;
        n.op = op;
        n.shape = na.shape;
        n.parents = {a.id};
        n.requires_grad = na.requires_grad;
        n.val.resize(r * c);
        for (std::size_t i = 0; i < r; ++i) {
            const T* x = &na.val[i * c];
            T mx = x[0];
            for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, x[j]);
            T denom = T(0);
            for (std::size_t j = 0; j < c; ++j) denom += std::exp(x[j] - mx);
            if (op == Op::Softmax) {
                for (std::size_t j = 0; j < c; ++j) n.val[i * c + j] = std::exp(x[j] - mx) / denom;
            } else {
                const T lse = std::log(denom);
                for (std::size_t j = 0; j < c; ++j) n.val[i * c + j] = x[j] - mx - lse;
            }
        }
        return push(std::move(n));
    }

    void add_grad(std::size_t parent, std::size_t flat, T g) {
        Node& p = nodes_[parent];
        if (p.requires_grad) p.grad[flat] += g;
    }

    void backprop_node(Node& n) {
        const auto& g = n.grad;
        switch (n.op) {
            case Op::Leaf:
            case Op::Detach:
                break;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div: {
                Node& pa = nodes_[n.parents[0]];
                Node& pb = nodes_[n.parents[1]];
                const bool b_small = pb.val.size() <= pa.val.size();
                const std::size_t nsmall = (b_small ? pb : pa).val.size();
                for (std::size_t i = 0; i < g.size(); ++i) {
                    const std::size_t ia = b_small ? i : i % nsmall;
                    const std::size_t ib = b_small ? i % nsmall : i;
                    const T av = pa.val[ia], bv = pb.val[ib];
                    T da = T(0), db = T(0);
                    switch (n.op) {
                        case Op::Add: da = g[i]; db = g[i]; break;
                        case Op::Sub: da = g[i]; db = -g[i]; break;
                        case Op::Mul: da = g[i] * bv; db = g[i] * av; break;
                        case Op::Div: da = g[i] / bv; db = -g[i] * av / (bv * bv); break;
                        default: break;
                    }
                    if (pa.requires_grad) pa.grad[ia] += da;
                    if (pb.requires_grad) pb.grad[ib] += db;
                }
                break;
            }
            case Op::Neg:
            case Op::Relu:
            case Op::Tanh:
            case Op::Atanh:
            case Op::Sigmoid:
            case Op::Exp:
            case Op::Log:
            case Op::Sqrt:
            case Op::Abs:
            case Op::Clip:
            case Op::AddScalar:
            case Op::MulScalar: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                for (std::size_t i = 0; i < g.size(); ++i) {
                    T d = T(0);
                    switch (n.op) {
                        case Op::Neg: d = -g[i]; break;
                        case Op::Relu: d = p.val[i] > T(0) ? g[i] : T(0); break;
                        case Op::Tanh: d = g[i] * (T(1) - n.val[i] * n.val[i]); break;
                        case Op::Atanh: d = g[i] / (T(1) - p.val[i] * p.val[i]); break;
                        case Op::Sigmoid: d = g[i] * n.val[i] * (T(1) - n.val[i]); break;
                        case Op::Exp: d = g[i] * n.val[i]; break;
                        case Op::Log: d = g[i] / p.val[i]; break;
                        case Op::Sqrt: d = g[i] / (T(2) * n.val[i]); break;
                        case Op::Abs:
                            d = p.val[i] > T(0) ? g[i] : (p.val[i] < T(0) ? -g[i] : T(0));
                            break;
                        case Op::Clip:
                            d = (p.val[i] >= static_cast<T>(n.dargs[0]) &&
                                 p.val[i] <= static_cast<T>(n.dargs[1]))
                                    ? g[i]
                                    : T(0);
                            break;
                        case Op::AddScalar: d = g[i]; break;
                        case Op::MulScalar: d = g[i] * static_cast<T>(n.dargs[0]); break;
                        default: break;
                    }
                    p.grad[i] += d;
                }
                break;
            }
            case Op::MatMul: {
                Node& pa = nodes_[n.parents[0]];
                Node& pb = nodes_[n.parents[1]];
                const std::size_t r = pa.shape[0], m = pa.shape[1], c = pb.shape[1];
                if (pa.requires_grad)
                    for (std::size_t i = 0; i < r; ++i)
                        for (std::size_t j = 0; j < m; ++j) {
                            T acc = T(0);
                            for (std::size_t l = 0; l < c; ++l) acc += g[i * c + l] * pb.val[j * c + l];
                            pa.grad[i * m + j] += acc;
                        }
                if (pb.requires_grad)
                    for (std::size_t j = 0; j < m; ++j)
                        for (std::size_t l = 0; l < c; ++l) {
                            T acc = T(0);
                            for (std::size_t i = 0; i < r; ++i) acc += pa.val[i * m + j] * g[i * c + l];
                            pb.grad[j * c + l] += acc;
                        }
                break;
            }
            case Op::Transpose: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t r = p.shape[0], c = p.shape[1];
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += g[j * r + i];
                break;
            }
            case Op::Reshape: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                for (std::size_t i = 0; i < g.size(); ++i) p.grad[i] += g[i];
                break;
            }
            case Op::Concat0: {
                std::size_t off = 0;
                for (auto pid : n.parents) {
                    Node& p = nodes_[pid];
                    if (p.requires_grad)
                        for (std::size_t i = 0; i < p.val.size(); ++i) p.grad[i] += g[off + i];
                    off += p.val.size();
                }
                break;
            }
            case Op::Concat1: {
                const std::size_t rows = n.shape[0], total = n.shape[1];
                std::size_t off = 0;
                for (auto pid : n.parents) {
                    Node& p = nodes_[pid];
                    const std::size_t w = p.shape[1];
                    if (p.requires_grad)
                        for (std::size_t i = 0; i < rows; ++i)
                            for (std::size_t j = 0; j < w; ++j)
                                p.grad[i * w + j] += g[i * total + off + j];
                    off += w;
                }
                break;
            }
            case Op::Slice0: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t c = p.shape[1];
                const std::size_t start = static_cast<std::size_t>(n.iargs[0]);
                for (std::size_t i = 0; i < g.size(); ++i) p.grad[start * c + i] += g[i];
                break;
            }
            case Op::Slice1: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t c = p.shape[1];
                const std::size_t start = static_cast<std::size_t>(n.iargs[0]);
                const std::size_t len = static_cast<std::size_t>(n.iargs[1]);
                for (std::size_t i = 0; i < n.shape[0]; ++i)
                    for (std::size_t j = 0; j < len; ++j) p.grad[i * c + start + j] += g[i * len + j];
                break;
            }
            case Op::GatherCols: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t c = p.shape[1], k = n.iargs.size();
                for (std::size_t i = 0; i < n.shape[0]; ++i)
                    for (std::size_t j = 0; j < k; ++j)
                        p.grad[i * c + static_cast<std::size_t>(n.iargs[j])] += g[i * k + j];
                break;
            }
            case Op::TakePerRow: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t c = p.shape[1];
                for (std::size_t i = 0; i < n.shape[0]; ++i)
                    p.grad[i * c + static_cast<std::size_t>(n.iargs[i])] += g[i];
                break;
            }
            case Op::PairwiseAbsDiff: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t m = n.dargs.size();
                for (std::size_t i = 0; i < p.val.size(); ++i) {
                    T acc = T(0);
                    for (std::size_t j = 0; j < m; ++j) {
                        const double diff = static_cast<double>(p.val[i]) - n.dargs[j];
                        if (diff > 0)
                            acc += g[i * m + j];
                        else if (diff < 0)
                            acc -= g[i * m + j];
                    }
                    p.grad[i] += acc;
                }
                break;
            }
            case Op::Sum: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                for (auto& pg : p.grad) pg += g[0];
                break;
            }
            case Op::Mean: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const T s = g[0] / static_cast<T>(p.val.size());
                for (auto& pg : p.grad) pg += s;
                break;
            }
            case Op::SumAxis1: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t r = p.shape[0], c = p.shape[1];
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += g[i];
                break;
            }
            case Op::SumAxis0:
            case Op::MeanAxis0: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t r = p.shape[0], c = p.shape[1];
                const T scale = n.op == Op::MeanAxis0 ? T(1) / static_cast<T>(r) : T(1);
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j) p.grad[i * c + j] += g[j] * scale;
                break;
            }
            case Op::Softmax: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t r = n.shape[0], c = n.shape[1];
                for (std::size_t i = 0; i < r; ++i) {
                    T dot = T(0);
                    for (std::size_t j = 0; j < c; ++j) dot += g[i * c + j] * n.val[i * c + j];
                    for (std::size_t j = 0; j < c; ++j)
                        p.grad[i * c + j] += n.val[i * c + j] * (g[i * c + j] - dot);
                }
                break;
            }
            case Op::LogSoftmax: {
                Node& p = nodes_[n.parents[0]];
                if (!p.requires_grad) break;
                const std::size_t r = n.shape[0], c = n.shape[1];
                for (std::size_t i = 0; i < r; ++i) {
                    T gsum = T(0);
                    for (std::size_t j = 0; j < c; ++j) gsum += g[i * c + j];
                    for (std::size_t j = 0; j < c; ++j)
                        p.grad[i * c + j] += g[i * c + j] - std::exp(n.val[i * c + j]) * gsum;
                }
                break;
            }
            case Op::LayerNorm: {
                Node& px = nodes_[n.parents[0]];
                Node& pg = nodes_[n.parents[1]];
                Node& pb = nodes_[n.parents[2]];
                const std::size_t r = n.shape[0], c = n.shape[1];
                for (std::size_t i = 0; i < r; ++i) {
                    const T* x = &px.val[i * c];
                    T mu = T(0);
                    for (std::size_t j = 0; j < c; ++j) mu += x[j];
                    mu /= static_cast<T>(c);
                    T var = T(0);
                    for (std::size_t j = 0; j < c; ++j) var += (x[j] - mu) * (x[j] - mu);
                    var /= static_cast<T>(c);
                    const T inv = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
                    // xhat, then the standard layernorm backward
                    T mean_dxhat = T(0), mean_dxhat_xhat = T(0);
                    for (std::size_t j = 0; j < c; ++j) {
                        const T xhat = (x[j] - mu) * inv;
                        const T dxhat = g[i * c + j] * pg.val[j];
                        mean_dxhat += dxhat;
                        mean_dxhat_xhat += dxhat * xhat;
                        if (pg.requires_grad) pg.grad[j] += g[i * c + j] * xhat;
                        if (pb.requires_grad) pb.grad[j] += g[i * c + j];
                    }
                    mean_dxhat /= static_cast<T>(c);
                    mean_dxhat_xhat /= static_cast<T>(c);
                    if (px.requires_grad)
                        for (std::size_t j = 0; j < c; ++j) {
                            const T xhat = (x[j] - mu) * inv;
                            const T dxhat = g[i * c + j] * pg.val[j];
                            px.grad[i * c + j] += inv * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat);
                        }
                }
                break;
            }
        }
    }
};

template <typename T>
const Shape& Tensor<T>::shape() const { return tape->node(id).shape; }

template <typename T>
const std::vector<T>& Tensor<T>::values() const { return tape->node(id).val; }

template <typename T>
T Tensor<T>::item() const {
    const auto& v = values();
    if (v.size() != 1) throw AutodiffError("item: tensor is not scalar");
    return v[0];
}

}  // namespace transcoder::ad
