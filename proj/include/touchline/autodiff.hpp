#pragma once
#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "touchline/tensor.hpp"

namespace touchline {

// Reverse-mode tape over dense matrices. Nodes are appended in execution
// order, so the tape itself is the topological order; backward is a single
// reverse sweep. All arithmetic is double precision.

enum class Op : std::uint8_t {
    Leaf,
    Add, Sub, Mul, Div, Min, Max,
    AddS, MulS,
    Abs, Relu, Sigmoid, Log, Exp, Sqrt,
    MatMul, Transpose,
    SliceRows, SliceCols, ConcatRows, ConcatCols,
    Embed,
    SoftmaxRows, LogSoftmaxRows, LogSumExpRow,
    LayerNormRows, AddRow, RowAffine,
    SumAll, MeanAll,
};

class Tape;

struct Var {
    Tape* tape = nullptr;
    int id = -1;
    int rows = 0;
    int cols = 0;
};

struct Node {
    Op op = Op::Leaf;
    int a = -1, b = -1, c = -1;
    int rows = 0, cols = 0;
    double s = 0.0;         // scalar operand
    int p0 = 0, p1 = 0;     // slice bounds
    std::vector<int> extra; // concat operands or embedding row ids
    std::vector<double> val;
    std::vector<double> grad;
    std::vector<double> aux; // layer-norm inverse std per row
    bool needs_grad = false;
};

class Tape {
public:
    std::vector<Node> nodes;

    void clear() { nodes.clear(); }
    std::size_t size() const { return nodes.size(); }

    Var leaf(const Tensor& t, bool requires_grad = false) {
        Node n;
        n.op = Op::Leaf;
        n.rows = static_cast<int>(t.rows());
        n.cols = static_cast<int>(t.cols());
        n.val = t.data();
        n.needs_grad = requires_grad;
        return push(std::move(n));
    }

    Var constant(int rows, int cols, std::vector<double> v) {
        return leaf(Tensor(rows, cols, std::move(v)), false);
    }
    Var scalar(double v) { return constant(1, 1, {v}); }

    double value(Var v) const { return nodes[v.id].val[0]; }
    const std::vector<double>& values(Var v) const { return nodes[v.id].val; }
    const std::vector<double>& grad(Var v) const { return nodes[v.id].grad; }

    // ---- elementwise binary ----
    Var add(Var a, Var b) { return binary(Op::Add, a, b); }
    Var sub(Var a, Var b) { return binary(Op::Sub, a, b); }
    Var mul(Var a, Var b) { return binary(Op::Mul, a, b); }
    Var div(Var a, Var b) { return binary(Op::Div, a, b); }
    Var min(Var a, Var b) { return binary(Op::Min, a, b); }
    Var max(Var a, Var b) { return binary(Op::Max, a, b); }

    // ---- scalar ----
    Var add_scalar(Var a, double s) { return unary_s(Op::AddS, a, s); }
    Var mul_scalar(Var a, double s) { return unary_s(Op::MulS, a, s); }

    // ---- elementwise unary ----
    Var abs(Var a) { return unary_s(Op::Abs, a, 0); }
    Var relu(Var a) { return unary_s(Op::Relu, a, 0); }
    Var sigmoid(Var a) { return unary_s(Op::Sigmoid, a, 0); }
    Var log(Var a) { return unary_s(Op::Log, a, 0); }
    Var exp(Var a) { return unary_s(Op::Exp, a, 0); }
    Var sqrt(Var a) { return unary_s(Op::Sqrt, a, 0); }

    Var matmul(Var a, Var b) {
        if (a.cols != b.rows) throw ShapeMismatch("matmul inner extents differ");
        Node n = base(Op::MatMul, a.rows, b.cols, a.id, b.id);
        return push(std::move(n));
    }

    Var transpose(Var a) {
        Node n = base(Op::Transpose, a.cols, a.rows, a.id);
        return push(std::move(n));
    }

    Var slice_rows(Var a, int r0, int r1) {
        if (r0 < 0 || r1 > a.rows || r0 >= r1) throw ShapeMismatch("bad row slice");
        Node n = base(Op::SliceRows, r1 - r0, a.cols, a.id);
        n.p0 = r0; n.p1 = r1;
        return push(std::move(n));
    }

    Var slice_cols(Var a, int c0, int c1) {
        if (c0 < 0 || c1 > a.cols || c0 >= c1) throw ShapeMismatch("bad col slice");
        Node n = base(Op::SliceCols, a.rows, c1 - c0, a.id);
        n.p0 = c0; n.p1 = c1;
        return push(std::move(n));
    }

    Var concat_rows(const std::vector<Var>& parts) { return concat(parts, /*rows=*/true); }
    Var concat_cols(const std::vector<Var>& parts) { return concat(parts, /*rows=*/false); }

    Var embed(Var table, const std::vector<int>& ids) {
        for (int i : ids)
            if (i < 0 || i >= table.rows) throw ShapeMismatch("embedding id out of range");
        Node n = base(Op::Embed, static_cast<int>(ids.size()), table.cols, table.id);
        n.extra = ids;
        return push(std::move(n));
    }

    Var softmax_rows(Var a) { return unary_s(Op::SoftmaxRows, a, 0); }
    Var log_softmax_rows(Var a) { return unary_s(Op::LogSoftmaxRows, a, 0); }

    Var logsumexp_row(Var a) {
        if (a.rows != 1) throw ShapeMismatch("logsumexp expects a row vector");
        Node n = base(Op::LogSumExpRow, 1, 1, a.id);
        return push(std::move(n));
    }

    Var layer_norm_rows(Var a) { return unary_s(Op::LayerNormRows, a, 0); }

    Var add_row(Var a, Var bias) {
        if (bias.rows != 1 || bias.cols != a.cols) throw ShapeMismatch("bias must be 1 x cols");
        Node n = base(Op::AddRow, a.rows, a.cols, a.id, bias.id);
        return push(std::move(n));
    }

    Var row_affine(Var a, Var gamma, Var beta) {
        if (gamma.rows != 1 || gamma.cols != a.cols || beta.rows != 1 || beta.cols != a.cols)
            throw ShapeMismatch("row_affine scale/shift must be 1 x cols");
        Node n = base(Op::RowAffine, a.rows, a.cols, a.id, gamma.id, beta.id);
        return push(std::move(n));
    }

    Var sum_all(Var a) { Node n = base(Op::SumAll, 1, 1, a.id); return push(std::move(n)); }
    Var mean_all(Var a) { Node n = base(Op::MeanAll, 1, 1, a.id); return push(std::move(n)); }

    // ------------------------------------------------------------------
    void backward(Var loss) {
        Node& ln = nodes[loss.id];
        if (ln.rows != 1 || ln.cols != 1) throw NotScalar("backward needs a scalar loss");
        for (int i = 0; i <= loss.id; ++i) {
            Node& n = nodes[i];
            if (n.needs_grad)
                n.grad.assign(n.val.size(), 0.0);
        }
        if (!ln.needs_grad) return;
        ln.grad[0] = 1.0;
        for (int i = loss.id; i >= 0; --i) backward_node(i);
    }

    /// Recompute every non-leaf forward value from current inputs and compare
    /// bit-exactly against the stored value. Returns true when all match.
    bool replay_check() {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            Node& n = nodes[i];
            if (n.op == Op::Leaf) continue;
            std::vector<double> old = n.val;
            std::vector<double> old_aux = n.aux;
            compute(n);
            const bool same = old.size() == n.val.size() &&
                std::memcmp(old.data(), n.val.data(), old.size() * sizeof(double)) == 0;
            n.val = std::move(old);
            n.aux = std::move(old_aux);
            if (!same) return false;
        }
        return true;
    }

private:
    Node base(Op op, int rows, int cols, int a, int b = -1, int c = -1) {
        Node n;
        n.op = op;
        n.rows = rows; n.cols = cols;
        n.a = a; n.b = b; n.c = c;
        n.needs_grad = nodes[a].needs_grad ||
                       (b >= 0 && nodes[b].needs_grad) ||
                       (c >= 0 && nodes[c].needs_grad);
        return n;
    }

    Var binary(Op op, Var a, Var b) {
        if (a.rows != b.rows || a.cols != b.cols)
            throw ShapeMismatch("elementwise operands differ in shape");
        Node n = base(op, a.rows, a.cols, a.id, b.id);
        return push(std::move(n));
    }

    Var unary_s(Op op, Var a, double s) {
        Node n = base(op, a.rows, a.cols, a.id);
        n.s = s;
        return push(std::move(n));
    }

    Var concat(const std::vector<Var>& parts, bool rows) {
        if (parts.empty()) throw ShapeMismatch("concat of nothing");
        int r = parts[0].rows, c = parts[0].cols;
        int total = rows ? r : c;
        for (std::size_t i = 1; i < parts.size(); ++i) {
            if (rows && parts[i].cols != c) throw ShapeMismatch("concat_rows col mismatch");
            if (!rows && parts[i].rows != r) throw ShapeMismatch("concat_cols row mismatch");
            total += rows ? parts[i].rows : parts[i].cols;
        }
        Node n;
        n.op = rows ? Op::ConcatRows : Op::ConcatCols;
        n.rows = rows ? total : r;
        n.cols = rows ? c : total;
        for (const Var& v : parts) {
            n.extra.push_back(v.id);
            if (nodes[v.id].needs_grad) n.needs_grad = true;
        }
        return push(std::move(n));
    }

    Var push(Node&& n) {
        if (n.op != Op::Leaf) compute(n);
        nodes.push_back(std::move(n));
        const int id = static_cast<int>(nodes.size()) - 1;
        return Var{this, id, nodes[id].rows, nodes[id].cols};
    }

    void compute(Node& n) {
        const std::size_t m = static_cast<std::size_t>(n.rows) * n.cols;
        n.val.assign(m, 0.0);
        double* y = n.val.data();
        const double* A = n.a >= 0 ? nodes[n.a].val.data() : nullptr;
        const double* B = n.b >= 0 ? nodes[n.b].val.data() : nullptr;
        const double* C = n.c >= 0 ? nodes[n.c].val.data() : nullptr;
        switch (n.op) {
        case Op::Leaf: break;
        case Op::Add: for (std::size_t i = 0; i < m; ++i) y[i] = A[i] + B[i]; break;
        case Op::Sub: for (std::size_t i = 0; i < m; ++i) y[i] = A[i] - B[i]; break;
        case Op::Mul: for (std::size_t i = 0; i < m; ++i) y[i] = A[i] * B[i]; break;
        case Op::Div: for (std::size_t i = 0; i < m; ++i) y[i] = A[i] / B[i]; break;
        case Op::Min: for (std::size_t i = 0; i < m; ++i) y[i] = A[i] <= B[i] ? A[i] : B[i]; break;
        case Op::Max: for (std::size_t i = 0; i < m; ++i) y[i] = A[i] >= B[i] ? A[i] : B[i]; break;
        case Op::AddS: for (std::size_t i = 0; i < m; ++i) y[i] = A[i] + n.s; break;
        case Op::MulS: for (std::size_t i = 0; i < m; ++i) y[i] = A[i] * n.s; break;
        case Op::Abs: for (std::size_t i = 0; i < m; ++i) y[i] = std::fabs(A[i]); break;
        case Op::Relu: for (std::size_t i = 0; i < m; ++i) y[i] = A[i] > 0.0 ? A[i] : 0.0; break;
        case Op::Sigmoid:
            for (std::size_t i = 0; i < m; ++i) {
                const double x = A[i];
                y[i] = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                : std::exp(x) / (1.0 + std::exp(x));
            }
            break;
        case Op::Log: for (std::size_t i = 0; i < m; ++i) y[i] = std::log(A[i]); break;
        case Op::Exp: for (std::size_t i = 0; i < m; ++i) y[i] = std::exp(A[i]); break;
        case Op::Sqrt: for (std::size_t i = 0; i < m; ++i) y[i] = std::sqrt(A[i]); break;
        case Op::MatMul: {
            const Node& na = nodes[n.a];
            const int M = na.rows, K = na.cols, N = n.cols;
            for (int i = 0; i < M; ++i) {
                double* yr = y + static_cast<std::size_t>(i) * N;
                const double* ar = A + static_cast<std::size_t>(i) * K;
                for (int k = 0; k < K; ++k) {
                    const double av = ar[k];
                    const double* br = B + static_cast<std::size_t>(k) * N;
                    for (int j = 0; j < N; ++j) yr[j] += av * br[j];
                }
            }
            break;
        }
        case Op::Transpose: {
            const Node& na = nodes[n.a];
            for (int i = 0; i < na.rows; ++i)
                for (int j = 0; j < na.cols; ++j)
                    y[static_cast<std::size_t>(j) * n.cols + i] =
                        A[static_cast<std::size_t>(i) * na.cols + j];
            break;
        }
        case Op::SliceRows:
            std::memcpy(y, A + static_cast<std::size_t>(n.p0) * n.cols, m * sizeof(double));
            break;
        case Op::SliceCols: {
            const Node& na = nodes[n.a];
            for (int i = 0; i < n.rows; ++i)
                std::memcpy(y + static_cast<std::size_t>(i) * n.cols,
                            A + static_cast<std::size_t>(i) * na.cols + n.p0,
                            static_cast<std::size_t>(n.cols) * sizeof(double));
            break;
        }
        case Op::ConcatRows: {
            std::size_t off = 0;
            for (int id : n.extra) {
                const Node& p = nodes[id];
                std::memcpy(y + off, p.val.data(), p.val.size() * sizeof(double));
                off += p.val.size();
            }
            break;
        }
        case Op::ConcatCols: {
            std::size_t coff = 0;
            for (int id : n.extra) {
                const Node& p = nodes[id];
                for (int i = 0; i < p.rows; ++i)
                    std::memcpy(y + static_cast<std::size_t>(i) * n.cols + coff,
                                p.val.data() + static_cast<std::size_t>(i) * p.cols,
                                static_cast<std::size_t>(p.cols) * sizeof(double));
                coff += p.cols;
            }
            break;
        }
        case Op::Embed: {
            const Node& t = nodes[n.a];
            for (int r = 0; r < n.rows; ++r)
                std::memcpy(y + static_cast<std::size_t>(r) * n.cols,
                            A + static_cast<std::size_t>(n.extra[r]) * t.cols,
                            static_cast<std::size_t>(n.cols) * sizeof(double));
            break;
        }
        case Op::SoftmaxRows:
        case Op::LogSoftmaxRows: {
            for (int r = 0; r < n.rows; ++r) {
                const double* xr = A + static_cast<std::size_t>(r) * n.cols;
                double* yr = y + static_cast<std::size_t>(r) * n.cols;
                double mx = xr[0];
                for (int j = 1; j < n.cols; ++j) mx = std::max(mx, xr[j]);
                double sum = 0.0;
                for (int j = 0; j < n.cols; ++j) sum += std::exp(xr[j] - mx);
                if (n.op == Op::SoftmaxRows) {
                    for (int j = 0; j < n.cols; ++j) yr[j] = std::exp(xr[j] - mx) / sum;
                } else {
                    const double lse = mx + std::log(sum);
                    for (int j = 0; j < n.cols; ++j) yr[j] = xr[j] - lse;
                }
            }
            break;
        }
        case Op::LogSumExpRow: {
            const Node& na = nodes[n.a];
            double mx = A[0];
            for (int j = 1; j < na.cols; ++j) mx = std::max(mx, A[j]);
            double sum = 0.0;
            for (int j = 0; j < na.cols; ++j) sum += std::exp(A[j] - mx);
            y[0] = mx + std::log(sum);
            break;
        }
        case Op::LayerNormRows: {
            n.aux.assign(n.rows, 0.0);
            for (int r = 0; r < n.rows; ++r) {
                const double* xr = A + static_cast<std::size_t>(r) * n.cols;
                double* yr = y + static_cast<std::size_t>(r) * n.cols;
                double mean = 0.0;
                for (int j = 0; j < n.cols; ++j) mean += xr[j];
                mean /= n.cols;
                double var = 0.0;
                for (int j = 0; j < n.cols; ++j) var += (xr[j] - mean) * (xr[j] - mean);
                var /= n.cols;
                const double inv = 1.0 / std::sqrt(var + 1e-5);
                n.aux[r] = inv;
                for (int j = 0; j < n.cols; ++j) yr[j] = (xr[j] - mean) * inv;
            }
            break;
        }
        case Op::AddRow:
            for (int r = 0; r < n.rows; ++r)
                for (int j = 0; j < n.cols; ++j)
                    y[static_cast<std::size_t>(r) * n.cols + j] =
                        A[static_cast<std::size_t>(r) * n.cols + j] + B[j];
            break;
        case Op::RowAffine:
            for (int r = 0; r < n.rows; ++r)
                for (int j = 0; j < n.cols; ++j)
                    y[static_cast<std::size_t>(r) * n.cols + j] =
                        A[static_cast<std::size_t>(r) * n.cols + j] * B[j] + C[j];
            break;
        case Op::SumAll: {
            double sum = 0.0;
            for (double v : nodes[n.a].val) sum += v;
            y[0] = sum;
            break;
        }
        case Op::MeanAll: {
            double sum = 0.0;
            for (double v : nodes[n.a].val) sum += v;
            y[0] = sum / static_cast<double>(nodes[n.a].val.size());
            break;
        }
        }
    }

    void backward_node(int idx) {
        Node& n = nodes[idx];
        if (!n.needs_grad || n.op == Op::Leaf) return;
        const double* g = n.grad.data();
        const std::size_t m = n.val.size();
        auto gin = [&](int id) -> double* {
            return (id >= 0 && nodes[id].needs_grad) ? nodes[id].grad.data() : nullptr;
        };
        double* ga = gin(n.a);
        double* gb = gin(n.b);
        double* gc = gin(n.c);
        const double* A = n.a >= 0 ? nodes[n.a].val.data() : nullptr;
        const double* B = n.b >= 0 ? nodes[n.b].val.data() : nullptr;
        const double* Y = n.val.data();
        switch (n.op) {
        case Op::Leaf: break;
        case Op::Add:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += g[i];
            if (gb) for (std::size_t i = 0; i < m; ++i) gb[i] += g[i];
            break;
        case Op::Sub:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += g[i];
            if (gb) for (std::size_t i = 0; i < m; ++i) gb[i] -= g[i];
            break;
        case Op::Mul:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += g[i] * B[i];
            if (gb) for (std::size_t i = 0; i < m; ++i) gb[i] += g[i] * A[i];
            break;
        case Op::Div:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += g[i] / B[i];
            if (gb) for (std::size_t i = 0; i < m; ++i) gb[i] -= g[i] * Y[i] / B[i];
            break;
        case Op::Min:
            for (std::size_t i = 0; i < m; ++i) {
                if (A[i] <= B[i]) { if (ga) ga[i] += g[i]; }
                else if (gb) gb[i] += g[i];
            }
            break;
        case Op::Max:
            for (std::size_t i = 0; i < m; ++i) {
                if (A[i] >= B[i]) { if (ga) ga[i] += g[i]; }
                else if (gb) gb[i] += g[i];
            }
            break;
        case Op::AddS:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += g[i];
            break;
        case Op::MulS:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += g[i] * n.s;
            break;
        case Op::Abs:
            if (ga) for (std::size_t i = 0; i < m; ++i)
                ga[i] += A[i] > 0.0 ? g[i] : (A[i] < 0.0 ? -g[i] : 0.0);
            break;
        case Op::Relu:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += A[i] > 0.0 ? g[i] : 0.0;
            break;
        case Op::Sigmoid:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += g[i] * Y[i] * (1.0 - Y[i]);
            break;
        case Op::Log:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += g[i] / A[i];
            break;
        case Op::Exp:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += g[i] * Y[i];
            break;
        case Op::Sqrt:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += g[i] / (2.0 * Y[i]);
            break;
        case Op::MatMul: {
            const Node& na = nodes[n.a];
            const int M = na.rows, K = na.cols, N = n.cols;
            if (ga) {
                // dA[i,k] = sum_j g[i,j] * B[k,j]
                for (int i = 0; i < M; ++i) {
                    const double* gr = g + static_cast<std::size_t>(i) * N;
                    double* gar = ga + static_cast<std::size_t>(i) * K;
                    for (int k = 0; k < K; ++k) {
                        const double* br = B + static_cast<std::size_t>(k) * N;
                        double acc = 0.0;
                        for (int j = 0; j < N; ++j) acc += gr[j] * br[j];
                        gar[k] += acc;
                    }
                }
            }
            if (gb) {
                // dB[k,j] = sum_i A[i,k] * g[i,j]
                for (int i = 0; i < M; ++i) {
                    const double* ar = A + static_cast<std::size_t>(i) * K;
                    const double* gr = g + static_cast<std::size_t>(i) * N;
                    for (int k = 0; k < K; ++k) {
                        const double av = ar[k];
                        double* gbr = gb + static_cast<std::size_t>(k) * N;
                        for (int j = 0; j < N; ++j) gbr[j] += av * gr[j];
                    }
                }
            }
            break;
        }
        case Op::Transpose:
            if (ga) {
                const Node& na = nodes[n.a];
                for (int i = 0; i < na.rows; ++i)
                    for (int j = 0; j < na.cols; ++j)
                        ga[static_cast<std::size_t>(i) * na.cols + j] +=
                            g[static_cast<std::size_t>(j) * n.cols + i];
            }
            break;
        case Op::SliceRows:
            if (ga) {
                double* dst = ga + static_cast<std::size_t>(n.p0) * n.cols;
                for (std::size_t i = 0; i < m; ++i) dst[i] += g[i];
            }
            break;
        case Op::SliceCols:
            if (ga) {
                const Node& na = nodes[n.a];
                for (int i = 0; i < n.rows; ++i)
                    for (int j = 0; j < n.cols; ++j)
                        ga[static_cast<std::size_t>(i) * na.cols + n.p0 + j] +=
                            g[static_cast<std::size_t>(i) * n.cols + j];
            }
            break;
        case Op::ConcatRows: {
            std::size_t off = 0;
            for (int id : n.extra) {
                Node& p = nodes[id];
                if (p.needs_grad)
                    for (std::size_t i = 0; i < p.val.size(); ++i) p.grad[i] += g[off + i];
                off += p.val.size();
            }
            break;
        }
        case Op::ConcatCols: {
            std::size_t coff = 0;
            for (int id : n.extra) {
                Node& p = nodes[id];
                if (p.needs_grad)
                    for (int i = 0; i < p.rows; ++i)
                        for (int j = 0; j < p.cols; ++j)
                            p.grad[static_cast<std::size_t>(i) * p.cols + j] +=
                                g[static_cast<std::size_t>(i) * n.cols + coff + j];
                coff += p.cols;
            }
            break;
        }
        case Op::Embed:
            if (ga)
                for (int r = 0; r < n.rows; ++r) {
                    double* row = ga + static_cast<std::size_t>(n.extra[r]) * n.cols;
                    const double* gr = g + static_cast<std::size_t>(r) * n.cols;
                    for (int j = 0; j < n.cols; ++j) row[j] += gr[j];
                }
            break;
        case Op::SoftmaxRows:
            if (ga)
                for (int r = 0; r < n.rows; ++r) {
                    const double* p = Y + static_cast<std::size_t>(r) * n.cols;
                    const double* gr = g + static_cast<std::size_t>(r) * n.cols;
                    double dot = 0.0;
                    for (int j = 0; j < n.cols; ++j) dot += gr[j] * p[j];
                    double* gar = ga + static_cast<std::size_t>(r) * n.cols;
                    for (int j = 0; j < n.cols; ++j) gar[j] += p[j] * (gr[j] - dot);
                }
            break;
        case Op::LogSoftmaxRows:
            if (ga)
                for (int r = 0; r < n.rows; ++r) {
                    const double* lp = Y + static_cast<std::size_t>(r) * n.cols;
                    const double* gr = g + static_cast<std::size_t>(r) * n.cols;
                    double gsum = 0.0;
                    for (int j = 0; j < n.cols; ++j) gsum += gr[j];
                    double* gar = ga + static_cast<std::size_t>(r) * n.cols;
                    for (int j = 0; j < n.cols; ++j) gar[j] += gr[j] - std::exp(lp[j]) * gsum;
                }
            break;
        case Op::LogSumExpRow:
            if (ga) {
                const Node& na = nodes[n.a];
                for (int j = 0; j < na.cols; ++j) ga[j] += g[0] * std::exp(A[j] - Y[0]);
            }
            break;
        case Op::LayerNormRows:
            if (ga)
                for (int r = 0; r < n.rows; ++r) {
                    const double inv = n.aux[r];
                    const double* xh = Y + static_cast<std::size_t>(r) * n.cols;
                    const double* gr = g + static_cast<std::size_t>(r) * n.cols;
                    double gmean = 0.0, gxmean = 0.0;
                    for (int j = 0; j < n.cols; ++j) { gmean += gr[j]; gxmean += gr[j] * xh[j]; }
                    gmean /= n.cols;
                    gxmean /= n.cols;
                    double* gar = ga + static_cast<std::size_t>(r) * n.cols;
                    for (int j = 0; j < n.cols; ++j)
                        gar[j] += inv * (gr[j] - gmean - xh[j] * gxmean);
                }
            break;
        case Op::AddRow:
            if (ga) for (std::size_t i = 0; i < m; ++i) ga[i] += g[i];
            if (gb)
                for (int r = 0; r < n.rows; ++r)
                    for (int j = 0; j < n.cols; ++j)
                        gb[j] += g[static_cast<std::size_t>(r) * n.cols + j];
            break;
        case Op::RowAffine:
            for (int r = 0; r < n.rows; ++r)
                for (int j = 0; j < n.cols; ++j) {
                    const std::size_t i = static_cast<std::size_t>(r) * n.cols + j;
                    if (ga) ga[i] += g[i] * B[j];
                    if (gb) gb[j] += g[i] * A[i];
                    if (gc) gc[j] += g[i];
                }
            break;
        case Op::SumAll:
            if (ga) {
                Node& na = nodes[n.a];
                for (std::size_t i = 0; i < na.val.size(); ++i) ga[i] += g[0];
            }
            break;
        case Op::MeanAll:
            if (ga) {
                Node& na = nodes[n.a];
                const double s = g[0] / static_cast<double>(na.val.size());
                for (std::size_t i = 0; i < na.val.size(); ++i) ga[i] += s;
            }
            break;
        }
    }
};

/// Named collection of leaf tensors; insertion order is the canonical
/// parameter order used by the optimizer, checkpoints and gradcheck.
struct ParamStore {
    std::vector<std::string> names;
    std::vector<Tensor> tensors;

    int add(const std::string& name, Tensor t) {
        names.push_back(name);
        tensors.push_back(std::move(t));
        return static_cast<int>(tensors.size()) - 1;
    }

    int index(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }

    Tensor& at(const std::string& name) {
        const int i = index(name);
        if (i < 0) throw Error("unknown parameter: " + name);
        return tensors[i];
    }

    std::size_t size() const { return tensors.size(); }

    std::size_t total_scalars() const {
        std::size_t n = 0;
        for (const Tensor& t : tensors) n += t.numel();
        return n;
    }
};

} // namespace touchline
