#pragma once
#include <limits>
#include <vector>

#include "touchline/geometry.hpp"
#include "touchline/matching.hpp"

// Independent reference computations used only by tests.
namespace oracles {

using touchline::BoxCXYWH;
using touchline::CostMatrix;

// Rasterized overlap oracle: an N x N grid is laid over the pair's enclosing
// box and each cell is attributed to a region by its center point. Because
// the boxes are axis-aligned, cell membership factors per axis, so the cell
// counts can be accumulated from per-axis membership scans; the result is
// identical to the naive per-cell double loop (checked by naive_giou below).
struct RasterResult {
    double iou;
    double giou;
};

inline RasterResult raster_overlap(const BoxCXYWH& a, const BoxCXYWH& b, int n) {
    const double ex0 = std::min(a.x0(), b.x0()), ex1 = std::max(a.x1(), b.x1());
    const double ey0 = std::min(a.y0(), b.y0()), ey1 = std::max(a.y1(), b.y1());
    const double hx = (ex1 - ex0) / n, hy = (ey1 - ey0) / n;

    long ax = 0, bx = 0, abx = 0;
    for (int i = 0; i < n; ++i) {
        const double cx = ex0 + (i + 0.5) * hx;
        const bool ina = cx >= a.x0() && cx <= a.x1();
        const bool inb = cx >= b.x0() && cx <= b.x1();
        ax += ina; bx += inb; abx += ina && inb;
    }
    long ay = 0, by = 0, aby = 0;
    for (int j = 0; j < n; ++j) {
        const double cy = ey0 + (j + 0.5) * hy;
        const bool ina = cy >= a.y0() && cy <= a.y1();
        const bool inb = cy >= b.y0() && cy <= b.y1();
        ay += ina; by += inb; aby += ina && inb;
    }
    const double cell_a = static_cast<double>(ax) * ay;
    const double cell_b = static_cast<double>(bx) * by;
    const double cell_i = static_cast<double>(abx) * aby;
    const double cell_u = cell_a + cell_b - cell_i;
    const double cell_e = static_cast<double>(n) * n;
    RasterResult r;
    r.iou = cell_u > 0.0 ? cell_i / cell_u : 0.0;
    r.giou = r.iou - (cell_e - cell_u) / cell_e;
    return r;
}

// Direct per-cell counting; quadratic in n, used to validate raster_overlap.
inline RasterResult naive_giou(const BoxCXYWH& a, const BoxCXYWH& b, int n) {
    const double ex0 = std::min(a.x0(), b.x0()), ex1 = std::max(a.x1(), b.x1());
    const double ey0 = std::min(a.y0(), b.y0()), ey1 = std::max(a.y1(), b.y1());
    const double hx = (ex1 - ex0) / n, hy = (ey1 - ey0) / n;
    long ca = 0, cb = 0, ci = 0;
    for (int i = 0; i < n; ++i) {
        const double cx = ex0 + (i + 0.5) * hx;
        for (int j = 0; j < n; ++j) {
            const double cy = ey0 + (j + 0.5) * hy;
            const bool ina = cx >= a.x0() && cx <= a.x1() && cy >= a.y0() && cy <= a.y1();
            const bool inb = cx >= b.x0() && cx <= b.x1() && cy >= b.y0() && cy <= b.y1();
            ca += ina; cb += inb; ci += ina && inb;
        }
    }
    const double u = static_cast<double>(ca) + cb - ci;
    RasterResult r;
    r.iou = u > 0.0 ? ci / u : 0.0;
    r.giou = r.iou - (static_cast<double>(n) * n - u) / (static_cast<double>(n) * n);
    return r;
}

// Exhaustive search over all injective column->row maps, keeping the
// lexicographically first minimum.
inline touchline::Assignment brute_force_assignment(const CostMatrix& cm) {
    touchline::Assignment best;
    best.total_cost = std::numeric_limits<double>::infinity();
    std::vector<int> pick(cm.cols, -1);
    std::vector<char> used(cm.rows, 0);
    auto rec = [&](auto&& self, int col, double acc) -> void {
        if (col == cm.cols) {
            if (acc < best.total_cost) {
                best.total_cost = acc;
                best.row_of_col = pick;
            }
            return;
        }
        for (int r = 0; r < cm.rows; ++r) {
            if (used[r]) continue;
            used[r] = 1;
            pick[col] = r;
            self(self, col + 1, acc + cm.at(r, col));
            used[r] = 0;
        }
    };
    rec(rec, 0, 0.0);
    return best;
}

// Plain triple-loop matrix product reference.
inline std::vector<double> naive_matmul(const std::vector<double>& a,
                                        const std::vector<double>& b,
                                        int m, int k, int n) {
    std::vector<double> c(static_cast<std::size_t>(m) * n, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p)
                acc += a[static_cast<std::size_t>(i) * k + p] * b[static_cast<std::size_t>(p) * n + j];
            c[static_cast<std::size_t>(i) * n + j] = acc;
        }
    return c;
}

} // namespace oracles
