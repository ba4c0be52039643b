#pragma once
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "touchline/geometry.hpp"
#include "touchline/tensor.hpp"

namespace touchline {

/// rows = predictions, cols = ground-truth targets, rows >= cols.
struct CostMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> c;

    CostMatrix() = default;
    CostMatrix(int r, int k) : rows(r), cols(k), c(static_cast<std::size_t>(r) * k, 0.0) {}
    double& at(int r, int k) { return c[static_cast<std::size_t>(r) * cols + k]; }
    double at(int r, int k) const { return c[static_cast<std::size_t>(r) * cols + k]; }
};

struct Assignment {
    std::vector<int> row_of_col;
    double total_cost = 0.0;
};

namespace detail {

// Potential-based augmenting-path solver; returns the row assigned to each
// column. Requires rows >= cols.
inline std::vector<int> hungarian_rows(const CostMatrix& cm) {
    const int n = cm.cols, m = cm.rows;
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, INF);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = INF;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cm.at(j - 1, i0 - 1) - u[i0] - v[j];
                if (cur < minv[j]) { minv[j] = cur; way[j] = j0; }
                if (minv[j] < delta) { delta = minv[j]; j1 = j; }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) { u[p[j]] += delta; v[j] -= delta; }
                else minv[j] -= delta;
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> row_of_col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) row_of_col[p[j] - 1] = j - 1;
    return row_of_col;
}

inline double hungarian_value(const CostMatrix& cm) {
    const std::vector<int> rows = hungarian_rows(cm);
    double total = 0.0;
    for (int k = 0; k < cm.cols; ++k) total += cm.at(rows[k], k);
    return total;
}

} // namespace detail

/// Minimum-cost injective assignment of columns to rows. Among equal-cost
/// optima the one with lexicographically smallest row sequence is returned.
inline Assignment hungarian(const CostMatrix& cm) {
    if (cm.cols == 0) return {};
    if (cm.rows < cm.cols) throw ShapeMismatch("cost matrix needs rows >= cols");
    for (double v : cm.c)
        if (!std::isfinite(v)) throw NonFinite("cost matrix entry is not finite");

    const double best = detail::hungarian_value(cm);
    const double tol = 1e-9 * (1.0 + std::fabs(best));

    std::vector<int> remaining(cm.rows);
    for (int r = 0; r < cm.rows; ++r) remaining[r] = r;

    Assignment out;
    out.row_of_col.assign(cm.cols, -1);
    double accum = 0.0;
    for (int k = 0; k < cm.cols; ++k) {
        const int sub_cols = cm.cols - k - 1;
        int chosen = -1;
        double fallback_val = std::numeric_limits<double>::infinity();
        int fallback_row = -1;
        for (std::size_t ri = 0; ri < remaining.size(); ++ri) {
            const int r = remaining[ri];
            double rest = 0.0;
            if (sub_cols > 0) {
                CostMatrix sub(static_cast<int>(remaining.size()) - 1, sub_cols);
                int sr = 0;
                for (std::size_t rj = 0; rj < remaining.size(); ++rj) {
                    if (rj == ri) continue;
                    for (int kk = 0; kk < sub_cols; ++kk)
                        sub.at(sr, kk) = cm.at(remaining[rj], k + 1 + kk);
                    ++sr;
                }
                rest = detail::hungarian_value(sub);
            }
            const double candidate = accum + cm.at(r, k) + rest;
            if (candidate <= best + tol) { chosen = r; break; }
            if (candidate < fallback_val) { fallback_val = candidate; fallback_row = r; }
        }
        if (chosen < 0) chosen = fallback_row;
        out.row_of_col[k] = chosen;
        accum += cm.at(chosen, k);
        remaining.erase(std::find(remaining.begin(), remaining.end(), chosen));
    }
    out.total_cost = 0.0;
    for (int k = 0; k < cm.cols; ++k) out.total_cost += cm.at(out.row_of_col[k], k);
    return out;
}

/// Matching cost between predicted queries and ground-truth objects:
/// weighted box L1 + GIoU complement + missing token-span mass.
inline CostMatrix object_match_cost(const std::vector<BoxCXYWH>& pred_boxes,
                                    const Tensor& token_dists,
                                    const std::vector<BoxCXYWH>& gt_boxes,
                                    const std::vector<std::pair<int, int>>& gt_spans,
                                    double w_l1, double w_giou, double w_tok) {
    const int R = static_cast<int>(pred_boxes.size());
    const int K = static_cast<int>(gt_boxes.size());
    CostMatrix cm(R, K);
    for (int r = 0; r < R; ++r) {
        const BoxCXYWH& p = pred_boxes[r];
        for (int k = 0; k < K; ++k) {
            const BoxCXYWH& g = gt_boxes[k];
            const double l1 = std::fabs(p.cx - g.cx) + std::fabs(p.cy - g.cy) +
                              std::fabs(p.w - g.w) + std::fabs(p.h - g.h);
            double span_mass = 0.0;
            for (int t = gt_spans[k].first; t < gt_spans[k].second; ++t)
                span_mass += token_dists.at(r, t);
            cm.at(r, k) = w_l1 * l1 + w_giou * (1.0 - giou(p, g)) + w_tok * (1.0 - span_mass);
        }
    }
    return cm;
}

/// Gesture query matched to the ground-truth line by L1 over the four
/// keypoint coordinates; ties go to the lower query index.
inline std::optional<int> gesture_match(const std::vector<std::pair<Point2, Point2>>& pairs,
                                        const std::optional<GestureLine>& gt) {
    if (!gt) return std::nullopt;
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < pairs.size(); ++q) {
        const double d = std::fabs(pairs[q].first.x - gt->proximal.x) +
                         std::fabs(pairs[q].first.y - gt->proximal.y) +
                         std::fabs(pairs[q].second.x - gt->distal.x) +
                         std::fabs(pairs[q].second.y - gt->distal.y);
        if (d < best_d) { best_d = d; best = static_cast<int>(q); }
    }
    return best;
}

} // namespace touchline
