#pragma once
#include <cmath>

#include "touchline/scene.hpp"
#include "touchline/tensor.hpp"

namespace touchline {

// Visual tokens: one row per grid cell (row-major), channels are
// category occupancies, color occupancies, then keypoint heatmaps.
inline constexpr int kKeypointChannels = 5;
inline constexpr int kRasterChannels = kNumCategories + kNumColors + kKeypointChannels;

struct RasterConfig {
    int grid = 16;
    double keypoint_sigma = 0.05;
};

inline Tensor rasterize(const Scene& scene, const RasterConfig& cfg) {
    const int g = cfg.grid;
    Tensor out(static_cast<std::size_t>(g) * g, kRasterChannels);
    auto& d = out.mutable_data();
    const double cell = 1.0 / g;
    const double cell_area = cell * cell;

    for (const SceneObject& o : scene.objects) {
        const int gx0 = std::max(0, static_cast<int>(std::floor(o.box.x0() / cell)));
        const int gx1 = std::min(g - 1, static_cast<int>(std::floor(o.box.x1() / cell)));
        const int gy0 = std::max(0, static_cast<int>(std::floor(o.box.y0() / cell)));
        const int gy1 = std::min(g - 1, static_cast<int>(std::floor(o.box.y1() / cell)));
        for (int gy = gy0; gy <= gy1; ++gy) {
            for (int gx = gx0; gx <= gx1; ++gx) {
                const double ox = std::min(o.box.x1(), (gx + 1) * cell) -
                                  std::max(o.box.x0(), gx * cell);
                const double oy = std::min(o.box.y1(), (gy + 1) * cell) -
                                  std::max(o.box.y0(), gy * cell);
                if (ox <= 0.0 || oy <= 0.0) continue;
                const double frac = ox * oy / cell_area;
                const std::size_t row =
                    (static_cast<std::size_t>(gy) * g + gx) * kRasterChannels;
                d[row + o.category] += frac;
                d[row + kNumCategories + o.color] += frac;
            }
        }
    }

    if (scene.condition == Condition::Full && scene.pose) {
        const std::optional<Point2>* kps[kKeypointChannels] = {
            &scene.pose->eye, &scene.pose->fingertip, &scene.pose->elbow,
            &scene.pose->wrist, &scene.pose->shoulder};
        const double s2 = 2.0 * cfg.keypoint_sigma * cfg.keypoint_sigma;
        for (int k = 0; k < kKeypointChannels; ++k) {
            if (!kps[k]->has_value()) continue;
            const Point2 p = kps[k]->value();
            for (int gy = 0; gy < g; ++gy) {
                for (int gx = 0; gx < g; ++gx) {
                    const double cx = (gx + 0.5) * cell, cy = (gy + 0.5) * cell;
                    const double d2 = (cx - p.x) * (cx - p.x) + (cy - p.y) * (cy - p.y);
                    d[(static_cast<std::size_t>(gy) * g + gx) * kRasterChannels +
                      kNumCategories + kNumColors + k] = std::exp(-d2 / s2);
                }
            }
        }
    }
    return out;
}

/// Rearrange a G*G x C raster into (G/p)^2 rows of p*p*C patch features.
inline Tensor patchify(const Tensor& raster, int grid, int patch) {
    if (grid % patch != 0) throw ShapeMismatch("grid not divisible by patch");
    const int gp = grid / patch;
    const int c = static_cast<int>(raster.cols());
    Tensor out(static_cast<std::size_t>(gp) * gp, static_cast<std::size_t>(patch) * patch * c);
    auto& d = out.mutable_data();
    const auto& src = raster.data();
    for (int ty = 0; ty < gp; ++ty)
        for (int tx = 0; tx < gp; ++tx) {
            const std::size_t row =
                (static_cast<std::size_t>(ty) * gp + tx) * out.cols();
            int off = 0;
            for (int py = 0; py < patch; ++py)
                for (int px = 0; px < patch; ++px) {
                    const std::size_t cellrow =
                        (static_cast<std::size_t>(ty * patch + py) * grid +
                         (tx * patch + px)) * c;
                    for (int ch = 0; ch < c; ++ch) d[row + off++] = src[cellrow + ch];
                }
        }
    return out;
}

} // namespace touchline
