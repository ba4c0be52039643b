#pragma once
#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "touchline/autodiff.hpp"
#include "touchline/rng.hpp"

namespace touchline {

struct GradCheckReport {
    double max_rel_err = 0.0;
    int checked = 0;
    int excluded_kinks = 0;
};

// Compares analytic gradients against central finite differences on sampled
// coordinates. Coordinates where the one-sided slopes disagree (a relu-style
// kink at the probe point) are excluded and counted instead of failed.
//
// ValueFn: double(const ParamStore&)
// GradFn:  double(const ParamStore&, std::vector<std::vector<double>>&)
template <class ValueFn, class GradFn>
GradCheckReport gradcheck(ValueFn&& value, GradFn&& grad_fn, ParamStore params,
                          double step, int max_coords, Rng& rng,
                          double kink_tol = 0.05) {
    std::vector<std::vector<double>> grads;
    grad_fn(params, grads);
    const double f0 = value(params);

    std::vector<std::pair<int, int>> coords;
    for (std::size_t p = 0; p < params.size(); ++p)
        for (std::size_t i = 0; i < params.tensors[p].numel(); ++i)
            coords.emplace_back(static_cast<int>(p), static_cast<int>(i));

    std::vector<std::pair<int, int>> picked;
    if (static_cast<int>(coords.size()) <= max_coords) {
        picked = coords;
    } else {
        std::set<std::size_t> seen;
        while (static_cast<int>(picked.size()) < max_coords) {
            const std::size_t k = rng.bits() % coords.size();
            if (seen.insert(k).second) picked.push_back(coords[k]);
        }
    }

    GradCheckReport report;
    for (auto [p, i] : picked) {
        const double orig = params.tensors[p][i];
        params.tensors[p].set(i, orig + step);
        const double fp = value(params);
        params.tensors[p].set(i, orig - step);
        const double fm = value(params);
        params.tensors[p].set(i, orig);

        const double fwd = (fp - f0) / step;
        const double bwd = (f0 - fm) / step;
        const double slope_gap =
            std::fabs(fwd - bwd) / std::max({1.0, std::fabs(fwd), std::fabs(bwd)});
        if (slope_gap > kink_tol) {
            ++report.excluded_kinks;
            continue;
        }

        const double central = (fp - fm) / (2.0 * step);
        const double analytic = grads[p][i];
        const double rel = std::fabs(analytic - central) / std::max(1.0, std::fabs(central));
        report.max_rel_err = std::max(report.max_rel_err, rel);
        ++report.checked;
    }
    return report;
}

} // namespace touchline
