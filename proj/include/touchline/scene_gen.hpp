#pragma once
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "touchline/rng.hpp"
#include "touchline/scene.hpp"

namespace touchline {

// Scenes are built so that neither modality suffices alone: a same-category
// distractor sits off the pointing ray (language is ambiguous) and a
// different-category object sits on it (the gesture is ambiguous). Angular
// noise stds are calibrated so that dataset-mean colinearities land on
// 0.9901 (VTL) and 0.9580 (EWL); for theta ~ N(0, sigma^2) the expected
// cosine is exp(-sigma^2/2), refined by Monte Carlo over the full sampler.
struct GeneratorConfig {
    int grid = 16;
    double sigma_vtl = 0.14106;
    double sigma_ewl = 0.29294;
    int extra_min = 1;
    int extra_max = 3;
    double missing_head_rate = 0.03;
    double template_color_prob = 0.5;
    double template_plain_prob = 0.2;
    double off_ray_min_angle = 0.35; // radians
    int max_attempts = 64;

    void validate() const {
        if (sigma_vtl < 0.0 || sigma_ewl < 0.0 || sigma_vtl >= sigma_ewl)
            throw ConfigError("generator requires 0 <= sigma_vtl < sigma_ewl");
        if (extra_min < 0 || extra_max < extra_min)
            throw ConfigError("bad extra distractor range");
        if (missing_head_rate < 0.0 || missing_head_rate >= 1.0)
            throw ConfigError("missing_head_rate must be in [0,1)");
        if (template_color_prob + template_plain_prob > 1.0)
            throw ConfigError("template probabilities exceed 1");
        if (grid < 2) throw ConfigError("grid too small");
    }
};

namespace detail {

inline constexpr double kEdgeMargin = 0.02;

inline bool in_unit(const Point2& p, double m = kEdgeMargin) {
    return p.x >= m && p.x <= 1.0 - m && p.y >= m && p.y <= 1.0 - m;
}

inline bool box_in_unit(const BoxCXYWH& b, double m = kEdgeMargin) {
    return b.x0() >= m && b.x1() <= 1.0 - m && b.y0() >= m && b.y1() <= 1.0 - m;
}

inline bool disjoint(const BoxCXYWH& a, const BoxCXYWH& b, double gap = 0.015) {
    return a.x1() + gap <= b.x0() || b.x1() + gap <= a.x0() ||
           a.y1() + gap <= b.y0() || b.y1() + gap <= a.y0();
}

inline bool disjoint_from_all(const BoxCXYWH& b, const std::vector<SceneObject>& placed) {
    for (const SceneObject& o : placed)
        if (!disjoint(b, o.box)) return false;
    return true;
}

inline void sample_size(Rng& rng, double& w, double& h) {
    const double u = rng.uniform();
    if (u < 0.40) { w = rng.uniform(0.06, 0.14); h = rng.uniform(0.06, 0.14); }
    else if (u < 0.80) { w = rng.uniform(0.15, 0.28); h = rng.uniform(0.15, 0.28); }
    else { w = rng.uniform(0.30, 0.42); h = rng.uniform(0.30, 0.42); }
}

// Feasible ray parameter interval keeping a (w, h) box fully inside the
// margins along origin + t * dir; empty interval returns false.
inline bool ray_box_interval(const Point2& origin, double ux, double uy,
                             double w, double h, double& tlo, double& thi) {
    tlo = 0.0;
    thi = 10.0;
    const double bounds[2][2] = {
        {kEdgeMargin + w / 2.0, 1.0 - kEdgeMargin - w / 2.0},
        {kEdgeMargin + h / 2.0, 1.0 - kEdgeMargin - h / 2.0}};
    const double o[2] = {origin.x, origin.y};
    const double u[2] = {ux, uy};
    for (int axis = 0; axis < 2; ++axis) {
        if (std::fabs(u[axis]) < 1e-9) {
            if (o[axis] < bounds[axis][0] || o[axis] > bounds[axis][1]) return false;
            continue;
        }
        double a = (bounds[axis][0] - o[axis]) / u[axis];
        double b = (bounds[axis][1] - o[axis]) / u[axis];
        if (a > b) std::swap(a, b);
        tlo = std::max(tlo, a);
        thi = std::min(thi, b);
    }
    return tlo < thi;
}

} // namespace detail

inline Scene sample_scene(Rng& rng, const GeneratorConfig& cfg) {
    using namespace detail;
    cfg.validate();

    for (int scene_try = 0; scene_try < cfg.max_attempts; ++scene_try) {
        Scene scene;

        // pointer geometry: eye, aim direction, fingertip
        const Point2 eye{rng.uniform(0.12, 0.88), rng.uniform(0.12, 0.62)};
        const double theta = rng.normal(0.0, cfg.sigma_vtl);

        Point2 aim;
        double ux = 0, uy = 0;
        bool aimed = false;
        for (int k = 0; k < cfg.max_attempts && !aimed; ++k) {
            aim = {rng.uniform(0.15, 0.85), rng.uniform(0.15, 0.85)};
            const double dx = aim.x - eye.x, dy = aim.y - eye.y;
            const double len = std::sqrt(dx * dx + dy * dy);
            if (len < 0.25) continue;
            ux = dx / len;
            uy = dy / len;
            aimed = true;
        }
        if (!aimed) continue;

        const double ulen = rng.uniform(0.10, 0.18);
        const Point2 fingertip{eye.x + ulen * ux, eye.y + ulen * uy};
        if (!in_unit(fingertip)) continue;

        // referent center on the perturbed ray
        const double ct = std::cos(theta), st = std::sin(theta);
        const double px = ux * ct - uy * st;
        const double py = ux * st + uy * ct;
        double rw, rh;
        sample_size(rng, rw, rh);
        double tlo, thi;
        if (!ray_box_interval(eye, px, py, rw, rh, tlo, thi)) continue;
        tlo = std::max(tlo, std::max(0.20, ulen + 0.06));
        thi = std::min(thi, 0.60);
        if (tlo >= thi) continue;
        const double t = rng.uniform(tlo, thi);
        const Point2 center{eye.x + t * px, eye.y + t * py};

        SceneObject referent;
        referent.box = {center.x, center.y, rw, rh};
        referent.category = rng.uniform_int(0, kNumCategories - 1);
        referent.color = rng.uniform_int(0, kNumColors - 1);
        referent.is_referent = true;

        // arm: shoulder under the eye, elbow under the shoulder, wrist aimed
        // at the referent with its own angular noise
        HumanPose pose;
        pose.eye = eye;
        pose.fingertip = fingertip;
        bool arm_ok = false;
        const double psi = rng.normal(0.0, cfg.sigma_ewl);
        for (int k = 0; k < cfg.max_attempts && !arm_ok; ++k) {
            const Point2 shoulder{eye.x + rng.uniform(-0.02, 0.02),
                                  eye.y + rng.uniform(0.08, 0.14)};
            const Point2 elbow{shoulder.x + rng.uniform(-0.03, 0.03),
                               shoulder.y + rng.uniform(0.10, 0.16)};
            if (!in_unit(shoulder) || !in_unit(elbow)) continue;
            const double dx = center.x - elbow.x, dy = center.y - elbow.y;
            const double dist = std::sqrt(dx * dx + dy * dy);
            if (dist < 0.05) continue;
            const double cp = std::cos(psi), sp = std::sin(psi);
            const double wx = (dx * cp - dy * sp) / dist;
            const double wy = (dx * sp + dy * cp) / dist;
            const double v = rng.uniform(0.08, 0.14);
            const Point2 wrist{elbow.x + v * wx, elbow.y + v * wy};
            if (!in_unit(wrist)) continue;
            pose.shoulder = shoulder;
            pose.elbow = elbow;
            pose.wrist = wrist;
            arm_ok = true;
        }
        if (!arm_ok) continue;

        scene.objects.push_back(referent);

        // utterance template decided up front: the required same-category
        // distractor copies the referent's color whenever the phrase names it
        const double tmpl = rng.uniform();
        const bool use_color = tmpl < cfg.template_color_prob;
        const bool use_near =
            !use_color && tmpl >= cfg.template_color_prob + cfg.template_plain_prob;

        // different-category object on the unperturbed ray
        bool on_ray_ok = false;
        for (int k = 0; k < cfg.max_attempts && !on_ray_ok; ++k) {
            SceneObject obj;
            double w, h;
            sample_size(rng, w, h);
            double lo, hi;
            if (!ray_box_interval(eye, ux, uy, w, h, lo, hi)) break;
            lo = std::max(lo, 0.15);
            hi = std::min(hi, 0.75);
            if (lo >= hi) break;
            const double t2 = rng.uniform(lo, hi);
            const double jitter = rng.uniform(-0.008, 0.008);
            obj.box = {eye.x + t2 * ux - uy * jitter, eye.y + t2 * uy + ux * jitter, w, h};
            if (!box_in_unit(obj.box) || !disjoint_from_all(obj.box, scene.objects)) continue;
            int cat = rng.uniform_int(0, kNumCategories - 2);
            if (cat >= referent.category) ++cat;
            obj.category = cat;
            obj.color = rng.uniform_int(0, kNumColors - 1);
            scene.objects.push_back(obj);
            on_ray_ok = true;
        }
        if (!on_ray_ok) continue;

        // same-category distractor off the ray
        const double cos_margin = std::cos(cfg.off_ray_min_angle);
        bool off_ray_ok = false;
        for (int k = 0; k < cfg.max_attempts && !off_ray_ok; ++k) {
            SceneObject obj;
            double w, h;
            sample_size(rng, w, h);
            obj.box = {rng.uniform(kEdgeMargin + w / 2.0, 1.0 - kEdgeMargin - w / 2.0),
                       rng.uniform(kEdgeMargin + h / 2.0, 1.0 - kEdgeMargin - h / 2.0),
                       w, h};
            const double dx = obj.box.cx - eye.x, dy = obj.box.cy - eye.y;
            const double dist = std::sqrt(dx * dx + dy * dy);
            if (dist < 0.12) continue;
            if ((dx * ux + dy * uy) / dist > cos_margin) continue;
            if (!disjoint_from_all(obj.box, scene.objects)) continue;
            obj.category = referent.category;
            obj.color = use_color || use_near ? referent.color
                                              : rng.uniform_int(0, kNumColors - 1);
            scene.objects.push_back(obj);
            off_ray_ok = true;
        }
        if (!off_ray_ok) continue;

        // free distractors; ones sharing the referent's category stay off-ray
        const int extras = rng.uniform_int(cfg.extra_min, cfg.extra_max);
        bool extras_ok = true;
        for (int e = 0; e < extras && extras_ok; ++e) {
            bool placed = false;
            for (int k = 0; k < cfg.max_attempts && !placed; ++k) {
                SceneObject obj;
                double w, h;
                sample_size(rng, w, h);
                obj.box = {rng.uniform(kEdgeMargin + w / 2.0, 1.0 - kEdgeMargin - w / 2.0),
                           rng.uniform(kEdgeMargin + h / 2.0, 1.0 - kEdgeMargin - h / 2.0),
                           w, h};
                obj.category = rng.uniform_int(0, kNumCategories - 1);
                obj.color = rng.uniform_int(0, kNumColors - 1);
                if (obj.category == referent.category) {
                    const double dx = obj.box.cx - eye.x, dy = obj.box.cy - eye.y;
                    const double dist = std::sqrt(dx * dx + dy * dy);
                    if (dist < 0.12 || (dx * ux + dy * uy) / dist > cos_margin) continue;
                }
                if (!disjoint_from_all(obj.box, scene.objects)) continue;
                scene.objects.push_back(obj);
                placed = true;
            }
            extras_ok = placed;
        }
        if (!extras_ok) continue;

        // deterministic shuffle so the referent has no positional tell
        for (int i = static_cast<int>(scene.objects.size()) - 1; i > 0; --i)
            std::swap(scene.objects[i], scene.objects[rng.uniform_int(0, i)]);

        if (rng.bernoulli(cfg.missing_head_rate)) pose.eye.reset();
        scene.pose = pose;

        // utterance
        auto push = [&](int tok) {
            scene.utterance.push_back(tok);
            if (!scene.utterance_text.empty()) scene.utterance_text += ' ';
            scene.utterance_text += token_text(tok);
        };
        push(kTokenThe);
        if (use_color || use_near) push(color_token(referent.color));
        push(category_token(referent.category));
        scene.span_begin = 0;
        scene.span_end = static_cast<int>(scene.utterance.size());
        if (use_near) {
            const SceneObject* landmark = nullptr;
            double best = 1e9;
            for (const SceneObject& o : scene.objects) {
                if (o.is_referent) continue;
                const double d = std::hypot(o.box.cx - referent.box.cx,
                                            o.box.cy - referent.box.cy);
                if (d < best) { best = d; landmark = &o; }
            }
            push(kTokenNear);
            push(kTokenThe);
            push(color_token(landmark->color));
            push(category_token(landmark->category));
        }

        scene.condition = Condition::Full;
        return scene;
    }
    throw PlacementFailure("could not place a valid scene; config over-constrained");
}

/// Deterministic in (seed, cfg); scene i draws from its own derived stream.
inline std::vector<Scene> generate_scenes(const GeneratorConfig& cfg, int count,
                                          std::uint64_t seed) {
    cfg.validate();
    std::vector<Scene> scenes;
    scenes.reserve(count);
    for (int i = 0; i < count; ++i) {
        Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(i));
        Scene s = sample_scene(rng, cfg);
        s.id = i;
        scenes.push_back(std::move(s));
    }
    return scenes;
}

struct DatasetStats {
    double mean_vtl = 0.0;
    double mean_ewl = 0.0;
    int n_vtl = 0;
    int n_ewl = 0;
    double ray_heuristic_acc = 0.0;
    double category_heuristic_acc = 0.0;
};

inline DatasetStats dataset_stats(const std::vector<Scene>& scenes) {
    DatasetStats st;
    double sum_v = 0.0, sum_e = 0.0;
    int ray_total = 0, ray_hit = 0, cat_hit = 0;
    for (const Scene& s : scenes) {
        const SceneObject& ref = s.referent();
        if (const auto vtl = s.annotation_line(GestureKind::VTL)) {
            sum_v += cosine_colinearity(*vtl, box_center(ref.box));
            ++st.n_vtl;
            // best-colinearity heuristic
            double best = -2.0;
            const SceneObject* pick = nullptr;
            for (const SceneObject& o : s.objects) {
                const double c = cosine_colinearity(*vtl, box_center(o.box));
                if (c > best) { best = c; pick = &o; }
            }
            ++ray_total;
            if (pick && pick->is_referent) ++ray_hit;
        }
        if (const auto ewl = s.annotation_line(GestureKind::EWL)) {
            sum_e += cosine_colinearity(*ewl, box_center(ref.box));
            ++st.n_ewl;
        }
        // first object of the uttered category
        for (const SceneObject& o : s.objects) {
            if (o.category == ref.category) {
                if (o.is_referent) ++cat_hit;
                break;
            }
        }
    }
    if (st.n_vtl > 0) st.mean_vtl = sum_v / st.n_vtl;
    if (st.n_ewl > 0) st.mean_ewl = sum_e / st.n_ewl;
    if (ray_total > 0) st.ray_heuristic_acc = static_cast<double>(ray_hit) / ray_total;
    if (!scenes.empty())
        st.category_heuristic_acc = static_cast<double>(cat_hit) / scenes.size();
    return st;
}

} // namespace touchline
