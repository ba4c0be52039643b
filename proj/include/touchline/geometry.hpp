#pragma once
#include <cmath>
#include <optional>
#include <string>

#include "touchline/errors.hpp"

namespace touchline {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

/// Axis-aligned box in normalized center-size form.
struct BoxCXYWH {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;

    double x0() const { return cx - w / 2.0; }
    double y0() const { return cy - h / 2.0; }
    double x1() const { return cx + w / 2.0; }
    double y1() const { return cy + h / 2.0; }
    double area() const { return w * h; }

    static BoxCXYWH from_corners(double x0, double y0, double x1, double y1) {
        return {(x0 + x1) / 2.0, (y0 + y1) / 2.0, x1 - x0, y1 - y0};
    }
};

inline Point2 box_center(const BoxCXYWH& b) { return {b.cx, b.cy}; }

enum class GestureKind { VTL, EWL };

inline const char* to_string(GestureKind k) {
    return k == GestureKind::VTL ? "vtl" : "ewl";
}

/// Directed gesture line: eye->fingertip for VTL, elbow->wrist for EWL.
struct GestureLine {
    Point2 proximal;
    Point2 distal;
    GestureKind kind = GestureKind::VTL;

    GestureLine(Point2 p, Point2 d, GestureKind k) : proximal(p), distal(d), kind(k) {
        const double dx = d.x - p.x, dy = d.y - p.y;
        if (std::sqrt(dx * dx + dy * dy) <= 1e-6)
            throw DegenerateVector("gesture line endpoints coincide");
    }
};

/// Cosine of the angle between (distal - proximal) and (target - proximal).
inline double cosine_colinearity(const GestureLine& line, const Point2& target) {
    const double ax = line.distal.x - line.proximal.x;
    const double ay = line.distal.y - line.proximal.y;
    const double bx = target.x - line.proximal.x;
    const double by = target.y - line.proximal.y;
    const double na = std::sqrt(ax * ax + ay * ay);
    const double nb = std::sqrt(bx * bx + by * by);
    if (na <= 1e-9 || nb <= 1e-9)
        throw DegenerateVector("zero-length direction in colinearity");
    double c = (ax * bx + ay * by) / (na * nb);
    if (c > 1.0) c = 1.0;
    if (c < -1.0) c = -1.0;
    return c;
}

inline double iou(const BoxCXYWH& a, const BoxCXYWH& b) {
    const double iw = std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0());
    const double ih = std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0());
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

inline double giou(const BoxCXYWH& a, const BoxCXYWH& b) {
    const double iw = std::min(a.x1(), b.x1()) - std::max(a.x0(), b.x0());
    const double ih = std::min(a.y1(), b.y1()) - std::max(a.y0(), b.y0());
    const double inter = (iw > 0.0 && ih > 0.0) ? iw * ih : 0.0;
    const double uni = a.area() + b.area() - inter;
    const double ew = std::max(a.x1(), b.x1()) - std::min(a.x0(), b.x0());
    const double eh = std::max(a.y1(), b.y1()) - std::min(a.y0(), b.y0());
    const double enclose = ew * eh;
    return inter / uni - (enclose - uni) / enclose;
}

/// Upper-body keypoints in normalized coordinates. A keypoint may be absent
/// (e.g. eye when the head is outside the frame).
struct HumanPose {
    std::optional<Point2> eye;
    std::optional<Point2> fingertip;
    std::optional<Point2> elbow;
    std::optional<Point2> wrist;
    std::optional<Point2> shoulder;
};

inline GestureLine make_gesture_line(const HumanPose& pose, GestureKind kind) {
    const auto need = [](const std::optional<Point2>& p, const char* name) -> Point2 {
        if (!p) throw MissingKeypoint(std::string("missing keypoint: ") + name);
        return *p;
    };
    if (kind == GestureKind::VTL)
        return GestureLine(need(pose.eye, "eye"), need(pose.fingertip, "fingertip"), kind);
    return GestureLine(need(pose.elbow, "elbow"), need(pose.wrist, "wrist"), kind);
}

} // namespace touchline
