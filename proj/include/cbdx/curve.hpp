#pragma once
// Piecewise-linear probability curves. Every elicited graph in the knowledge
// base (link strength vs. hours, prior vs. age, weight vs. cycle day) is one
// of these, distinguished only by the domain of its abscissa.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "cbdx/number.hpp"

namespace cbdx {

struct TimeAxis {
    static constexpr double lo = 0.0;
    static constexpr double hi = 132.0; // hours since first observed symptom
    static constexpr std::string_view name = "hours";
};

struct AgeAxis {
    static constexpr double lo = 0.0;
    static constexpr double hi = 120.0;
    static constexpr std::string_view name = "age";
};

struct CycleAxis {
    static constexpr double lo = 1.0;
    static constexpr double hi = 28.0;
    static constexpr std::string_view name = "cycle day";
};

struct CurvePoint {
    double x = 0.0;
    double p = 0.0;
    bool operator==(const CurvePoint&) const = default;
};

template <class Axis>
struct Curve {
    using axis_type = Axis;

    std::vector<CurvePoint> points;

    Curve() = default;
    Curve(std::initializer_list<CurvePoint> pts) : points(pts) {}
    explicit Curve(std::vector<CurvePoint> pts) : points(std::move(pts)) {}

    static Curve constant(double p) { return Curve{{Axis::lo, p}}; }

    // Linear between breakpoints, clamped to the end values outside them.
    double operator()(double x) const {
        if (points.empty()) return 0.0;
        if (x <= points.front().x) return points.front().p;
        if (x >= points.back().x) return points.back().p;
        std::size_t hi = 1;
        while (points[hi].x < x) ++hi;
        const CurvePoint& a = points[hi - 1];
        const CurvePoint& b = points[hi];
        if (x == b.x) return b.p;
        const double w = (x - a.x) / (b.x - a.x);
        return a.p + w * (b.p - a.p);
    }

    bool operator==(const Curve&) const = default;
};

using TimeCurve = Curve<TimeAxis>;
using AgeCurve = Curve<AgeAxis>;
using CycleCurve = Curve<CycleAxis>;

inline double eval_time_curve(const TimeCurve& curve, double hours) {
    return curve(hours);
}

struct CurveIssue {
    std::size_t point = 0; // index of the offending breakpoint
    enum class Field { x, p, shape } field = Field::shape;
    std::string message;
};

// Checks the breakpoint invariants: non-empty, abscissae strictly increasing
// and inside the axis domain, probabilities in [0,1].
template <class Axis>
std::vector<CurveIssue> check_curve(const Curve<Axis>& curve) {
    std::vector<CurveIssue> issues;
    if (curve.points.empty()) {
        issues.push_back({0, CurveIssue::Field::shape, "curve has no breakpoints"});
        return issues;
    }
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        const auto& pt = curve.points[i];
        if (!std::isfinite(pt.x) || pt.x < Axis::lo || pt.x > Axis::hi) {
            issues.push_back({i, CurveIssue::Field::x,
                              std::string(Axis::name) + " value out of range [" +
                                  format_decimal(Axis::lo) + ", " + format_decimal(Axis::hi) + "]"});
        }
        if (!std::isfinite(pt.p) || pt.p < 0.0 || pt.p > 1.0) {
            issues.push_back({i, CurveIssue::Field::p, "probability out of range [0, 1]"});
        }
        if (i > 0 && !(pt.x > curve.points[i - 1].x)) {
            issues.push_back({i, CurveIssue::Field::x,
                              std::string(Axis::name) + " values must be strictly increasing"});
        }
    }
    return issues;
}

} // namespace cbdx
