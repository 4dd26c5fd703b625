// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// Two-disk geometry of a Matern cluster: the area of b(x, D) inside b(o, y),
// the distance law of a point uniform in a cloud seen from the origin, and
// the cloud area left outside the guard disk.

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "cloudcache/quadrature.hpp"

namespace cloudcache {

/// Cloud of radius D centred at distance x_norm from the user at the origin,
/// with a guard disk of radius d_g around the user.
struct CloudGeometry
{
    double D = 30.0;
    double d_g = 0.0;
    double x_norm = 0.0;

    void validate() const
    {
        if (!(D > 0.0) || !(d_g >= 0.0) || !(x_norm >= 0.0) || !std::isfinite(D) || !std::isfinite(d_g)
            || !std::isfinite(x_norm))
        {
            std::ostringstream msg;
            msg << "CloudGeometry: need D > 0, d_g >= 0, x_norm >= 0 (got D=" << D << ", d_g=" << d_g
                << ", x_norm=" << x_norm << ")";
            throw std::domain_error(msg.str());
        }
    }

    CloudGeometry at(double distance) const { return CloudGeometry{D, d_g, distance}; }
};

namespace detail {

inline double clamp_unit(double v) { return std::clamp(v, -1.0, 1.0); }

inline void check_lens_domain(double x, double y, double D)
{
    const double slack = 1e-12 * std::max({1.0, x, D});
    if (!(x > 0.0) || y < std::abs(x - D) - slack || y > x + D + slack)
    {
        std::ostringstream msg;
        msg << "lens_area: y=" << y << " outside [|x-D|, x+D] for x=" << x << ", D=" << D;
        throw std::domain_error(msg.str());
    }
}

} // namespace detail

/// Area of b(x, D) ∩ b(o, y) for |x - D| <= y <= x + D and x > 0.
inline double lens_area(double x, double y, double D)
{
    detail::check_lens_domain(x, y, D);
    if (y <= 0.0)
        return 0.0;
    const double a1 = std::acos(detail::clamp_unit((D * D + x * x - y * y) / (2.0 * x * D)));
    const double a2 = std::acos(detail::clamp_unit((y * y + x * x - D * D) / (2.0 * x * y)));
    const double q = ((y + x) * (y + x) - D * D) * (D * D - (y - x) * (y - x));
    const double area = D * D * a1 + y * y * a2 - 0.5 * std::sqrt(std::max(0.0, q));
    return std::clamp(area, 0.0, std::numbers::pi * std::min(D, y) * std::min(D, y));
}

inline double lens_area(double x_norm, double y, const CloudGeometry& geom)
{
    return lens_area(x_norm, y, geom.D);
}

/// d/dy of lens_area: the length of the circle of radius y lying inside
/// b(x, D), i.e. 2 y acos((y^2 + x^2 - D^2) / (2 x y)). The sqrt and the
/// D^2 acos terms of the area formula cancel exactly under differentiation.
inline double lens_area_derivative(double x, double y, double D)
{
    detail::check_lens_domain(x, y, D);
    if (y <= 0.0)
        return 0.0;
    return 2.0 * y * std::acos(detail::clamp_unit((y * y + x * x - D * D) / (2.0 * x * y)));
}

/// Density of the distance from the origin of a point uniform in b(x, D).
inline double distance_pdf(double y, const CloudGeometry& geom)
{
    const double D = geom.D;
    const double x = geom.x_norm;
    if (y <= 0.0 || y >= x + D)
        return 0.0;
    const double area = std::numbers::pi * D * D;
    if (x == 0.0)
        return 2.0 * y / (D * D);
    if (x < D && y < D - x)
        return 2.0 * y / (D * D);
    if (y < std::abs(x - D))
        return 0.0;
    return lens_area_derivative(x, y, D) / area;
}

inline double distance_cdf(double y, const CloudGeometry& geom)
{
    const double D = geom.D;
    const double x = geom.x_norm;
    if (y <= 0.0)
        return 0.0;
    if (y >= x + D)
        return 1.0;
    if (x == 0.0)
        return (y / D) * (y / D);
    if (x < D && y < D - x)
        return (y / D) * (y / D);
    if (y <= std::abs(x - D))
        return 0.0;
    return std::clamp(lens_area(x, y, D) / (std::numbers::pi * D * D), 0.0, 1.0);
}

/// Density of the distance to the closest of n i.i.d. points of the cloud.
inline double serving_distance_pdf_given_n(double r, int n, const CloudGeometry& geom)
{
    if (n < 1)
        throw std::domain_error("serving_distance_pdf_given_n: n must be >= 1");
    const double f = distance_pdf(r, geom);
    if (f == 0.0)
        return 0.0;
    const double survival = 1.0 - distance_cdf(r, geom);
    return n * f * std::pow(survival, n - 1);
}

/// |b(x, D) \ b(o, d_g)| as a function of the cloud centre distance x.
inline double guard_excluded_area(double x, const CloudGeometry& geom)
{
    const double D = geom.D;
    const double dg = geom.d_g;
    const double full = std::numbers::pi * D * D;
    if (dg <= 0.0 || x >= D + dg)
        return full;
    if (x < std::abs(D - dg) || x == 0.0)
    {
        const double r = std::min(dg, D);
        return full - std::numbers::pi * r * r;
    }
    return std::max(0.0, full - lens_area(x, dg, D));
}

/// Breakpoints of the distance law of b(x, D): where the uniform and lens
/// branches meet and where the support ends.
inline std::pair<double, double> distance_support(const CloudGeometry& geom)
{
    const double x = geom.x_norm;
    return {x >= geom.D ? x - geom.D : 0.0, x + geom.D};
}

/// Integral of f(y) g(y) over y >= lower, where f is distance_pdf(., geom).
///
/// The lens branch is integrated in t with y = c + h sin t, which turns the
/// square-root behaviour of f at the branch ends into smooth endpoints.
/// `breakpoints` are extra kinks of g in y.
template<class V, class G>
V integrate_distance_law(const CloudGeometry& geom,
                         G&& g,
                         double lower,
                         const quad::QuadSpec& spec,
                         const std::vector<double>& breakpoints = {})
{
    using quad::operator+;
    using quad::operator*;
    const double D = geom.D;
    const double x = geom.x_norm;
    lower = std::max(lower, 0.0);
    V total{};
    bool have = false;
    auto add = [&](const V& v) {
        if (!have)
        {
            total = v;
            have = true;
        }
        else
            total = total + v;
    };

    if (x < D && D - x > lower)
    {
        const double lo = lower;
        const double hi = D - x;
        auto f = [&](double y) -> V { return (2.0 * y / (D * D)) * g(y); };
        std::vector<double> bp;
        for (double b : breakpoints)
            if (b > lo && b < hi)
                bp.push_back(b);
        add(quad::integrate_finite(f, lo, hi, spec, bp).value);
    }
    if (x > 0.0)
    {
        const double ya = std::abs(x - D);
        const double yb = x + D;
        const double lo = std::max(ya, lower);
        if (lo < yb)
        {
            const double c = x < D ? D : x;
            const double h = x < D ? x : D;
            const double area = std::numbers::pi * D * D;
            const double tlo = std::asin(std::clamp((lo - c) / h, -1.0, 1.0));
            const double thi = 0.5 * std::numbers::pi;
            // Angle subtended at the origin by the arc of radius y inside
            // b(x, D), from atan2 with cancellation-free factors.
            auto f = [&](double t) -> V {
                const double st = std::sin(t);
                const double y = c + h * st;
                if (y <= 0.0)
                    return 0.0 * g(std::max(y, 1e-300));
                double dm, dp, nc;
                if (x >= D)
                {
                    const double ct = std::cos(t);
                    dm = D * D * ct * ct;
                    dp = (y + x - D) * (y + x + D);
                    nc = y * y + (x - D) * (x + D);
                }
                else
                {
                    const double sm = std::sin(0.25 * std::numbers::pi - 0.5 * t);
                    const double cm = std::cos(0.25 * std::numbers::pi - 0.5 * t);
                    const double one_m = 2.0 * sm * sm;
                    const double one_p = 2.0 * cm * cm;
                    dm = x * one_m * (2.0 * D - x * one_m);
                    dp = x * one_p * (y + x + D);
                    nc = x * st * (y + D) + x * x;
                }
                const double theta = std::atan2(std::sqrt(std::max(0.0, dm * dp)), nc);
                const double rho = 2.0 * y * theta / area;
                return (rho * h * std::cos(t)) * g(y);
            };
            std::vector<double> bp;
            for (double b : breakpoints)
                if (b > lo && b < yb)
                    bp.push_back(std::asin(std::clamp((b - c) / h, -1.0, 1.0)));
            add(quad::integrate_finite(f, tlo, thi, spec, bp).value);
        }
    }
    if (!have)
        return 0.0 * g(std::max(lower, D));
    return total;
}

} // namespace cloudcache
