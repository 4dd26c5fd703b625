// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// Adaptive Gauss-Kronrod integration and bracketed root finding.
//
// The integrators are templated on the integrand's value type so the same
// driver handles real, complex and small fixed-size vector integrands
// (anything with +, scalar * and a `magnitude()` overload).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <type_traits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace cloudcache::quad {

struct QuadSpec
{
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_subdivisions = 400;
    // When false a non-converged integral is returned with converged == false.
    bool throw_on_failure = true;
};

class QuadratureError : public std::runtime_error
{
  public:
    QuadratureError(const std::string& what, double achieved, double requested)
        : std::runtime_error(what), achieved_(achieved), requested_(requested)
    {
    }

    double achieved() const noexcept { return achieved_; }
    double requested() const noexcept { return requested_; }

  private:
    double achieved_;
    double requested_;
};

class BracketError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

template<class V>
struct QuadResult
{
    V value{};
    double error = 0.0;
    int evaluations = 0;
    int subdivisions = 0;
    bool converged = true;
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }

template<std::size_t K>
double magnitude(const std::array<double, K>& v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

template<std::size_t K>
std::array<double, K> operator+(std::array<double, K> a, const std::array<double, K>& b)
{
    for (std::size_t i = 0; i < K; ++i)
        a[i] += b[i];
    return a;
}

template<std::size_t K>
std::array<double, K> operator-(std::array<double, K> a, const std::array<double, K>& b)
{
    for (std::size_t i = 0; i < K; ++i)
        a[i] -= b[i];
    return a;
}

template<std::size_t K>
std::array<double, K> operator*(double s, std::array<double, K> a)
{
    for (double& x : a)
        x *= s;
    return a;
}

inline double magnitude(const std::vector<double>& v)
{
    double m = 0.0;
    for (double x : v)
        m = std::max(m, std::abs(x));
    return m;
}

inline std::vector<double> operator+(std::vector<double> a, const std::vector<double>& b)
{
    if (a.empty())
        return b;
    for (std::size_t i = 0; i < b.size(); ++i)
        a[i] += b[i];
    return a;
}

inline std::vector<double> operator-(std::vector<double> a, const std::vector<double>& b)
{
    if (a.empty())
        a.assign(b.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i)
        a[i] -= b[i];
    return a;
}

inline std::vector<double> operator*(double s, std::vector<double> a)
{
    for (double& x : a)
        x *= s;
    return a;
}

namespace detail {

template<class V>
V zero_value()
{
    if constexpr (std::is_arithmetic_v<V>)
        return V(0);
    else if constexpr (std::is_same_v<V, std::complex<double>>)
        return V(0.0, 0.0);
    else
    {
        V v{};
        return v;
    }
}

template<class V>
struct Panel
{
    double a;
    double b;
    V value;
    double error;
};

// One 21-point Kronrod panel with its embedded 10-point Gauss estimate.
// The error is |K21 - G10|, which bounds the Gauss error and therefore
// overestimates the Kronrod error for smooth integrands.
template<class V, class F>
Panel<V> gk21_panel(F& f, double a, double b)
{
    using gk = boost::math::quadrature::gauss_kronrod<double, 21>;
    using g = boost::math::quadrature::gauss<double, 10>;
    const auto& xk = gk::abscissa();
    const auto& wk = gk::weights();
    const auto& wg = g::weights();

    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    V fc = f(c);
    V kron = wk[0] * fc;
    V gauss = zero_value<V>();
    for (std::size_t i = 1; i < xk.size(); ++i)
    {
        V fp = f(c + h * xk[i]);
        V fm = f(c - h * xk[i]);
        V sum = fp + fm;
        kron = kron + wk[i] * sum;
        if (i % 2 == 1)
            gauss = gauss + wg[i / 2] * sum;
    }
    kron = h * kron;
    gauss = h * gauss;
    double err = magnitude(kron - gauss);
    err = std::max(err, 50.0 * std::numeric_limits<double>::epsilon() * magnitude(kron));
    return Panel<V>{a, b, kron, err};
}

template<class V>
struct PanelOrder
{
    bool operator()(const Panel<V>& l, const Panel<V>& r) const
    {
        if (l.error != r.error)
            return l.error < r.error;
        return l.a > r.a;
    }
};

} // namespace detail

/// Adaptive integration of f over [a, b].
///
/// Known kinks of the integrand must be passed as breakpoints; they seed the
/// initial partition. Refinement bisects the panel with the largest error
/// estimate until the total estimate meets max(abs_tol, rel_tol * |value|).
template<class F>
auto integrate_finite(F&& f,
                      double a,
                      double b,
                      const QuadSpec& spec = {},
                      const std::vector<double>& breakpoints = {})
    -> QuadResult<std::decay_t<decltype(f(a))>>
{
    using V = std::decay_t<decltype(f(a))>;
    if (!(a <= b))
        throw std::domain_error("integrate_finite: requires a <= b");
    QuadResult<V> result;
    result.value = detail::zero_value<V>();
    if (a == b)
        return result;

    std::vector<double> cuts{a};
    for (double p : breakpoints)
        if (p > a && p < b)
            cuts.push_back(p);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    std::priority_queue<detail::Panel<V>, std::vector<detail::Panel<V>>, detail::PanelOrder<V>> heap;
    V total = detail::zero_value<V>();
    double total_err = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    {
        auto p = detail::gk21_panel<V>(f, cuts[i], cuts[i + 1]);
        total = total + p.value;
        total_err += p.error;
        heap.push(p);
        result.evaluations += 21;
    }

    auto tolerance = [&] { return std::max(spec.abs_tol, spec.rel_tol * magnitude(total)); };

    int splits = 0;
    while (total_err > tolerance() && splits < spec.max_subdivisions)
    {
        auto worst = heap.top();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b))
            break;
        heap.pop();
        auto left = detail::gk21_panel<V>(f, worst.a, mid);
        auto right = detail::gk21_panel<V>(f, mid, worst.b);
        result.evaluations += 42;
        ++splits;
        total = total - worst.value + left.value + right.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }

    // Final sum in panel order so the result does not depend on refinement history drift.
    std::vector<detail::Panel<V>> panels;
    panels.reserve(heap.size());
    while (!heap.empty())
    {
        panels.push_back(heap.top());
        heap.pop();
    }
    std::sort(panels.begin(), panels.end(), [](const auto& l, const auto& r) { return l.a < r.a; });
    total = detail::zero_value<V>();
    total_err = 0.0;
    for (const auto& p : panels)
    {
        total = total + p.value;
        total_err += p.error;
    }

    result.value = total;
    result.error = total_err;
    result.subdivisions = splits;
    result.converged = total_err <= tolerance();
    if (!result.converged && spec.throw_on_failure)
    {
        std::ostringstream msg;
        msg << "integrate_finite: no convergence on [" << a << ", " << b << "] after " << splits
            << " subdivisions (error " << total_err << ", requested " << tolerance() << ")";
        throw QuadratureError(msg.str(), total_err, tolerance());
    }
    return result;
}

/// Integral of f over [a, inf) through x = a + t / (1 - t).
///
/// Breakpoints are given in x and mapped to t. The integrand must decay fast
/// enough that f(x) / (1 - t)^2 stays bounded as t -> 1.
template<class F>
auto integrate_semi_infinite(F&& f,
                             double a,
                             const QuadSpec& spec = {},
                             const std::vector<double>& breakpoints = {})
    -> QuadResult<std::decay_t<decltype(f(a))>>
{
    using V = std::decay_t<decltype(f(a))>;
    auto g = [&](double t) -> V {
        const double one_minus = 1.0 - t;
        if (one_minus <= 0.0)
            return detail::zero_value<V>();
        const double x = a + t / one_minus;
        return (1.0 / (one_minus * one_minus)) * f(x);
    };
    std::vector<double> tcuts;
    tcuts.reserve(breakpoints.size());
    for (double x : breakpoints)
        if (x > a)
            tcuts.push_back((x - a) / (1.0 + (x - a)));
    return integrate_finite(g, 0.0, 1.0, spec, tcuts);
}

/// Semi-infinite integral split at `cutoff`: [a, cutoff] adaptively and the
/// remainder through the t / (1 - t) map. `tail_bound(cutoff)` is a caller
/// supplied upper bound on |integral over [cutoff, inf)| and is reported next
/// to the computed tail so the truncation can be audited.
template<class V>
struct TailCheckedResult
{
    QuadResult<V> body;
    QuadResult<V> tail;
    double tail_bound = 0.0;
    V value() const { return body.value + tail.value; }
    double error() const { return body.error + tail.error; }
};

template<class F, class B>
auto integrate_semi_infinite_checked(F&& f,
                                     double a,
                                     double cutoff,
                                     B&& tail_bound,
                                     const QuadSpec& spec = {},
                                     const std::vector<double>& breakpoints = {})
    -> TailCheckedResult<std::decay_t<decltype(f(a))>>
{
    TailCheckedResult<std::decay_t<decltype(f(a))>> out;
    cutoff = std::max(cutoff, a);
    out.body = integrate_finite(f, a, cutoff, spec, breakpoints);
    QuadSpec tail_spec = spec;
    // The tail only has to be accurate relative to the whole integral.
    tail_spec.abs_tol = std::max(spec.abs_tol, spec.rel_tol * magnitude(out.body.value));
    out.tail = integrate_semi_infinite(f, cutoff, tail_spec);
    out.tail_bound = tail_bound(cutoff);
    return out;
}

/// Bisection for a monotone g with g(lo) and g(hi) of opposite sign.
///
/// Stops when |g(root)| <= tol or the bracket collapses to adjacent doubles.
template<class G>
double bisect(G&& g, double lo, double hi, double tol, int max_iterations = 2000)
{
    double glo = g(lo);
    double ghi = g(hi);
    if (glo == 0.0)
        return lo;
    if (ghi == 0.0)
        return hi;
    if (glo * ghi > 0.0)
    {
        std::ostringstream msg;
        msg << "bisect: bad bracket, g(" << lo << ")=" << glo << " and g(" << hi << ")=" << ghi
            << " have the same sign";
        throw BracketError(msg.str());
    }
    for (int it = 0; it < max_iterations; ++it)
    {
        const double mid = 0.5 * (lo + hi);
        if (!(mid > lo && mid < hi))
            return std::abs(glo) < std::abs(ghi) ? lo : hi;
        const double gm = g(mid);
        if (std::abs(gm) <= tol || gm == 0.0)
            return mid;
        if ((gm < 0.0) == (glo < 0.0))
        {
            lo = mid;
            glo = gm;
        }
        else
        {
            hi = mid;
            ghi = gm;
        }
    }
    return 0.5 * (lo + hi);
}

} // namespace cloudcache::quad
