// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// Laplace transform of the out-of-cloud interference seen by a user at the
// origin, its derivatives and moments, a two-moment Gamma surrogate and a
// Fourier inversion of the density.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <unsupported/Eigen/FFT>

#include "cloudcache/geometry.hpp"
#include "cloudcache/quadrature.hpp"
#include "cloudcache/radio.hpp"

namespace cloudcache {

struct LtSettings
{
    double inner_rel_tol = 1e-11;
    double outer_rel_tol = 1e-9;
    double cutoff_factor = 40.0; // outer body ends at cutoff_factor * D
    int contour_nodes = 64;
};

struct LtDiagnostics
{
    double error = 0.0;      // quadrature error estimate of log L
    double tail = 0.0;       // |computed contribution beyond the cutoff|
    double tail_bound = 0.0; // analytic bound on that contribution
    int evaluations = 0;
};

class LtError : public std::runtime_error
{
  public:
    LtError(const std::string& what, double achieved, double requested)
        : std::runtime_error(what), achieved_(achieved), requested_(requested)
    {
    }
    double achieved() const noexcept { return achieved_; }
    double requested() const noexcept { return requested_; }

  private:
    double achieved_;
    double requested_;
};

namespace detail {

inline double log1p_c(double z) { return std::log1p(z); }
inline double expm1_c(double z) { return std::expm1(z); }

inline std::complex<double> log1p_c(std::complex<double> z)
{
    const std::complex<double> u = 1.0 + z;
    if (u == 1.0)
        return z;
    if (std::abs(z) > 0.5)
        return std::log(u);
    return std::log(u) * z / (u - 1.0);
}

inline std::complex<double> expm1_c(std::complex<double> w)
{
    const double a = w.real();
    const double b = w.imag();
    const double sb = std::sin(0.5 * b);
    const double re = std::expm1(a) * std::cos(b) - 2.0 * sb * sb;
    const double im = std::exp(a) * std::sin(b);
    return {re, im};
}

inline double abs_c(double v) { return std::abs(v); }
inline double abs_c(const std::complex<double>& v) { return std::abs(v); }

// Truncated power series helpers, coefficients in increasing order.
inline std::vector<double> series_mul(const std::vector<double>& a, const std::vector<double>& b)
{
    std::vector<double> c(a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; i + j < a.size(); ++j)
            c[i + j] += a[i] * b[j];
    return c;
}

inline std::vector<double> series_exp(const std::vector<double>& l)
{
    std::vector<double> g(l.size(), 0.0);
    g[0] = std::exp(l[0]);
    for (std::size_t n = 1; n < l.size(); ++n)
    {
        double acc = 0.0;
        for (std::size_t k = 1; k <= n; ++k)
            acc += static_cast<double>(k) * l[k] * g[n - k];
        g[n] = acc / static_cast<double>(n);
    }
    return g;
}

} // namespace detail

/// Evaluator for L(s) = E[exp(-s I_o)].
///
/// Interfering clouds form a PPP of intensity lambda_p. A cloud at distance x
/// has Poisson(lambda G(x)) RUs outside the guard disk, of which min(M, count)
/// transmit, each uniform on b(x, D) \ b(o, d_g) with unit-mean exponential
/// fading and pathloss y^-alpha_o.
class InterferenceLT
{
  public:
    InterferenceLT(RadioParams params, double D, double d_g, LtSettings settings = {})
        : params_(params), geom_{D, d_g, 0.0}, settings_(settings)
    {
        params_.validate();
        geom_.validate();
        if (!(settings_.cutoff_factor > 1.0) || settings_.contour_nodes < 8)
            throw std::domain_error("InterferenceLT: bad settings");
    }

    const RadioParams& params() const { return params_; }
    const CloudGeometry& geometry() const { return geom_; }
    const LtSettings& settings() const { return settings_; }

    /// Lower end of the outer integral; clouds closer than this lie inside the guard disk.
    double outer_lower() const { return std::max(0.0, geom_.d_g - geom_.D); }
    double cutoff() const { return settings_.cutoff_factor * geom_.D + geom_.d_g; }

    /// Mean number of eligible RUs of a cloud at distance x.
    double eligible_mean(double x) const { return params_.lambda * guard_excluded_area(x, geom_); }

    /// Probability that a single active RU of the cloud at x is NOT silenced
    /// by the transform factor: B(s, x) = E[sP / (y^a + sP)] over the
    /// normalised distance law restricted to y >= d_g.
    template<class S>
    S single_complement(S s, double x) const
    {
        const double norm = guard_excluded_area(x, geom_) / (std::numbers::pi * geom_.D * geom_.D);
        if (norm <= 0.0)
            return S(0.0);
        const double a = params_.alpha_o;
        const S sP = s * params_.P;
        auto g = [&](double y) -> S { return sP / (std::pow(y, a) + sP); };
        return distance_integral<S>(x, g, detail::abs_c(sP)) * (1.0 / norm);
    }

    /// 1 - E[A^n] with A = 1 - B and n = min(M, Poisson(lambda G(x))).
    template<class S>
    S one_minus_mixture(S s, double x) const
    {
        const double mu = eligible_mean(x);
        if (mu <= 0.0)
            return S(0.0);
        const S B = single_complement(s, x);
        const S logA = detail::log1p_c(-B);
        const int M = params_.M;
        S acc(0.0);
        double pj = std::exp(-mu);
        for (int j = 1; j < M; ++j)
        {
            pj *= mu / j;
            acc += pj * (-detail::expm1_c(static_cast<double>(j) * logA));
        }
        const double tail = boost::math::gamma_p(static_cast<double>(M), mu);
        acc += tail * (-detail::expm1_c(static_cast<double>(M) * logA));
        return acc;
    }

    /// log L(s) for Re s >= 0.
    template<class S>
    S log_eval(S s, LtDiagnostics* diag = nullptr) const
    {
        if (detail::abs_c(s) == 0.0 || params_.lambda_p == 0.0)
        {
            if (diag)
                *diag = LtDiagnostics{};
            return S(0.0);
        }
        if (std::real(s) < 0.0)
            throw std::domain_error("InterferenceLT: requires Re s >= 0");
        auto integrand = [&](double x) -> S { return one_minus_mixture(s, x) * x; };
        quad::QuadSpec spec;
        spec.rel_tol = settings_.outer_rel_tol;
        spec.abs_tol = 1e-300;
        spec.max_subdivisions = 2000;
        spec.throw_on_failure = false;
        const double sPabs = detail::abs_c(s) * params_.P;
        auto bound = [&](double xm) {
            const double a = params_.alpha_o;
            const double u = xm - geom_.D;
            const double body = std::pow(u, 2.0 - a) / (a - 2.0) + geom_.D * std::pow(u, 1.0 - a) / (a - 1.0);
            return 2.0 * std::numbers::pi * params_.lambda_p * params_.M * sPabs * body;
        };
        auto res = quad::integrate_semi_infinite_checked(integrand, outer_lower(), cutoff(), bound, spec, breakpoints());
        const double scale = 2.0 * std::numbers::pi * params_.lambda_p;
        const S value = -scale * res.value();
        const double err = scale * res.error();
        if (diag)
        {
            diag->error = err;
            diag->tail = scale * detail::abs_c(res.tail.value);
            diag->tail_bound = res.tail_bound;
            diag->evaluations = res.body.evaluations + res.tail.evaluations;
        }
        const double requested = std::max(1e-15, 10.0 * settings_.outer_rel_tol * detail::abs_c(value));
        if (!res.body.converged || !res.tail.converged || !(err <= requested) || !std::isfinite(std::abs(value)))
        {
            std::ostringstream msg;
            msg << "InterferenceLT: outer integral failed at s=" << s << " (error " << err << ", requested "
                << requested << ")";
            throw LtError(msg.str(), err, requested);
        }
        return value;
    }

    double eval(double s, LtDiagnostics* diag = nullptr) const
    {
        if (s < 0.0)
            throw std::domain_error("InterferenceLT::eval: s must be >= 0");
        return std::exp(log_eval(s, diag));
    }

    std::complex<double> eval(std::complex<double> s, LtDiagnostics* diag = nullptr) const
    {
        return std::exp(log_eval(s, diag));
    }

    /// Taylor coefficients t_n, n = 0..order, of h(s + e) = sum t_n e^n where
    /// h = L, or h(s) = exp(-s sigma2) L(s) when with_noise is set.
    std::vector<double> taylor(double s, int order, bool with_noise = true) const
    {
        if (s < 0.0 || order < 0)
            throw std::domain_error("InterferenceLT::taylor: need s >= 0 and order >= 0");
        const std::size_t K = static_cast<std::size_t>(order) + 1;
        std::vector<double> logL(K, 0.0);
        if (params_.lambda_p > 0.0)
        {
            const double P = params_.P;
            const double a = params_.alpha_o;
            // Rescale component n by kappa^n so all components are O(1) for near clouds.
            const double y_ref = std::max(geom_.d_g, 0.1 * geom_.D);
            const double kappa = (std::pow(y_ref, a) + s * P) / P;
            auto integrand = [&](double x) -> std::vector<double> {
                std::vector<double> out(K, 0.0);
                const double mu = eligible_mean(x);
                if (mu <= 0.0)
                    return out;
                const double norm = guard_excluded_area(x, geom_) / (std::numbers::pi * geom_.D * geom_.D);
                auto g = [&](double y) -> std::vector<double> {
                    std::vector<double> v(K);
                    const double ya = std::pow(y, a);
                    const double c = P / (ya + s * P) * kappa;
                    const double keep = ya / (ya + s * P);
                    v[0] = s * P / (ya + s * P);
                    double cn = 1.0;
                    for (std::size_t n = 1; n < K; ++n)
                    {
                        cn *= c;
                        v[n] = cn * keep;
                    }
                    return v;
                };
                std::vector<double> m = distance_integral<std::vector<double>>(x, g, s * P);
                const double B = m[0] / norm;
                std::vector<double> A(K);
                A[0] = 1.0 - B;
                for (std::size_t n = 1; n < K; ++n)
                    A[n] = ((n % 2) ? -1.0 : 1.0) * m[n] / norm;
                // F = sum_j pi_j A^j + tail A^M as a series.
                const int M = params_.M;
                std::vector<double> F(K, 0.0);
                std::vector<double> Aj(K, 0.0);
                Aj[0] = 1.0;
                double pj = std::exp(-mu);
                const double logA0 = std::log1p(-B);
                double head = 0.0;
                for (int j = 1; j <= M; ++j)
                {
                    Aj = detail::series_mul(Aj, A);
                    double w;
                    if (j < M)
                    {
                        pj *= mu / j;
                        w = pj;
                    }
                    else
                        w = boost::math::gamma_p(static_cast<double>(M), mu);
                    head += w * (-std::expm1(static_cast<double>(j) * logA0));
                    for (std::size_t n = 1; n < K; ++n)
                        F[n] += w * Aj[n];
                }
                out[0] = head * x;
                for (std::size_t n = 1; n < K; ++n)
                    out[n] = -F[n] * x;
                return out;
            };
            quad::QuadSpec spec;
            spec.rel_tol = settings_.outer_rel_tol;
            spec.abs_tol = 1e-300;
            spec.max_subdivisions = 2000;
            spec.throw_on_failure = true;
            auto none = [](double) { return 0.0; };
            auto res = quad::integrate_semi_infinite_checked(integrand, outer_lower(), cutoff(), none, spec, breakpoints());
            const std::vector<double> v = res.value();
            const double scale = 2.0 * std::numbers::pi * params_.lambda_p;
            logL[0] = -scale * v[0];
            double kp = 1.0;
            for (std::size_t n = 1; n < K; ++n)
            {
                kp *= kappa;
                logL[n] = -scale * v[n] / kp;
            }
        }
        if (with_noise)
        {
            logL[0] -= s * params_.sigma2;
            if (K > 1)
                logL[1] -= params_.sigma2;
        }
        return detail::series_exp(logL);
    }

    /// Breakpoints of the outer integrand in x.
    std::vector<double> breakpoints() const
    {
        const double D = geom_.D;
        const double dg = geom_.d_g;
        std::vector<double> b{D};
        if (dg > 0.0)
        {
            b.push_back(std::abs(D - dg));
            b.push_back(D + dg);
        }
        return b;
    }

  private:
    template<class V, class G>
    V distance_integral(double x, G&& g, double sP_abs) const
    {
        const double ystar = sP_abs > 0.0 ? std::pow(sP_abs, 1.0 / params_.alpha_o) : 0.0;
        quad::QuadSpec spec;
        spec.rel_tol = settings_.inner_rel_tol;
        // g decreases in y, so |g(x + D)| is a lower bound on the scale of the result.
        spec.abs_tol = std::max(1e-300, 1e-3 * settings_.inner_rel_tol * quad::magnitude(g(x + geom_.D)));
        spec.max_subdivisions = 400;
        return integrate_distance_law<V>(geom_.at(x), g, geom_.d_g, spec, {ystar});
    }

    RadioParams params_;
    CloudGeometry geom_;
    LtSettings settings_;
};

inline double lt_eval(double s, const InterferenceLT& ctx) { return ctx.eval(s); }

/// F(s, x) for clouds that reach the guard disk or contain the user.
inline double lt_inner_F(double s, double x, const InterferenceLT& ctx)
{
    const auto& g = ctx.geometry();
    if (!(x >= 0.0) || x >= std::max(g.D, g.d_g - g.D))
        throw std::domain_error("lt_inner_F: requires 0 <= x < max(D, d_g - D)");
    return 1.0 - ctx.one_minus_mixture(s, x);
}

/// E(s, x) for clouds that do not contain the user.
inline double lt_inner_E(double s, double x, const InterferenceLT& ctx)
{
    const auto& g = ctx.geometry();
    if (!(x >= std::max(g.D, g.d_g - g.D)))
        throw std::domain_error("lt_inner_E: requires x >= max(D, d_g - D)");
    return 1.0 - ctx.one_minus_mixture(s, x);
}

struct DerivativeResult
{
    double value = 0.0;
    double error = 0.0;
    bool contour = true; // false when a fallback route was used
};

/// m-th derivative of exp(-s sigma2) L(s) by a trapezoidal contour average
/// on |z - s| = s / 2, with a Richardson finite-difference fallback.
inline DerivativeResult lt_derivative_detailed(int m, double s, const InterferenceLT& ctx, double rel_tol = 1e-6)
{
    if (m < 0 || m > std::max(ctx.params().M, 3))
        throw std::domain_error("lt_derivative: order out of range");
    if (!(s > 0.0))
        throw std::domain_error("lt_derivative: requires s > 0");
    const double sigma2 = ctx.params().sigma2;
    auto h = [&](std::complex<double> z) { return std::exp(-z * sigma2 + ctx.log_eval(z)); };
    if (m == 0)
        return {std::exp(-s * sigma2 + ctx.log_eval(s)), 0.0, true};

    const int N = ctx.settings().contour_nodes;
    const double r = 0.5 * s;
    // Conjugate symmetry: only the upper half circle is evaluated.
    std::vector<std::complex<double>> vals(static_cast<std::size_t>(N / 2 + 1));
    try
    {
        for (int k = 0; k <= N / 2; ++k)
        {
            const double th = 2.0 * std::numbers::pi * k / N;
            vals[static_cast<std::size_t>(k)] = h(s + r * std::polar(1.0, th));
        }
        auto coefficient = [&](int stride) {
            const int n = N / stride;
            double acc = 0.0;
            for (int k = 0; k < n; ++k)
            {
                const int idx = k * stride;
                const int half = idx <= N / 2 ? idx : N - idx;
                std::complex<double> v = vals[static_cast<std::size_t>(half)];
                if (idx > N / 2)
                    v = std::conj(v);
                const double th = 2.0 * std::numbers::pi * idx / N;
                acc += (v * std::polar(1.0, -m * th)).real();
            }
            return acc / n;
        };
        const double fact = std::tgamma(m + 1.0);
        const double c64 = coefficient(1);
        const double c32 = coefficient(2);
        const double scale = fact / std::pow(r, m);
        const double value = scale * c64;
        const double err = scale * std::abs(c64 - c32);
        if (err <= rel_tol * std::abs(value) || err < 1e-300)
            return {value, err, true};
    }
    catch (const LtError&)
    {
    }

    // Central differences in h and h / 2 with one Richardson step.
    auto hr = [&](double z) { return std::exp(-z * sigma2 + ctx.log_eval(z)); };
    auto central = [&](double step) {
        double acc = 0.0;
        double binom = 1.0;
        for (int k = 0; k <= m; ++k)
        {
            acc += ((k % 2) ? -1.0 : 1.0) * binom * hr(s + (0.5 * m - k) * step);
            binom = binom * (m - k) / (k + 1);
        }
        return acc / std::pow(step, m);
    };
    const double step = std::min(0.1 * s, 0.5 * s / std::max(1, m));
    const double d1 = central(step);
    const double d2 = central(0.5 * step);
    const double value = (4.0 * d2 - d1) / 3.0;
    const double err = std::abs(d2 - d1);
    if (err <= rel_tol * std::abs(value))
        return {value, err, false};

    // Last resort: the truncated power series of log L, exact up to quadrature error.
    const auto t = ctx.taylor(s, m + 1);
    const double fact = std::tgamma(m + 1.0);
    const double series = t[static_cast<std::size_t>(m)] * fact;
    const double series_err = 1e-7 * std::abs(series);
    if (!std::isfinite(series))
    {
        std::ostringstream msg;
        msg << "lt_derivative: order " << m << " at s=" << s << " did not converge (error " << err << ")";
        throw LtError(msg.str(), err, rel_tol * std::abs(value));
    }
    return {series, series_err, false};
}

inline double lt_derivative(int m, double s, const InterferenceLT& ctx)
{
    return lt_derivative_detailed(m, s, ctx).value;
}

struct LtMoments
{
    double E_I = 0.0;
    double E_I2 = 0.0;
    double variance() const { return E_I2 - E_I * E_I; }
};

/// First two raw moments of I_o from the Taylor expansion of L at s = 0.
/// Infinite when d_g = 0 (the pathloss is unbounded near the user).
inline LtMoments lt_moments(const InterferenceLT& ctx)
{
    if (ctx.params().lambda_p == 0.0)
        return {};
    if (ctx.geometry().d_g <= 0.0)
        return {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    const auto t = ctx.taylor(0.0, 2, false);
    return {-t[1], 2.0 * t[2]};
}

/// Moments by one-sided finite differences of log L near s = 0.
inline LtMoments lt_moments_finite_difference(const InterferenceLT& ctx, double mean_guess)
{
    if (ctx.params().lambda_p == 0.0)
        return {};
    LtMoments out;
    double guess = mean_guess;
    for (int it = 0; it < 2; ++it)
    {
        const double h = 1e-4 / guess;
        const double l1 = ctx.log_eval(h);
        const double l2 = ctx.log_eval(2.0 * h);
        const double l3 = ctx.log_eval(3.0 * h);
        // log L(s) = -k1 s + k2 s^2 / 2 - ...; second-order one-sided stencils.
        const double d1 = (-3.0 * 0.0 + 4.0 * l1 - l2) / (2.0 * h);
        const double d2 = (2.0 * 0.0 - 5.0 * l1 + 4.0 * l2 - l3) / (h * h);
        const double k1 = -d1;
        const double k2 = d2;
        out = LtMoments{k1, k2 + k1 * k1};
        guess = k1;
    }
    return out;
}

struct GammaSurrogate
{
    double tau = 1.0;
    double zeta = 1.0;

    double mean() const { return tau * zeta; }
    double second_moment() const { return tau * (tau + 1.0) * zeta * zeta; }
    double pdf(double g) const { return g <= 0.0 ? 0.0 : boost::math::gamma_p_derivative(tau, g / zeta) / zeta; }
    double cdf(double g) const { return g <= 0.0 ? 0.0 : boost::math::gamma_p(tau, g / zeta); }
    double quantile(double u) const { return zeta * boost::math::gamma_p_inv(tau, u); }
};

inline GammaSurrogate gamma_fit(const LtMoments& m)
{
    const double var = m.variance();
    if (!(m.E_I > 0.0) || !(var > 1e-12 * m.E_I * m.E_I) || !std::isfinite(var))
        throw std::domain_error("gamma_fit: degenerate or infinite interference variance");
    return GammaSurrogate{m.E_I * m.E_I / var, var / m.E_I};
}

inline GammaSurrogate gamma_fit(const InterferenceLT& ctx) { return gamma_fit(lt_moments(ctx)); }

/// ln L tabulated against ln s on an equispaced grid with cubic B-spline
/// interpolation of ln(-ln L). Linear in s below the grid, power law above.
class LtTable
{
  public:
    LtTable(const InterferenceLT& ctx, double s_min = 1e-8, double s_max = 1e10, int per_decade = 16)
        : sigma2_(ctx.params().sigma2)
    {
        if (!(s_min > 0.0 && s_max > s_min) || per_decade < 2)
            throw std::domain_error("LtTable: bad grid");
        u0_ = std::log(s_min);
        u1_ = std::log(s_max);
        const int n = static_cast<int>(std::ceil(per_decade * std::log10(s_max / s_min))) + 1;
        du_ = (u1_ - u0_) / (n - 1);
        if (ctx.params().lambda_p == 0.0)
        {
            zero_ = true;
            return;
        }
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            v[static_cast<std::size_t>(i)] = std::log(-ctx.log_eval(std::exp(u0_ + i * du_)));
        lo_val_ = v.front();
        hi_val_ = v.back();
        hi_slope_ = (v[v.size() - 1] - v[v.size() - 2]) / du_;
        spline_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(v.begin(), v.end(), u0_, du_);
    }

    /// ln L(s).
    double log_lt(double s) const
    {
        if (zero_ || s <= 0.0)
            return 0.0;
        const double u = std::log(s);
        if (u < u0_)
            return -std::exp(lo_val_ + (u - u0_));
        if (u > u1_)
            return -std::exp(hi_val_ + hi_slope_ * (u - u1_));
        return -std::exp(spline_(u));
    }

    double lt(double s) const { return std::exp(log_lt(s)); }

    /// exp(-s sigma2) L(s).
    double with_noise(double s) const { return std::exp(-s * sigma2_ + log_lt(s)); }

  private:
    double sigma2_;
    double u0_ = 0.0, u1_ = 0.0, du_ = 1.0;
    double lo_val_ = 0.0, hi_val_ = 0.0, hi_slope_ = 1.0;
    bool zero_ = false;
    boost::math::interpolators::cardinal_cubic_b_spline<double> spline_;
};

/// Density of I_o by Fourier inversion of the characteristic function
/// phi(w) = L(-j w). ln phi is tabulated on a log-w grid and splined, then
/// the inversion integral is discretised with a uniform w step chosen so the
/// implied period in gamma far exceeds the support of I_o, and evaluated on
/// a uniform gamma grid by FFT.
class GilPelaezDensity
{
  public:
    explicit GilPelaezDensity(const InterferenceLT& ctx, int per_decade = 24)
    {
        const auto mom = lt_moments(ctx);
        if (!std::isfinite(mom.E_I) || !(mom.E_I > 0.0))
            throw std::domain_error("GilPelaezDensity: needs d_g > 0 and lambda_p > 0");
        mean_ = mom.E_I;
        var_ = mom.variance();
        const auto& p = ctx.params();
        const double peak = p.P * std::pow(ctx.geometry().d_g, -p.alpha_o);
        period_ = 40.0 * peak + 40.0 * mean_ + 40.0 * std::sqrt(var_);

        // Tabulate ln phi until |phi| is negligible.
        w0_ = 1e-3 / (mean_ + std::sqrt(var_));
        std::vector<std::complex<double>> lp;
        const double dlog = std::log(10.0) / per_decade;
        double w = w0_;
        for (int i = 0; i < 100000; ++i)
        {
            lp.push_back(ctx.log_eval(std::complex<double>(0.0, -w)));
            if (lp.back().real() < -40.0 && lp.size() > 4)
                break;
            w *= std::exp(dlog);
        }
        du_ = dlog;
        w_max_ = w;
        std::vector<double> re(lp.size()), im(lp.size());
        for (std::size_t i = 0; i < lp.size(); ++i)
        {
            re[i] = lp[i].real();
            im[i] = lp[i].imag();
        }
        re_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(re.begin(), re.end(), std::log(w0_), du_);
        im_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(im.begin(), im.end(), std::log(w0_), du_);

        const double dw = 2.0 * std::numbers::pi / period_;
        std::size_t n = 1;
        while (static_cast<double>(n) * dw < w_max_ && n < max_points / 2)
            n <<= 1;
        n <<= 1;
        // Past the grid phi is cut off with a cosine taper; this smooths the
        // density on the scale of the grid step.
        const double w_cut = std::min(w_max_, 0.5 * static_cast<double>(n) * dw);
        truncated_ = w_cut < w_max_;
        std::vector<std::complex<double>> spec(n);
        for (std::size_t k = 0; k < n; ++k)
        {
            const double wk = k * dw;
            std::complex<double> v = wk < w_cut ? phi(wk) : 0.0;
            if (truncated_ && wk > 0.5 * w_cut && wk < w_cut)
                v *= 0.5 * (1.0 + std::cos(std::numbers::pi * (2.0 * wk / w_cut - 1.0)));
            spec[k] = (k == 0 ? 0.5 : 1.0) * v * dw / std::numbers::pi;
        }
        // f(g_m) = Re sum_k spec_k exp(-j w_k g_m), g_m = m period / n.
        Eigen::FFT<double> fft;
        std::vector<std::complex<double>> out;
        fft.fwd(out, spec);
        dg_ = period_ / static_cast<double>(n);
        density_.resize(n / 2);
        double peak_density = 0.0;
        for (std::size_t m = 0; m < n / 2; ++m)
        {
            density_[m] = out[m].real();
            peak_density = std::max(peak_density, density_[m]);
        }
        (void)peak_density;

        // CDF by cumulative trapezoid, then kept only on a geometric grid in gamma.
        std::vector<double> cdf(density_.size(), 0.0);
        for (std::size_t m = 1; m < density_.size(); ++m)
            cdf[m] = cdf[m - 1] + 0.5 * dg_ * (density_[m - 1] + density_[m]);
        auto cdf_at = [&](double g) {
            const double pos = g / dg_;
            const auto i = std::min(static_cast<std::size_t>(pos), cdf.size() - 2);
            const double t = pos - static_cast<double>(i);
            return (1.0 - t) * cdf[i] + t * cdf[i + 1];
        };
        const double g_end = dg_ * static_cast<double>(cdf.size() - 1);
        nodes_.push_back(0.0);
        cdf_nodes_.push_back(0.0);
        for (double g = 4.0 * dg_; g < g_end; g *= 1.005)
        {
            nodes_.push_back(g);
            cdf_nodes_.push_back(cdf_at(g));
            if (1.0 - cdf_nodes_.back() < 1e-13)
                break;
        }
    }

    std::complex<double> phi(double w) const
    {
        if (w <= 0.0)
            return 1.0;
        if (w < w0_)
            return std::exp(std::complex<double>(-0.5 * var_ * w * w, -mean_ * w));
        if (w >= w_max_)
            return 0.0;
        const double u = std::log(w);
        return std::exp(std::complex<double>(re_(u), im_(u)));
    }

    double step() const { return dg_; }
    const std::vector<double>& values() const { return density_; }
    /// True when phi had to be cut off before it decayed.
    bool truncated() const { return truncated_; }
    double mean() const { return mean_; }

    /// Linear interpolation of the tabulated density.
    double pdf(double g) const
    {
        if (g < 0.0)
            return 0.0;
        const double pos = g / dg_;
        const auto i = static_cast<std::size_t>(pos);
        if (i + 1 >= density_.size())
            return 0.0;
        const double t = pos - static_cast<double>(i);
        return (1.0 - t) * density_[i] + t * density_[i + 1];
    }

    /// E[h(I)] as a Stieltjes sum against the tabulated CDF with midpoint nodes;
    /// mass beyond the last node is assigned to it.
    template<class H>
    double expect(H&& h) const
    {
        double acc = 0.0;
        for (std::size_t j = 0; j + 1 < nodes_.size(); ++j)
        {
            const double w = cdf_nodes_[j + 1] - cdf_nodes_[j];
            if (w != 0.0)
                acc += w * h(0.5 * (nodes_[j] + nodes_[j + 1]));
        }
        const double rest = 1.0 - cdf_nodes_.back();
        if (rest > 0.0)
            acc += rest * h(nodes_.back());
        return acc;
    }

    /// Largest gamma at which expect() evaluates its argument.
    double support_end() const { return nodes_.back(); }

    double cdf(double g) const
    {
        if (g <= 0.0)
            return 0.0;
        if (g >= nodes_.back())
            return cdf_nodes_.back();
        const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), g);
        const auto j = static_cast<std::size_t>(it - nodes_.begin()) - 1;
        const double t = (g - nodes_[j]) / (nodes_[j + 1] - nodes_[j]);
        return (1.0 - t) * cdf_nodes_[j] + t * cdf_nodes_[j + 1];
    }

  private:
    static constexpr std::size_t max_points = std::size_t(1) << 23;
    bool truncated_ = false;
    double mean_ = 0.0, var_ = 0.0, period_ = 1.0;
    double w0_ = 1.0, w_max_ = 1.0, du_ = 1.0, dg_ = 1.0;
    boost::math::interpolators::cardinal_cubic_b_spline<double> re_, im_;
    std::vector<double> density_;
    std::vector<double> nodes_, cdf_nodes_;
};

/// Point evaluation of the inverted density.
inline double gil_pelaez_pdf(double gamma_val, const GilPelaezDensity& table)
{
    if (!(gamma_val > 0.0))
        throw std::domain_error("gil_pelaez_pdf: requires gamma > 0");
    return table.pdf(gamma_val);
}

} // namespace cloudcache
