// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// Conditional and network hit probabilities under closest and best RU
// selection, exact and approximate.

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/special_functions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "cloudcache/content.hpp"
#include "cloudcache/geometry.hpp"
#include "cloudcache/interference.hpp"
#include "cloudcache/quadrature.hpp"
#include "cloudcache/radio.hpp"

namespace cloudcache {

enum class Strategy { Closest, Best };
enum class Method { Exact, Approximate };
enum class InterferenceLaw { GammaSurrogate, GilPelaez };

inline const char* to_string(Strategy s) { return s == Strategy::Closest ? "closest" : "best"; }
inline const char* to_string(Method m) { return m == Method::Exact ? "exact" : "approx"; }

/// Effective active count used by the approximations.
struct EffectiveL
{
    int L = 1;
    double eta = 1.0;
};

inline EffectiveL effective_L(const RadioParams& p, double D)
{
    const double mean = p.lambda * std::numbers::pi * D * D;
    int L = static_cast<int>(std::min<double>(p.M, std::floor(mean)));
    L = std::max(L, 1);
    const int n = p.M - L + 1;
    return {L, std::pow(std::tgamma(n + 1.0), -1.0 / n)};
}

namespace detail {

inline double poisson_pmf(int k, double mu)
{
    if (mu <= 0.0)
        return k == 0 ? 1.0 : 0.0;
    return std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0));
}

// P(Poisson(mu) <= k), zero for k < 0.
inline double poisson_cdf(int k, double mu)
{
    if (k < 0)
        return 0.0;
    if (mu <= 0.0)
        return 1.0;
    return boost::math::gamma_q(k + 1.0, mu);
}

} // namespace detail

/// E_m(s) = E[(s X)^m exp(-s X)] / m! for X = I_o + sigma2 and m < M, tabulated
/// against ln s from Taylor coefficients of exp(-s sigma2) L(s).
class DerivativeTable
{
  public:
    DerivativeTable(const InterferenceLT& lt, double s_min, double s_max, int per_decade = 8)
        : orders_(lt.params().M)
    {
        u0_ = std::log(s_min);
        u1_ = std::log(s_max);
        const int n = static_cast<int>(std::ceil(per_decade * std::log10(s_max / s_min))) + 1;
        du_ = (u1_ - u0_) / (n - 1);
        std::vector<std::vector<double>> logs(static_cast<std::size_t>(orders_), std::vector<double>(n));
        for (int i = 0; i < n; ++i)
        {
            const double s = std::exp(u0_ + i * du_);
            const auto t = lt.taylor(s, orders_ - 1, true);
            double sm = 1.0;
            for (int m = 0; m < orders_; ++m)
            {
                const double e = std::abs(sm * t[static_cast<std::size_t>(m)]);
                logs[static_cast<std::size_t>(m)][static_cast<std::size_t>(i)] = std::log(std::max(e, 1e-300));
                sm *= s;
            }
        }
        for (auto& v : logs)
        {
            lo_.push_back(v.front());
            hi_.push_back(v.back());
            hi_slope_.push_back((v[v.size() - 1] - v[v.size() - 2]) / du_);
            splines_.emplace_back(v.begin(), v.end(), u0_, du_);
        }
    }

    int orders() const { return orders_; }

    double E(int m, double s) const
    {
        const auto k = static_cast<std::size_t>(m);
        if (s <= 0.0)
            return m == 0 ? 1.0 : 0.0;
        const double u = std::log(s);
        if (u < u0_)
            return std::exp(lo_[k] + m * (u - u0_));
        if (u > u1_)
            return std::exp(hi_[k] + std::min(0.0, hi_slope_[k]) * (u - u1_));
        return std::exp(splines_[k](u));
    }

  private:
    int orders_;
    double u0_ = 0.0, u1_ = 0.0, du_ = 1.0;
    std::vector<double> lo_, hi_, hi_slope_;
    std::vector<boost::math::interpolators::cardinal_cubic_b_spline<double>> splines_;
};

/// Everything about I_o a hit computation needs, built once per set of
/// interference parameters and shared between queries. The LT table is built
/// eagerly; the other tables on first use under a lock.
class InterferenceModel
{
  public:
    InterferenceModel(const RadioParams& params, double D, double d_g, LtSettings settings = {})
        : lt_(params, D, d_g, settings), table_(lt_)
    {
    }

    const InterferenceLT& lt() const { return lt_; }
    const LtTable& table() const { return table_; }
    const RadioParams& params() const { return lt_.params(); }

    /// True when the interference law is the same as for (p, D, d_g).
    bool matches(const RadioParams& p, double D, double d_g) const
    {
        const auto& q = lt_.params();
        const auto& g = lt_.geometry();
        return q.P == p.P && q.alpha_o == p.alpha_o && q.lambda == p.lambda && q.lambda_p == p.lambda_p
               && q.M == p.M && q.sigma2 == p.sigma2 && g.D == D && g.d_g == d_g;
    }

    const DerivativeTable& derivatives() const
    {
        std::call_once(deriv_once_, [&] {
            const double s_max = 800.0 / lt_.params().sigma2;
            deriv_.emplace(lt_, std::min(1e-8, 1e-3 * s_max), s_max);
        });
        return *deriv_;
    }

    const LtMoments& moments() const
    {
        std::call_once(moments_once_, [&] { moments_ = lt_moments(lt_); });
        return moments_;
    }

    const GammaSurrogate& gamma() const
    {
        std::call_once(gamma_once_, [&] { gamma_ = gamma_fit(moments()); });
        return gamma_;
    }

    const GilPelaezDensity& gil_pelaez() const
    {
        std::call_once(gp_once_, [&] { gp_.emplace(lt_); });
        return *gp_;
    }

  private:
    InterferenceLT lt_;
    LtTable table_;
    mutable std::once_flag deriv_once_, moments_once_, gamma_once_, gp_once_;
    mutable std::optional<DerivativeTable> deriv_;
    mutable LtMoments moments_;
    mutable GammaSurrogate gamma_;
    mutable std::optional<GilPelaezDensity> gp_;
};

inline std::shared_ptr<const InterferenceModel> make_interference_model(const RadioParams& params,
                                                                        double D,
                                                                        double d_g,
                                                                        LtSettings settings = {})
{
    return std::make_shared<const InterferenceModel>(params, D, d_g, settings);
}

struct HitQuery
{
    RadioParams params;
    CloudGeometry geom; // x_norm is the distance from the user to its cloud centre
    CachePolicy policy;
    PopularityProfile profile;
    Strategy strategy = Strategy::Closest;
    Method method = Method::Exact;
    InterferenceLaw law = InterferenceLaw::GammaSurrogate; // best/exact only
    std::shared_ptr<const InterferenceModel> model;        // built on demand when empty

    void validate() const
    {
        params.validate();
        geom.validate();
        policy.validate();
        profile.validate();
        if (policy.size() != profile.size())
            throw std::domain_error("HitQuery: policy and profile lengths differ");
        if (model && !model->matches(params, geom.D, geom.d_g))
            throw std::domain_error("HitQuery: interference model built for other parameters");
    }

    std::shared_ptr<const InterferenceModel> interference() const
    {
        if (model)
            return model;
        return make_interference_model(params, geom.D, geom.d_g);
    }
};

namespace detail {

inline double cache_mean(const HitQuery& q, double p)
{
    return q.params.lambda * p * std::numbers::pi * q.geom.D * q.geom.D;
}

inline double other_mean(const HitQuery& q, double p)
{
    return q.params.lambda * (1.0 - p) * std::numbers::pi * q.geom.D * q.geom.D;
}

inline quad::QuadSpec hit_spec()
{
    quad::QuadSpec spec;
    spec.rel_tol = 1e-9;
    spec.abs_tol = 1e-13;
    spec.max_subdivisions = 1000;
    return spec;
}

inline double check_file(const HitQuery& q, std::size_t i)
{
    q.validate();
    if (i >= q.policy.size())
        throw std::out_of_range("hit probability: file index out of range");
    return q.policy.p[i];
}

inline double clamp_probability(double v) { return std::clamp(v, 0.0, 1.0); }

// Mass of the (k, t) pairs with k >= 1 and k + t < M.
inline double unsaturated_mass(int M, double mu_i, double mu_o)
{
    double mass = 0.0;
    for (int k = 1; k < M; ++k)
        mass += poisson_pmf(k, mu_i) * poisson_cdf(M - 1 - k, mu_o);
    return mass;
}

// Alternating binomial sum over the Alzer bound: sum_m (-1)^{m+1} C(n, m) h(m).
template<class H>
double alzer_sum(int n, H&& h)
{
    double acc = 0.0;
    for (int m = 1; m <= n; ++m)
        acc += ((m % 2) ? 1.0 : -1.0) * boost::math::binomial_coefficient<double>(n, m) * h(m);
    return acc;
}

} // namespace detail

/// Probability that one RU of the cloud delivers received power above z P:
/// Qbar_l(z) = int Q(M - l + 1, z y^alpha_i) f(y) dy.
inline double single_ru_exceedance(double z, int l, const HitQuery& q)
{
    const int a = q.params.M - l + 1;
    if (z <= 0.0)
        return 1.0;
    const double ai = q.params.alpha_i;
    auto g = [&](double y) { return boost::math::gamma_q(static_cast<double>(a), z * std::pow(y, ai)); };
    const double knee = std::pow(a / z, 1.0 / ai);
    auto spec = detail::hit_spec();
    spec.abs_tol = 1e-15;
    return detail::clamp_probability(integrate_distance_law<double>(q.geom, g, 0.0, spec, {knee}));
}

/// CDF of the strongest received power among k caching RUs with l active.
inline double max_power_cdf(double x, int l, int k, const HitQuery& q)
{
    if (k < 1 || l < 0 || l > q.params.M)
        throw std::domain_error("max_power_cdf: need k >= 1 and 0 <= l <= M");
    if (x <= 0.0)
        return 0.0;
    const double bar = single_ru_exceedance(x / q.params.P, l, q);
    return detail::clamp_probability(std::pow(detail::clamp_probability(1.0 - bar), k));
}

inline double cond_hit_closest_exact(std::size_t i, const HitQuery& q)
{
    const double p = detail::check_file(q, i);
    if (p <= 0.0)
        return 0.0;
    const auto model = q.interference();
    const auto& table = model->table();
    const int M = q.params.M;
    const double mu_i = detail::cache_mean(q, p);
    const double mu_o = detail::other_mean(q, p);
    const double ai = q.params.alpha_i;
    const double beta = q.params.beta;
    const double P = q.params.P;
    const double sigma2 = q.params.sigma2;
    const bool unsat = detail::unsaturated_mass(M, mu_i, mu_o) > 1e-15;
    const DerivativeTable* dt = unsat ? &model->derivatives() : nullptr;

    auto g = [&](double r) {
        const double F = distance_cdf(r, q.geom);
        const double surv = 1.0 - F;
        const double s = beta * std::pow(r, ai) / P;
        // Saturated block summed over k in closed form.
        double ksat = mu_i * std::exp(-mu_i * F);
        double unsat_part = 0.0;
        for (int k = 1; k < M; ++k)
        {
            const double wk = detail::poisson_pmf(k, mu_i);
            if (wk == 0.0)
                continue;
            const double order = k * std::pow(surv, k - 1);
            ksat -= wk * order * detail::poisson_cdf(M - 1 - k, mu_o);
            if (!dt)
                continue;
            for (int t = 0; t <= M - 1 - k; ++t)
            {
                const double wt = detail::poisson_pmf(t, mu_o);
                const int l = k + t;
                double h = 0.0;
                for (int m = 0; m <= M - l; ++m)
                    h += dt->E(m, s);
                unsat_part += wk * wt * order * h;
            }
        }
        const double h_sat = std::exp(-s * sigma2 + table.log_lt(s));
        return std::max(ksat, 0.0) * h_sat + unsat_part;
    };
    return detail::clamp_probability(integrate_distance_law<double>(q.geom, g, 0.0, detail::hit_spec()));
}

inline double cond_hit_closest_approx(std::size_t i, const HitQuery& q)
{
    const double p = detail::check_file(q, i);
    if (p <= 0.0)
        return 0.0;
    const auto model = q.interference();
    const auto& table = model->table();
    const auto eff = effective_L(q.params, q.geom.D);
    const int n = q.params.M - eff.L + 1;
    const double mu_i = detail::cache_mean(q, p);
    const double c = eff.eta * q.params.beta / q.params.P;
    const double ai = q.params.alpha_i;
    const double sigma2 = q.params.sigma2;
    auto g = [&](double r) {
        const double F = distance_cdf(r, q.geom);
        const double base = c * std::pow(r, ai);
        const double bracket = detail::alzer_sum(n, [&](int m) {
            const double s = base * m;
            return std::exp(-s * sigma2 + table.log_lt(s));
        });
        return mu_i * std::exp(-mu_i * F) * bracket;
    };
    return detail::clamp_probability(integrate_distance_law<double>(q.geom, g, 0.0, detail::hit_spec()));
}

namespace detail {

// Hit probability of the best RU given I_o = gamma, summed over (k, t).
struct BestKernel
{
    int M;
    double mu_i, mu_o;
    bool unsat;

    template<class Bar>
    double operator()(Bar&& bar) const
    {
        const double bM = bar(M);
        double hit = -std::expm1(-mu_i * bM);
        for (int k = 1; k < M; ++k)
        {
            const double wk = poisson_pmf(k, mu_i);
            if (wk == 0.0)
                continue;
            // 1 - (1 - b)^k without cancellation.
            auto at_least_one = [&](double b) { return -std::expm1(k * std::log1p(-std::min(b, 1.0))); };
            hit -= wk * poisson_cdf(M - 1 - k, mu_o) * at_least_one(bM);
            if (!unsat)
                continue;
            for (int t = 0; t <= M - 1 - k; ++t)
                hit += wk * poisson_pmf(t, mu_o) * at_least_one(bar(k + t));
        }
        return hit;
    }
};

} // namespace detail

inline double cond_hit_best_exact(std::size_t i, const HitQuery& q)
{
    const double p = detail::check_file(q, i);
    if (p <= 0.0)
        return 0.0;
    const int M = q.params.M;
    const double mu_i = detail::cache_mean(q, p);
    const double mu_o = detail::other_mean(q, p);
    const detail::BestKernel kernel{M, mu_i, mu_o, detail::unsaturated_mass(M, mu_i, mu_o) > 1e-15};
    const double beta = q.params.beta;
    const double P = q.params.P;
    const double sigma2 = q.params.sigma2;

    auto hit_given = [&](double gamma) {
        const double z = beta * (gamma + sigma2) / P;
        return kernel([&](int l) { return single_ru_exceedance(z, l, q); });
    };

    if (q.params.lambda_p == 0.0)
        return detail::clamp_probability(hit_given(0.0));

    const auto model = q.interference();
    if (q.law == InterferenceLaw::GammaSurrogate)
    {
        const auto& gs = model->gamma();
        auto f = [&](double u) {
            if (u >= 1.0)
                return hit_given(gs.quantile(1.0 - 1e-16));
            return hit_given(u <= 0.0 ? 0.0 : gs.quantile(u));
        };
        auto spec = detail::hit_spec();
        spec.rel_tol = 1e-8;
        return detail::clamp_probability(quad::integrate_finite(f, 0.0, 1.0, spec).value);
    }

    // Fourier-inverted density on a fine uniform grid; Qbar_l is splined in ln z.
    const auto& gp = model->gil_pelaez();
    const double z0 = beta * sigma2 / P;
    const double z1 = beta * (gp.support_end() + sigma2) / P;
    const int per_decade = 64;
    const int n = static_cast<int>(std::ceil(per_decade * std::log10(z1 / z0))) + 2;
    const double du = std::log(z1 / z0) / (n - 1);
    std::vector<boost::math::interpolators::cardinal_cubic_b_spline<double>> bars(static_cast<std::size_t>(M + 1));
    for (int l = 1; l <= M; ++l)
    {
        if (l < M && !kernel.unsat)
            continue;
        std::vector<double> v(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            v[static_cast<std::size_t>(j)] = single_ru_exceedance(z0 * std::exp(j * du), l, q);
        bars[static_cast<std::size_t>(l)] =
            boost::math::interpolators::cardinal_cubic_b_spline<double>(v.begin(), v.end(), 0.0, du);
    }
    const double hit = gp.expect([&](double gamma) {
        const double u = std::log((beta * (gamma + sigma2) / P) / z0);
        return kernel([&](int l) {
            return detail::clamp_probability(bars[static_cast<std::size_t>(l)](std::min(u, (n - 1) * du)));
        });
    });
    return detail::clamp_probability(hit);
}

inline double cond_hit_best_approx(std::size_t i, const HitQuery& q)
{
    const double p = detail::check_file(q, i);
    if (p <= 0.0)
        return 0.0;
    const auto model = q.interference();
    const auto& table = model->table();
    const auto eff = effective_L(q.params, q.geom.D);
    const int n = q.params.M - eff.L + 1;
    const double mu_i = detail::cache_mean(q, p);
    const double c = eff.eta * q.params.beta / q.params.P;
    const double ai = q.params.alpha_i;
    const double sigma2 = q.params.sigma2;
    auto g = [&](double y) {
        const double base = c * std::pow(y, ai);
        return detail::alzer_sum(n, [&](int m) {
            const double s = base * m;
            return std::exp(-s * sigma2 + table.log_lt(s));
        });
    };
    const double integral = integrate_distance_law<double>(q.geom, g, 0.0, detail::hit_spec());
    return detail::clamp_probability(-std::expm1(-mu_i * integral));
}

inline double cond_hit(std::size_t i, const HitQuery& q)
{
    if (q.strategy == Strategy::Closest)
        return q.method == Method::Exact ? cond_hit_closest_exact(i, q) : cond_hit_closest_approx(i, q);
    return q.method == Method::Exact ? cond_hit_best_exact(i, q) : cond_hit_best_approx(i, q);
}

/// Per-file conditional hit probabilities.
inline std::vector<double> cond_hits(const HitQuery& q)
{
    HitQuery local = q;
    local.model = q.interference();
    std::vector<double> out(q.policy.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = cond_hit(i, local);
    return out;
}

/// sum_i q_i P_hit_i.
inline double network_hit(const HitQuery& q)
{
    const auto hits = cond_hits(q);
    double acc = 0.0;
    for (std::size_t i = 0; i < hits.size(); ++i)
        acc += q.profile.q[i] * hits[i];
    return detail::clamp_probability(acc);
}

} // namespace cloudcache
