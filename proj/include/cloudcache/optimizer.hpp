// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// Cache placement for a user at the cloud centre.
//
// Both objectives are separable, sum_i q_i f(p_i):
//   closest  f1(p) = 2 pi lambda p int_0^D r exp(-lambda p pi r^2) K(r) dr
//   best     f2(p) = 1 - exp(-C p),  C = 2 pi lambda int_0^D r K(r) dr
// with K(r) the alternating sum of exp(-s sigma2) L(s), s = eta beta m r^alpha_i / P.
// K does not depend on p and is evaluated once at fixed quadrature nodes.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "cloudcache/content.hpp"
#include "cloudcache/hitprob.hpp"
#include "cloudcache/quadrature.hpp"
#include "cloudcache/radio.hpp"

namespace cloudcache {

enum class Problem { Closest = 1, Best = 2 };

inline const char* to_string(Problem p) { return p == Problem::Closest ? "problem1" : "problem2"; }

struct OptimizerSettings
{
    double tol = 1e-10;
    int max_iterations = 20000;
};

struct OptimizerReport
{
    Problem problem = Problem::Closest;
    CachePolicy policy;
    double objective = 0.0;
    int iterations = 0;
    double kkt_residual = 0.0;
    double constraint_slack = 0.0; // N_c - sum p
    double multiplier = 0.0;       // mu for problem 1, v for problem 2
    bool converged = false;
};

class OptimizerError : public std::runtime_error
{
  public:
    OptimizerError(const std::string& what, OptimizerReport best) : std::runtime_error(what), best_(std::move(best)) {}
    const OptimizerReport& best() const { return best_; }

  private:
    OptimizerReport best_;
};

/// Objective pieces at the cloud centre.
class CentreObjective
{
  public:
    CentreObjective(const RadioParams& params, double D, double d_g, std::shared_ptr<const InterferenceModel> model = {})
        : params_(params), D_(D)
    {
        params_.validate();
        if (!model)
            model = make_interference_model(params_, D, d_g);
        else if (!model->matches(params_, D, d_g))
            throw std::domain_error("CentreObjective: interference model built for other parameters");
        model_ = model;
        const auto eff = effective_L(params_, D);
        const int n = params_.M - eff.L + 1;
        const double c = eff.eta * params_.beta / params_.P;
        const auto& table = model_->table();

        // r = D u^2 spreads nodes towards r = 0 where exp(-lambda p pi r^2) is steep.
        using gl = boost::math::quadrature::gauss<double, 20>;
        const int panels = 48;
        for (int k = 0; k < panels; ++k)
        {
            const double a = static_cast<double>(k) / panels;
            const double b = static_cast<double>(k + 1) / panels;
            const double mid = 0.5 * (a + b);
            const double half = 0.5 * (b - a);
            auto add = [&](double u, double w) {
                const double r = D * u * u;
                const double base = c * std::pow(r, params_.alpha_i);
                const double K = detail::alzer_sum(n, [&](int m) {
                    const double s = base * m;
                    return std::exp(-s * params_.sigma2 + table.log_lt(s));
                });
                r_.push_back(r);
                // weight carries dr = 2 D u du and the factor r
                w_.push_back(w * half * 2.0 * D * u * r * K);
            };
            const auto& x = gl::abscissa();
            const auto& wt = gl::weights();
            for (std::size_t j = 0; j < x.size(); ++j)
            {
                add(mid + half * x[j], wt[j]);
                if (x[j] != 0.0)
                    add(mid - half * x[j], wt[j]);
            }
        }
        const double lam = params_.lambda;
        C_ = 0.0;
        for (double w : w_)
            C_ += w;
        C_ *= 2.0 * std::numbers::pi * lam;
    }

    const RadioParams& params() const { return params_; }
    double D() const { return D_; }
    double C() const { return C_; }
    std::shared_ptr<const InterferenceModel> model() const { return model_; }

    /// Per-file objective and its first two derivatives in p.
    double value(Problem pr, double p) const { return eval(pr, p, 0); }
    double derivative(Problem pr, double p) const { return eval(pr, p, 1); }
    double second_derivative(Problem pr, double p) const { return eval(pr, p, 2); }

    double total(Problem pr, const PopularityProfile& prof, const std::vector<double>& p) const
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
            acc += prof.q[i] * value(pr, p[i]);
        return acc;
    }

  private:
    double eval(Problem pr, double p, int order) const
    {
        if (pr == Problem::Best)
        {
            const double e = std::exp(-C_ * p);
            if (order == 0)
                return -std::expm1(-C_ * p);
            return order == 1 ? C_ * e : -C_ * C_ * e;
        }
        const double lam = params_.lambda;
        const double two_pi_lam = 2.0 * std::numbers::pi * lam;
        double acc = 0.0;
        for (std::size_t j = 0; j < r_.size(); ++j)
        {
            const double a = lam * std::numbers::pi * r_[j] * r_[j];
            const double e = std::exp(-a * p);
            double g;
            if (order == 0)
                g = p * e;
            else if (order == 1)
                g = (1.0 - a * p) * e;
            else
                g = a * (a * p - 2.0) * e;
            acc += w_[j] * g;
        }
        return two_pi_lam * acc;
    }

    RadioParams params_;
    double D_;
    std::shared_ptr<const InterferenceModel> model_;
    std::vector<double> r_;
    std::vector<double> w_;
    double C_ = 0.0;
};

namespace detail {

inline void check_problem(const PopularityProfile& profile, int N_c)
{
    profile.validate();
    if (N_c < 0 || static_cast<std::size_t>(N_c) > profile.size())
    {
        std::ostringstream msg;
        msg << "optimizer: memory size " << N_c << " not in [0, " << profile.size() << "]";
        throw std::domain_error(msg.str());
    }
}

inline OptimizerReport saturated_report(Problem pr, const CentreObjective& obj, const PopularityProfile& profile, int N_c)
{
    OptimizerReport r;
    r.problem = pr;
    r.policy = CachePolicy{std::vector<double>(profile.size(), N_c > 0 ? 1.0 : 0.0), N_c};
    r.objective = obj.total(pr, profile, r.policy.p);
    r.converged = true;
    return r;
}

// Spread the budget error over the free coordinates so sum p == N_c.
inline void repair_budget(std::vector<double>& p, double N_c)
{
    for (int pass = 0; pass < 4; ++pass)
    {
        double sum = 0.0;
        int free = 0;
        for (double v : p)
        {
            sum += v;
            if (v > 0.0 && v < 1.0)
                ++free;
        }
        const double gap = N_c - sum;
        if (gap == 0.0 || free == 0)
            return;
        for (double& v : p)
            if (v > 0.0 && v < 1.0)
                v = std::clamp(v + gap / free, 0.0, 1.0);
    }
}

// Projected gradient component: zero where a bound blocks the ascent direction.
inline double projected(double p, double g)
{
    if ((p <= 0.0 && g < 0.0) || (p >= 1.0 && g > 0.0))
        return 0.0;
    return g;
}

} // namespace detail

/// Closest-selection placement by primal-dual projected gradient.
///
/// For a fixed multiplier mu the p-step is projected gradient ascent on
/// sum q_i f1(p_i) - mu (sum p - N_c) with backtracking (initial step
/// 1 / (lambda pi D^2), halved on non-improvement, separately per file).
/// mu is then moved along the dual gradient N_c - sum p, kept >= 0, with a
/// bracketing safeguard so it cannot oscillate.
inline OptimizerReport solve_problem1(const PopularityProfile& profile,
                                      int N_c,
                                      const CentreObjective& obj,
                                      const OptimizerSettings& settings = {})
{
    detail::check_problem(profile, N_c);
    const std::size_t N = profile.size();
    if (static_cast<std::size_t>(N_c) == N || N_c == 0)
        return detail::saturated_report(Problem::Closest, obj, profile, N_c);
    const auto& P = obj.params();
    const double tau0 = 1.0 / (P.lambda * std::numbers::pi * obj.D() * obj.D());
    const Problem pr = Problem::Closest;

    std::vector<double> p(N, static_cast<double>(N_c) / N);
    std::vector<double> tau(N, tau0);
    int iterations = 0;

    // Primal maximisation for fixed mu.
    auto primal = [&](double mu) {
        for (std::size_t i = 0; i < N; ++i)
        {
            const double q = profile.q[i];
            auto merit = [&](double x) { return q * obj.value(pr, x) - mu * x; };
            for (int it = 0; it < settings.max_iterations; ++it)
            {
                ++iterations;
                const double g = q * obj.derivative(pr, p[i]) - mu;
                if (std::abs(detail::projected(p[i], g)) < 0.1 * settings.tol)
                    break;
                const double f0 = merit(p[i]);
                double t = std::max(tau[i], tau0);
                double next = p[i];
                bool moved = false;
                for (int k = 0; k < 60; ++k)
                {
                    next = std::clamp(p[i] + t * g, 0.0, 1.0);
                    if (next == p[i])
                        break;
                    // Armijo, or a smaller slope once merit differences reach round-off
                    const double f1 = merit(next);
                    const bool flat = std::abs(f1 - f0) <= 1e-14 * (std::abs(f0) + 1.0);
                    if (f1 >= f0 + 1e-4 * g * (next - p[i])
                        || (flat && std::abs(q * obj.derivative(pr, next) - mu) < 0.5 * std::abs(g)))
                    {
                        moved = true;
                        break;
                    }
                    t *= 0.5;
                }
                if (!moved)
                    break;
                p[i] = next;
                tau[i] = std::min(2.0 * t, 1e6 * tau0);
            }
        }
        double s = 0.0;
        for (double v : p)
            s += v;
        return s;
    };

    // Dual: sum p(mu) is nonincreasing in mu. Gradient steps on mu, with the
    // step shrunk whenever the residual changes sign.
    double mu = 0.0;
    double sum = primal(mu);
    double residual = N_c - sum;
    double lo = 0.0, hi = std::numeric_limits<double>::infinity();
    if (residual >= 0.0)
        hi = 0.0; // budget slack at mu = 0
    double step = tau0;
    int dual_iterations = 0;
    while (std::abs(residual) >= settings.tol && hi > lo && dual_iterations < 400)
    {
        ++dual_iterations;
        if (residual < 0.0)
            lo = mu;
        else
            hi = mu;
        double next = mu - step * residual;
        if (!(next > lo && next < hi))
            next = std::isfinite(hi) ? 0.5 * (lo + hi) : std::max(2.0 * mu, mu + step);
        else
            step *= 1.5;
        if (next == mu)
            break;
        mu = std::max(0.0, next);
        sum = primal(mu);
        residual = N_c - sum;
    }
    detail::repair_budget(p, N_c);

    OptimizerReport r;
    r.problem = pr;
    r.policy = CachePolicy{p, N_c};
    r.objective = obj.total(pr, profile, p);
    r.iterations = iterations;
    r.multiplier = mu;
    double s = 0.0;
    for (double v : p)
        s += v;
    r.constraint_slack = N_c - s;
    double kkt = std::abs(r.constraint_slack);
    for (std::size_t i = 0; i < N; ++i)
        kkt = std::max(kkt, std::abs(detail::projected(p[i], profile.q[i] * obj.derivative(pr, p[i]) - mu)));
    r.kkt_residual = kkt;
    r.converged = kkt <= std::max(100.0 * settings.tol, 1e-8);
    if (!r.converged)
        throw OptimizerError("solve_problem1: no convergence, KKT residual " + std::to_string(kkt), r);
    return r;
}

/// Best-selection placement: p_i = clamp((v - ln(1/q_i)) / C), v by bisection.
inline OptimizerReport solve_problem2(const PopularityProfile& profile,
                                      int N_c,
                                      const CentreObjective& obj,
                                      const OptimizerSettings& settings = {})
{
    detail::check_problem(profile, N_c);
    const std::size_t N = profile.size();
    if (static_cast<std::size_t>(N_c) == N || N_c == 0)
        return detail::saturated_report(Problem::Best, obj, profile, N_c);
    const double C = obj.C();
    auto policy_at = [&](double v) {
        std::vector<double> p(N);
        for (std::size_t i = 0; i < N; ++i)
            p[i] = std::clamp((v + std::log(profile.q[i])) / C, 0.0, 1.0);
        return p;
    };
    auto excess = [&](double v) {
        double s = 0.0;
        for (double x : policy_at(v))
            s += x;
        return s - N_c;
    };
    double lo = -std::log(profile.q.front()) - 1.0;
    double hi = C - std::log(profile.q.back()) + 1.0;
    while (excess(lo) > 0.0)
        lo -= 2.0 * (hi - lo);
    while (excess(hi) < 0.0)
        hi += 2.0 * (hi - lo);
    const double v = quad::bisect(excess, lo, hi, std::min(settings.tol, 1e-9));

    OptimizerReport r;
    r.problem = Problem::Best;
    r.policy = CachePolicy{policy_at(v), N_c};
    r.multiplier = v;
    double s = 0.0;
    for (double x : r.policy.p)
        s += x;
    r.constraint_slack = N_c - s;
    r.kkt_residual = std::abs(r.constraint_slack);
    r.objective = obj.total(Problem::Best, profile, r.policy.p);
    r.iterations = 1;
    r.converged = r.kkt_residual <= std::max(settings.tol, 1e-9);
    return r;
}

inline OptimizerReport solve(Problem pr,
                             const PopularityProfile& profile,
                             int N_c,
                             const CentreObjective& obj,
                             const OptimizerSettings& settings = {})
{
    return pr == Problem::Closest ? solve_problem1(profile, N_c, obj, settings)
                                  : solve_problem2(profile, N_c, obj, settings);
}

/// Euclidean projection onto {0 <= p <= 1, sum p = budget}.
inline std::vector<double> project_capped_simplex(const std::vector<double>& y, double budget)
{
    auto at = [&](double shift) {
        double s = 0.0;
        for (double v : y)
            s += std::clamp(v - shift, 0.0, 1.0);
        return s - budget;
    };
    double lo = *std::min_element(y.begin(), y.end()) - 1.0;
    double hi = *std::max_element(y.begin(), y.end());
    const double shift = quad::bisect(at, lo, hi, 1e-14);
    std::vector<double> p(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        p[i] = std::clamp(y[i] - shift, 0.0, 1.0);
    detail::repair_budget(p, budget);
    return p;
}

/// Plain projected-gradient ascent on either objective, used as a
/// cross-check of the specialised solvers.
inline OptimizerReport solve_projected_gradient(Problem pr,
                                                const PopularityProfile& profile,
                                                int N_c,
                                                const CentreObjective& obj,
                                                const OptimizerSettings& settings = {})
{
    detail::check_problem(profile, N_c);
    const std::size_t N = profile.size();
    std::vector<double> p = project_capped_simplex(std::vector<double>(N, static_cast<double>(N_c) / N), N_c);
    auto F = [&](const std::vector<double>& x) { return obj.total(pr, profile, x); };
    double f = F(p);
    double t = 1.0 / (obj.params().lambda * std::numbers::pi * obj.D() * obj.D());
    int it = 0;
    double moved = 0.0;
    for (; it < settings.max_iterations; ++it)
    {
        std::vector<double> g(N), y(N);
        for (std::size_t i = 0; i < N; ++i)
            g[i] = profile.q[i] * obj.derivative(pr, p[i]);
        bool accepted = false;
        std::vector<double> next;
        for (int k = 0; k < 60; ++k)
        {
            for (std::size_t i = 0; i < N; ++i)
                y[i] = p[i] + t * g[i];
            next = project_capped_simplex(y, N_c);
            double lin = 0.0, dist = 0.0;
            for (std::size_t i = 0; i < N; ++i)
            {
                lin += g[i] * (next[i] - p[i]);
                dist += (next[i] - p[i]) * (next[i] - p[i]);
            }
            const double fn = F(next);
            if (fn >= f + lin - dist / (2.0 * t))
            {
                accepted = true;
                f = fn;
                break;
            }
            t *= 0.5;
        }
        moved = 0.0;
        for (std::size_t i = 0; i < N; ++i)
            moved = std::max(moved, std::abs(next[i] - p[i]));
        p = std::move(next);
        t *= 2.0;
        if (!accepted || moved / t < settings.tol)
            break;
    }
    OptimizerReport r;
    r.problem = pr;
    r.policy = CachePolicy{p, N_c};
    r.objective = f;
    r.iterations = it;
    double s = 0.0;
    for (double v : p)
        s += v;
    r.constraint_slack = N_c - s;
    r.kkt_residual = moved / t;
    r.converged = r.kkt_residual < std::max(settings.tol, 1e-8);
    return r;
}

/// Exhaustive search over the budget-saturating grid for N = 3.
inline OptimizerReport grid_search_three(Problem pr,
                                         const PopularityProfile& profile,
                                         int N_c,
                                         const CentreObjective& obj,
                                         double resolution = 1e-3)
{
    if (profile.size() != 3)
        throw std::domain_error("grid_search_three: needs exactly three files");
    const int n = static_cast<int>(std::lround(1.0 / resolution));
    std::vector<std::vector<double>> table(3, std::vector<double>(static_cast<std::size_t>(n + 1)));
    for (int f = 0; f < 3; ++f)
        for (int k = 0; k <= n; ++k)
            table[f][k] = profile.q[f] * obj.value(pr, static_cast<double>(k) / n);
    OptimizerReport r;
    r.problem = pr;
    r.objective = -1.0;
    const int budget = N_c * n;
    for (int a = 0; a <= n; ++a)
        for (int b = 0; b <= n; ++b)
        {
            const int c = budget - a - b;
            if (c < 0 || c > n)
                continue;
            const double v = table[0][a] + table[1][b] + table[2][c];
            if (v > r.objective)
            {
                r.objective = v;
                r.policy = CachePolicy{{static_cast<double>(a) / n, static_cast<double>(b) / n, static_cast<double>(c) / n}, N_c};
            }
        }
    ++r.iterations;
    r.converged = true;
    return r;
}

struct ConcavityReport
{
    Problem problem = Problem::Closest;
    int samples = 0;
    double max_second_difference = -std::numeric_limits<double>::infinity();
    bool pass = false;
};

/// Per-coordinate second differences of the objective at random feasible policies.
inline ConcavityReport check_concavity(Problem pr,
                                       const PopularityProfile& profile,
                                       int N_c,
                                       const CentreObjective& obj,
                                       int samples,
                                       std::uint64_t seed,
                                       double h = 1e-4)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t N = profile.size();
    ConcavityReport rep;
    rep.problem = pr;
    rep.samples = samples;
    for (int s = 0; s < samples; ++s)
    {
        std::vector<double> y(N);
        for (double& v : y)
            v = u(rng);
        auto p = project_capped_simplex(y, N_c);
        for (double& v : p)
            v = std::clamp(v, h, 1.0 - h);
        const double f0 = obj.total(pr, profile, p);
        for (std::size_t i = 0; i < N; ++i)
        {
            auto pp = p, pm = p;
            pp[i] += h;
            pm[i] -= h;
            const double d2 = (obj.total(pr, profile, pp) - 2.0 * f0 + obj.total(pr, profile, pm)) / (h * h);
            rep.max_second_difference = std::max(rep.max_second_difference, d2);
        }
    }
    rep.pass = rep.max_second_difference <= 1e-6;
    return rep;
}

struct GapReport
{
    int interior_pairs = 0;
    double max_error = 0.0;
    double max_gap = 0.0;
    std::string note;
};

/// For interior coordinates of a best-selection policy, p_i - p_j should
/// equal ln(q_i / q_j) / C.
inline GapReport policy_gap_diagnostic(const OptimizerReport& report, const PopularityProfile& profile, double C)
{
    GapReport g;
    std::vector<std::size_t> inner;
    for (std::size_t i = 0; i < report.policy.size(); ++i)
        if (report.policy.p[i] > 1e-12 && report.policy.p[i] < 1.0 - 1e-12)
            inner.push_back(i);
    for (std::size_t a = 0; a < inner.size(); ++a)
        for (std::size_t b = a + 1; b < inner.size(); ++b)
        {
            const std::size_t i = inner[a], j = inner[b];
            const double gap = report.policy.p[i] - report.policy.p[j];
            const double want = std::log(profile.q[i] / profile.q[j]) / C;
            g.max_error = std::max(g.max_error, std::abs(gap - want));
            g.max_gap = std::max(g.max_gap, std::abs(gap));
            ++g.interior_pairs;
        }
    if (g.interior_pairs == 0)
        g.note = "no interior pairs";
    return g;
}

} // namespace cloudcache
