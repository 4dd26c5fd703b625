// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks: analytic results against Monte Carlo,
// qualitative sweep behaviour, optimizer certificates, distribution checks
// and reproducibility.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "cloudcache/config.hpp"
#include "cloudcache/experiments.hpp"
#include "cloudcache/geometry.hpp"
#include "cloudcache/hitprob.hpp"
#include "cloudcache/optimizer.hpp"
#include "cloudcache/simulator.hpp"
#include "cloudcache/stats.hpp"

namespace cloudcache::validation {

struct CheckResult
{
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options
{
    NetworkConfig cfg;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    std::uint64_t ks_samples = 1000000;
    std::uint64_t zf_samples = 100000;
    int threads = 1;
    std::ostream* log = nullptr; // informational lines
};

/// Shared state so sweeps and interference models are built once.
class Suite
{
  public:
    explicit Suite(Options opt) : opt_(std::move(opt)) { opt_.cfg.validate(); }

    const Options& options() const { return opt_; }
    ModelCache& models() { return models_; }

    const HitCurve& figure(int f)
    {
        auto it = std::find_if(curves_.begin(), curves_.end(), [&](const auto& c) { return c.first == f; });
        if (it != curves_.end())
            return it->second;
        SweepSpec s = figure_sweep(f);
        s.trials = opt_.trials;
        s.seed = opt_.seed;
        s.threads = opt_.threads;
        curves_.emplace_back(f, run_sweep(opt_.cfg, s, &models_));
        return curves_.back().second;
    }

    void note(const std::string& line) const
    {
        if (opt_.log)
            *opt_.log << "    " << line << '\n';
    }

  private:
    Options opt_;
    ModelCache models_;
    std::vector<std::pair<int, HitCurve>> curves_;
};

namespace detail {

inline std::string fmt(double v, int prec = 6)
{
    std::ostringstream o;
    o << std::setprecision(prec) << v;
    return o.str();
}

inline std::vector<double> hits(const std::vector<HitRow>& rows)
{
    std::vector<double> v;
    for (const auto& r : rows)
        v.push_back(r.hit);
    return v;
}

inline bool nondecreasing(const std::vector<double>& v, double slack = 1e-9)
{
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] < v[i - 1] - slack)
            return false;
    return true;
}

inline bool all_finite(const std::vector<HitRow>& rows)
{
    return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const HitRow& r) { return std::isfinite(r.hit); });
}

inline const char* sname(Strategy s) { return to_string(s); }

} // namespace detail

/// Laplace transform against the sample mean of exp(-s I) (99% CI).
inline CheckResult check_laplace_transform(Suite& suite)
{
    CheckResult r{1, "laplace_transform_vs_monte_carlo"};
    const auto& cfg = suite.options().cfg;
    const auto samples = sample_interference(cfg, suite.options().trials, suite.options().seed);
    const auto model = suite.models().get(cfg);
    r.pass = true;
    std::ostringstream d;
    for (double c : {0.01, 0.1, 1.0, 10.0})
    {
        const double s = c / cfg.radio.sigma2;
        const double lt = model->lt().eval(s);
        const auto mc = laplace_estimate(samples, s, 2.576);
        const bool ok = std::abs(lt - mc.estimate) <= mc.half_width;
        r.pass = r.pass && ok;
        d << "s=" << s << ": L=" << detail::fmt(lt) << " mc=" << detail::fmt(mc.estimate) << "+-"
          << detail::fmt(mc.half_width, 2) << (ok ? "" : " (outside)") << "; ";
    }
    r.detail = d.str();
    return r;
}

/// Exact analytic hit inside the Monte Carlo 95% CI over beta and strategies.
inline CheckResult check_exact_hit(Suite& suite)
{
    CheckResult r{2, "exact_hit_vs_monte_carlo"};
    const auto& c = suite.figure(2);
    r.pass = true;
    std::ostringstream d;
    for (Strategy st : {Strategy::Closest, Strategy::Best})
    {
        const auto ex = c.select(to_string(st), "exact", "optimized");
        const auto mc = c.select(to_string(st), "mc", "optimized");
        if (!detail::all_finite(ex) || !detail::all_finite(mc) || ex.size() != mc.size())
        {
            r.pass = false;
            d << to_string(st) << ": missing rows; ";
            continue;
        }
        for (std::size_t k = 0; k < ex.size(); ++k)
        {
            const bool ok = std::abs(ex[k].hit - mc[k].hit) <= mc[k].ci_halfwidth;
            r.pass = r.pass && ok;
            d << to_string(st) << "@" << ex[k].value << "dB " << detail::fmt(ex[k].hit, 5) << " vs "
              << detail::fmt(mc[k].hit, 5) << "+-" << detail::fmt(mc[k].ci_halfwidth, 2) << (ok ? "" : " (outside)")
              << "; ";
        }
    }
    // The two-moment Gamma law for the interference, for reference.
    const auto& cfg = suite.options().cfg;
    const auto mc = c.select("best", "mc", "optimized");
    for (std::size_t k = 0; k < mc.size(); ++k)
    {
        const auto pc = apply_sweep_value(cfg, "beta_dB", mc[k].value);
        const auto model = suite.models().get(pc);
        const auto policy = design_policy(pc, Strategy::Best, PolicyKind::Optimized, model);
        const double g = analytic_network_hit(pc, policy, Strategy::Best, Method::Exact, InterferenceLaw::GammaSurrogate, model);
        suite.note("best@" + detail::fmt(mc[k].value) + "dB with Gamma interference law: " + detail::fmt(g, 5)
                   + " (mc " + detail::fmt(mc[k].hit, 5) + ")");
    }
    r.detail = d.str();
    return r;
}

inline CheckResult check_approximation(Suite& suite)
{
    CheckResult r{3, "approximation_tightness"};
    const auto& c = suite.figure(2);
    r.pass = true;
    double worst = 0.0;
    std::ostringstream d;
    for (Strategy st : {Strategy::Closest, Strategy::Best})
    {
        const auto ex = c.select(to_string(st), "exact", "optimized");
        const auto ap = c.select(to_string(st), "approx", "optimized");
        if (!detail::all_finite(ex) || !detail::all_finite(ap))
        {
            r.pass = false;
            continue;
        }
        for (std::size_t k = 0; k < ex.size(); ++k)
        {
            const double gap = std::abs(ex[k].hit - ap[k].hit);
            worst = std::max(worst, gap);
            r.pass = r.pass && gap <= 0.05;
            d << to_string(st) << "@" << ex[k].value << "dB |d|=" << detail::fmt(gap, 3) << "; ";
        }
    }
    r.detail = "max |approx - exact| = " + detail::fmt(worst, 4) + "; " + d.str();
    return r;
}

/// SINR threshold (dB) at which the exact hit of a strategy equals target.
inline double threshold_at(Suite& suite, Strategy st, double target)
{
    const auto& cfg = suite.options().cfg;
    auto h = [&](double beta_db) {
        const auto pc = apply_sweep_value(cfg, "beta_dB", beta_db);
        const auto model = suite.models().get(pc);
        const auto policy = design_policy(pc, st, PolicyKind::Optimized, model);
        return analytic_network_hit(pc, policy, st, Method::Exact, InterferenceLaw::GilPelaez, model) - target;
    };
    double lo = -10.0, hi = 30.0;
    return quad::bisect(h, lo, hi, 1e-5, 40);
}

inline CheckResult check_strategy_ordering(Suite& suite)
{
    CheckResult r{4, "best_outperforms_closest"};
    const auto& c = suite.figure(2);
    const auto cl = c.select("closest", "exact", "optimized");
    const auto be = c.select("best", "exact", "optimized");
    bool ordered = detail::all_finite(cl) && detail::all_finite(be) && cl.size() == be.size();
    for (std::size_t k = 0; ordered && k < cl.size(); ++k)
        ordered = be[k].hit >= cl[k].hit;
    const double bc = threshold_at(suite, Strategy::Closest, 0.8);
    const double bb = threshold_at(suite, Strategy::Best, 0.8);
    const double gap = bb - bc;
    r.pass = ordered && std::abs(gap - 4.0) <= 2.0;
    r.detail = std::string(ordered ? "best >= closest at every beta" : "ordering violated") + "; hit 0.8 at "
               + detail::fmt(bc, 4) + " dB (closest) and " + detail::fmt(bb, 4) + " dB (best), gap "
               + detail::fmt(gap, 3) + " dB (expected 4 +- 2)";
    return r;
}

inline CheckResult check_distance(Suite& suite)
{
    CheckResult r{5, "distance_behaviour"};
    const auto& c = suite.figure(3);
    r.pass = true;
    std::ostringstream d;
    for (Strategy st : {Strategy::Closest, Strategy::Best})
    {
        const auto opt = c.select(to_string(st), "exact", "optimized");
        const auto mp = c.select(to_string(st), "exact", "most_popular");
        if (!detail::all_finite(opt) || !detail::all_finite(mp))
        {
            r.pass = false;
            continue;
        }
        const auto h = detail::hits(opt);
        // ties within round-off count as extremes
        const bool max_centre = h.front() >= *std::max_element(h.begin(), h.end()) - 1e-9;
        const bool min_edge = h.back() <= *std::min_element(h.begin(), h.end()) + 1e-9;
        bool dominates = true;
        for (std::size_t k = 0; k < opt.size(); ++k)
            dominates = dominates && opt[k].hit >= mp[k].hit;
        r.pass = r.pass && max_centre && min_edge && dominates;
        d << to_string(st) << ": hit(d=0)=" << detail::fmt(h.front(), 4) << " hit(d=D)=" << detail::fmt(h.back(), 4)
          << (max_centre ? "" : " max not at centre") << (min_edge ? "" : " min not at edge")
          << (dominates ? " optimized>=most_popular" : " most_popular wins somewhere") << "; ";
    }
    r.detail = d.str();
    return r;
}

inline CheckResult check_memory(Suite& suite)
{
    CheckResult r{6, "memory_sweep"};
    const auto& c = suite.figure(4);
    r.pass = true;
    std::ostringstream d;
    for (Strategy st : {Strategy::Closest, Strategy::Best})
    {
        const auto opt = c.select(to_string(st), "exact", "optimized");
        const auto mp = c.select(to_string(st), "exact", "most_popular");
        if (!detail::all_finite(opt) || !detail::all_finite(mp))
        {
            r.pass = false;
            continue;
        }
        const bool mono = detail::nondecreasing(detail::hits(opt)) && detail::nondecreasing(detail::hits(mp));
        const bool equal_full = std::abs(opt.back().hit - mp.back().hit) <= 1e-9;
        auto first_reach = [](const std::vector<HitRow>& rows) {
            for (const auto& row : rows)
                if (row.hit >= 0.8)
                    return row.value;
            return std::nan("");
        };
        const double n_opt = first_reach(opt);
        const double n_mp = first_reach(mp);
        const double saving = n_mp - n_opt;
        const bool saves = std::isfinite(saving) && saving >= 8.0;
        r.pass = r.pass && mono && equal_full && saves;
        d << to_string(st) << ": " << (mono ? "monotone" : "not monotone") << ", "
          << (equal_full ? "equal at N_c=N" : "differ at N_c=N") << ", hit 0.8 at N_c=" << n_opt << " vs " << n_mp
          << " (saving " << saving << ", need >= 8); ";
    }
    r.detail = d.str();
    return r;
}

inline CheckResult check_skewness(Suite& suite)
{
    CheckResult r{7, "skewness_sweep"};
    const auto& c = suite.figure(5);
    r.pass = true;
    std::ostringstream d;
    for (Strategy st : {Strategy::Closest, Strategy::Best})
    {
        const auto opt = c.select(to_string(st), "exact", "optimized");
        const auto mp = c.select(to_string(st), "exact", "most_popular");
        if (!detail::all_finite(opt) || !detail::all_finite(mp))
        {
            r.pass = false;
            continue;
        }
        const bool mono = detail::nondecreasing(detail::hits(opt)) && detail::nondecreasing(detail::hits(mp));
        const double span = opt.back().value - opt.front().value;
        const double s_opt = (opt.back().hit - opt.front().hit) / span;
        const double s_mp = (mp.back().hit - mp.front().hit) / span;
        r.pass = r.pass && mono && s_mp > s_opt;
        d << to_string(st) << ": " << (mono ? "monotone" : "not monotone") << ", slope optimized "
          << detail::fmt(s_opt, 4) << " most_popular " << detail::fmt(s_mp, 4) << "; ";
    }
    r.detail = d.str();
    return r;
}

inline CheckResult check_antennas(Suite& suite)
{
    CheckResult r{8, "antenna_sweep"};
    const auto& c = suite.figure(6);
    r.pass = true;
    std::ostringstream d;
    for (Strategy st : {Strategy::Closest, Strategy::Best})
    {
        const auto opt = c.select(to_string(st), "exact", "optimized");
        if (!detail::all_finite(opt))
        {
            r.pass = false;
            continue;
        }
        auto h = detail::hits(opt);
        std::reverse(h.begin(), h.end());
        const bool mono = detail::nondecreasing(h);
        r.pass = r.pass && mono;
        d << to_string(st) << ":";
        for (const auto& row : opt)
            d << " M=" << row.value << ":" << detail::fmt(row.hit, 4);
        d << (mono ? "" : " (not nonincreasing)") << "; ";
    }
    r.detail = d.str();
    return r;
}

inline CheckResult check_pathloss(Suite& suite)
{
    CheckResult r{9, "pathloss_optimum"};
    const auto& c = suite.figure(7);
    r.pass = true;
    std::ostringstream d;
    for (Strategy st : {Strategy::Closest, Strategy::Best})
    {
        const auto opt = c.select(to_string(st), "exact", "optimized");
        if (!detail::all_finite(opt))
        {
            r.pass = false;
            continue;
        }
        const auto h = detail::hits(opt);
        const auto k = static_cast<std::size_t>(std::max_element(h.begin(), h.end()) - h.begin());
        const double a = opt[k].value;
        const bool interior = k > 0 && k + 1 < h.size();
        const bool near = std::abs(a - 3.5) <= 0.5;
        r.pass = r.pass && interior && near;
        d << to_string(st) << ": argmax alpha_i=" << a << " hit " << detail::fmt(h[k], 4)
          << (interior ? "" : " (at grid edge)") << "; ";
    }
    r.detail = d.str();
    return r;
}

inline CheckResult check_optimizer(Suite& suite)
{
    CheckResult r{10, "optimizer_correctness"};
    const auto& cfg = suite.options().cfg;
    const auto model = suite.models().get(cfg);
    const CentreObjective obj(cfg.radio, cfg.D, cfg.d_g, model);
    std::ostringstream d;
    bool ok = true;

    // uniform popularity
    const auto uni = PopularityProfile::uniform(static_cast<std::size_t>(cfg.N));
    double err_u = 0.0;
    for (Problem pr : {Problem::Closest, Problem::Best})
        for (double p : solve(pr, uni, cfg.N_c, obj).policy.p)
            err_u = std::max(err_u, std::abs(p - static_cast<double>(cfg.N_c) / cfg.N));
    ok = ok && err_u <= 1e-9;
    d << "(a) uniform max error " << detail::fmt(err_u, 3) << "; ";

    // three files, grid oracle
    const auto three = zipf_profile(3, cfg.gamma);
    double err_g = 0.0;
    for (Problem pr : {Problem::Closest, Problem::Best})
    {
        const auto g = grid_search_three(pr, three, 1, obj, 1e-3);
        const auto s = solve(pr, three, 1, obj);
        err_g = std::max(err_g, g.objective - s.objective);
    }
    ok = ok && err_g <= 1e-3;
    d << "(b) grid oracle excess " << detail::fmt(err_g, 3) << "; ";

    // closed form against generic projected gradient
    const auto prof = cfg.profile();
    const auto cf = solve_problem2(prof, cfg.N_c, obj);
    const auto pg = solve_projected_gradient(Problem::Best, prof, cfg.N_c, obj);
    const double err_c = std::abs(cf.objective - pg.objective);
    ok = ok && err_c <= 1e-4;
    d << "(c) closed form vs projected gradient " << detail::fmt(err_c, 3) << "; ";

    // interior gaps
    const auto gap = policy_gap_diagnostic(cf, prof, obj.C());
    ok = ok && gap.interior_pairs > 0 && gap.max_error <= 1e-6;
    d << "(d) " << gap.interior_pairs << " interior pairs, max gap error " << detail::fmt(gap.max_error, 3);

    r.pass = ok;
    r.detail = d.str();
    return r;
}

inline CheckResult check_concavity_suite(Suite& suite)
{
    CheckResult r{11, "objective_concavity"};
    const auto& cfg = suite.options().cfg;
    const auto model = suite.models().get(cfg);
    const CentreObjective obj(cfg.radio, cfg.D, cfg.d_g, model);
    const auto prof = cfg.profile();
    std::ostringstream d;
    r.pass = true;
    for (Problem pr : {Problem::Closest, Problem::Best})
    {
        const auto rep = check_concavity(pr, prof, cfg.N_c, obj, 20, suite.options().seed);
        r.pass = r.pass && rep.pass;
        d << to_string(pr) << " max second difference " << detail::fmt(rep.max_second_difference, 3) << "; ";
    }
    r.detail = d.str();
    return r;
}

/// Empirical strongest received power among k RUs against its analytic CDF.
inline stats::KsResult max_power_ks(const NetworkConfig& cfg, int l, int k, std::uint64_t samples, std::uint64_t seed)
{
    HitQuery q;
    q.params = cfg.radio;
    q.geom = cfg.geometry();
    auto rng = block_stream(seed, static_cast<std::uint64_t>(l * 1000 + k));
    std::gamma_distribution<double> gain(static_cast<double>(cfg.radio.M - l + 1), 1.0);
    std::vector<double> x(samples);
    for (auto& v : x)
    {
        double best = 0.0;
        for (int j = 0; j < k; ++j)
        {
            const Point p = ::cloudcache::detail::uniform_in_disk(cfg.d, 0.0, cfg.D, rng);
            best = std::max(best, cfg.radio.P * gain(rng) * std::pow(p.norm(), -cfg.radio.alpha_i));
        }
        v = best;
    }
    // Qbar_l(z) splined in ln z; F(x) = (1 - Qbar_l(x / P))^k.
    auto sorted = x;
    std::sort(sorted.begin(), sorted.end());
    const double z0 = std::max(sorted.front(), 1e-300) / cfg.radio.P * 0.5;
    const double z1 = sorted.back() / cfg.radio.P * 2.0;
    const double du = std::log(10.0) / 64.0;
    const int n = static_cast<int>(std::ceil(std::log(z1 / z0) / du)) + 2;
    std::vector<double> tab(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j)
        tab[static_cast<std::size_t>(j)] = single_ru_exceedance(z0 * std::exp(j * du), l, q);
    boost::math::interpolators::cardinal_cubic_b_spline<double> bar(tab.begin(), tab.end(), 0.0, du);
    auto cdf = [&](double v) {
        const double z = v / cfg.radio.P;
        const double b = z < z0 ? single_ru_exceedance(z, l, q) : bar(std::log(z / z0));
        return std::pow(std::clamp(1.0 - b, 0.0, 1.0), k);
    };
    return stats::ks_test(std::move(sorted), cdf);
}

inline CheckResult check_distributions(Suite& suite)
{
    CheckResult r{12, "distribution_laws"};
    const auto& cfg = suite.options().cfg;
    std::ostringstream d;
    bool ok = true;

    double worst = 0.0;
    quad::QuadSpec spec;
    spec.rel_tol = 1e-12;
    spec.abs_tol = 1e-14;
    for (double x : {0.0, 0.5 * cfg.D, cfg.D, 2.0 * cfg.D})
    {
        const CloudGeometry g{cfg.D, cfg.d_g, x};
        const auto [lo, hi] = distance_support(g);
        std::vector<double> bp{std::abs(cfg.D - x)};
        const double mass = quad::integrate_finite([&](double y) { return distance_pdf(y, g); }, lo, hi, spec, bp).value;
        const double mass_n = quad::integrate_finite([&](double y) { return serving_distance_pdf_given_n(y, 5, g); },
                                                     lo, hi, spec, bp)
                                  .value;
        worst = std::max({worst, std::abs(mass - 1.0), std::abs(mass_n - 1.0)});
    }
    ok = ok && worst <= 1e-8;
    d << "pdf mass error " << detail::fmt(worst, 3) << "; ";

    const int M = cfg.radio.M;
    for (auto [l, k] : std::vector<std::pair<int, int>>{{M, 1}, {M, 2}, {M - 3, 3}})
    {
        const auto ks = max_power_ks(cfg, l, k, suite.options().ks_samples, suite.options().seed);
        ok = ok && ks.p_value > 0.01;
        d << "max power (l=" << l << ",k=" << k << ") KS p=" << detail::fmt(ks.p_value, 3) << "; ";
    }
    for (auto [m, l] : std::vector<std::pair<int, int>>{{M, 1}, {M, M / 2}, {M, M}})
    {
        const auto z = validate_zf_gain(m, l, suite.options().zf_samples, suite.options().seed);
        ok = ok && z.pass;
        d << "ZF gain (M=" << m << ",l=" << l << ") KS p=" << detail::fmt(z.ks.p_value, 3) << "; ";
    }
    r.pass = ok;
    r.detail = d.str();
    return r;
}

/// Two sweeps with the same seed must serialise to identical bytes, also
/// across thread counts. `external` returns an error text or "" for an extra check.
inline CheckResult check_determinism(Suite& suite, const std::function<std::string()>& external = {})
{
    CheckResult r{13, "sweep_determinism"};
    SweepSpec s = figure_sweep(2);
    s.values = {5.0, 10.0};
    s.trials = 4000;
    s.seed = suite.options().seed;
    auto text = [&](int threads) {
        s.threads = threads;
        std::ostringstream o;
        emit_csv(run_sweep(suite.options().cfg, s, &suite.models()), o);
        return o.str();
    };
    const auto a = text(1);
    const auto b = text(1);
    const auto c = text(3);
    r.pass = a == b && a == c;
    r.detail = std::string(a == b ? "repeat identical" : "repeat differs") + ", "
               + (a == c ? "thread count invariant" : "thread count changes output");
    if (external)
    {
        const std::string e = external();
        r.pass = r.pass && e.empty();
        r.detail += e.empty() ? ", CLI reruns identical" : ", " + e;
    }
    return r;
}

inline std::vector<std::function<CheckResult(Suite&)>> all_checks()
{
    return {check_laplace_transform, check_exact_hit,    check_approximation,   check_strategy_ordering,
            check_distance,          check_memory,       check_skewness,        check_antennas,
            check_pathloss,          check_optimizer,    check_concavity_suite, check_distributions,
            [](Suite& s) { return check_determinism(s); }};
}

/// Runs one check, timing it and converting exceptions into failures.
inline CheckResult run_check(const std::function<CheckResult(Suite&)>& check, Suite& suite, int id)
{
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    try
    {
        r = check(suite);
    }
    catch (const std::exception& e)
    {
        r.id = id;
        r.name = "check_" + std::to_string(id);
        r.pass = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

inline std::string format_result(const CheckResult& r)
{
    std::ostringstream o;
    o << (r.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << r.id << "  " << r.name << "  [" << std::fixed
      << std::setprecision(1) << r.seconds << " s]  " << r.detail;
    return o.str();
}

} // namespace cloudcache::validation
