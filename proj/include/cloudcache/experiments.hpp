// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// Parameter sweeps and their CSV form.
//
// Columns: variable,value,strategy,method,policy,hit,ci_halfwidth,runtime_ms,seed

#pragma once

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "cloudcache/config.hpp"
#include "cloudcache/hitprob.hpp"
#include "cloudcache/optimizer.hpp"
#include "cloudcache/simulator.hpp"

namespace cloudcache {

enum class EvalMethod { Exact, Approximate, MonteCarlo };
enum class PolicyKind { Optimized, MostPopular };

inline const char* to_string(EvalMethod m)
{
    switch (m)
    {
    case EvalMethod::Exact:
        return "exact";
    case EvalMethod::Approximate:
        return "approx";
    default:
        return "mc";
    }
}

inline const char* to_string(PolicyKind p) { return p == PolicyKind::Optimized ? "optimized" : "most_popular"; }

inline const std::vector<std::string>& sweep_variables()
{
    static const std::vector<std::string> v{"beta_dB", "d", "N_c", "gamma", "M", "alpha"};
    return v;
}

struct SweepSpec
{
    std::string variable = "beta_dB";
    std::vector<double> values;
    std::vector<Strategy> strategies{Strategy::Closest, Strategy::Best};
    std::vector<EvalMethod> methods{EvalMethod::Exact};
    std::vector<PolicyKind> policies{PolicyKind::Optimized};
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    int threads = 1;
    InterferenceLaw law = InterferenceLaw::GilPelaez; // best selection, exact method
    bool timing = false;                              // runtime_ms stays 0 unless set

    void validate() const
    {
        if (std::find(sweep_variables().begin(), sweep_variables().end(), variable) == sweep_variables().end())
            throw std::domain_error("SweepSpec: unknown variable '" + variable + "'");
        if (values.empty())
            throw std::domain_error("SweepSpec: empty grid");
        if (!std::is_sorted(values.begin(), values.end()))
            throw std::domain_error("SweepSpec: grid must be sorted");
        if (strategies.empty() || methods.empty() || policies.empty())
            throw std::domain_error("SweepSpec: strategies, methods and policies must be nonempty");
    }
};

struct HitRow
{
    std::string variable;
    double value = 0.0;
    std::string strategy;
    std::string method;
    std::string policy;
    double hit = 0.0;
    double ci_halfwidth = 0.0;
    double runtime_ms = 0.0;
    std::uint64_t seed = 0;
    std::string error; // not written; a failed row has hit = nan

    bool operator==(const HitRow& o) const
    {
        auto same = [](double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); };
        return variable == o.variable && same(value, o.value) && strategy == o.strategy && method == o.method
               && policy == o.policy && same(hit, o.hit) && same(ci_halfwidth, o.ci_halfwidth)
               && same(runtime_ms, o.runtime_ms) && seed == o.seed;
    }
};

struct HitCurve
{
    std::vector<HitRow> rows;

    std::size_t failures() const
    {
        return static_cast<std::size_t>(
            std::count_if(rows.begin(), rows.end(), [](const HitRow& r) { return !r.error.empty(); }));
    }

    /// Rows matching the given labels, in grid order.
    std::vector<HitRow> select(const std::string& strategy, const std::string& method, const std::string& policy) const
    {
        std::vector<HitRow> out;
        for (const auto& r : rows)
            if (r.strategy == strategy && r.method == method && r.policy == policy)
                out.push_back(r);
        return out;
    }
};

/// Config with the sweep variable set to v.
inline NetworkConfig apply_sweep_value(NetworkConfig cfg, const std::string& variable, double v)
{
    if (variable == "beta_dB")
        cfg.radio.beta = db_to_linear(v);
    else if (variable == "d")
        cfg.d = v;
    else if (variable == "N_c")
        cfg.N_c = static_cast<int>(std::lround(v));
    else if (variable == "gamma")
        cfg.gamma = v;
    else if (variable == "M")
        cfg.radio.M = static_cast<int>(std::lround(v));
    else if (variable == "alpha")
    {
        cfg.radio.alpha_i = v;
        cfg.radio.alpha_o = v + 0.5;
    }
    else
        throw std::domain_error("apply_sweep_value: unknown variable '" + variable + "'");
    cfg.validate();
    return cfg;
}

/// Interference models keyed by the parameters they depend on.
class ModelCache
{
  public:
    std::shared_ptr<const InterferenceModel> get(const NetworkConfig& cfg)
    {
        for (const auto& m : models_)
            if (m->matches(cfg.radio, cfg.D, cfg.d_g))
                return m;
        models_.push_back(make_interference_model(cfg.radio, cfg.D, cfg.d_g));
        return models_.back();
    }

  private:
    std::vector<std::shared_ptr<const InterferenceModel>> models_;
};

/// Placement used for a strategy: problem 1 for closest, problem 2 for best,
/// both designed at the cloud centre.
inline CachePolicy design_policy(const NetworkConfig& cfg,
                                 Strategy strategy,
                                 PolicyKind kind,
                                 std::shared_ptr<const InterferenceModel> model)
{
    const auto profile = cfg.profile();
    if (kind == PolicyKind::MostPopular)
        return most_popular_policy(profile, cfg.N_c);
    const CentreObjective obj(cfg.radio, cfg.D, cfg.d_g, std::move(model));
    const Problem pr = strategy == Strategy::Closest ? Problem::Closest : Problem::Best;
    return solve(pr, profile, cfg.N_c, obj).policy;
}

inline double analytic_network_hit(const NetworkConfig& cfg,
                                   const CachePolicy& policy,
                                   Strategy strategy,
                                   Method method,
                                   InterferenceLaw law,
                                   std::shared_ptr<const InterferenceModel> model)
{
    HitQuery q;
    q.params = cfg.radio;
    q.geom = cfg.geometry();
    q.policy = policy;
    q.profile = cfg.profile();
    q.strategy = strategy;
    q.method = method;
    q.law = law;
    q.model = std::move(model);
    return network_hit(q);
}

namespace detail {

inline bool sampler_invariant(const std::string& variable)
{
    return variable == "beta_dB" || variable == "N_c" || variable == "gamma";
}

inline double elapsed_ms(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace detail

/// Evaluate every (point, strategy, method, policy) of the sweep.
///
/// A failure at one point is recorded in that point's rows and the sweep
/// continues. Monte Carlo rows of sweeps over beta, N_c and gamma share one
/// set of realizations; other variables change the network law and get one
/// run per point. All runs use the sweep's seed.
inline HitCurve run_sweep(const NetworkConfig& base, const SweepSpec& spec, ModelCache* cache = nullptr)
{
    spec.validate();
    base.validate();
    ModelCache local;
    ModelCache& models = cache ? *cache : local;
    const bool want_mc = std::find(spec.methods.begin(), spec.methods.end(), EvalMethod::MonteCarlo) != spec.methods.end();

    struct Slot
    {
        std::size_t row;
        std::size_t request;
    };
    HitCurve curve;
    std::vector<HitRequest> shared_requests;
    std::vector<Slot> shared_slots;

    for (double v : spec.values)
    {
        std::vector<std::size_t> point_rows;
        std::vector<HitRequest> requests;
        std::vector<Slot> slots;
        NetworkConfig cfg;
        std::string error;
        std::shared_ptr<const InterferenceModel> model;
        try
        {
            cfg = apply_sweep_value(base, spec.variable, v);
            model = models.get(cfg);
        }
        catch (const std::exception& e)
        {
            error = e.what();
        }
        for (Strategy st : spec.strategies)
            for (PolicyKind pk : spec.policies)
            {
                CachePolicy policy;
                std::string policy_error = error;
                const auto t_design = std::chrono::steady_clock::now();
                if (policy_error.empty())
                {
                    try
                    {
                        policy = design_policy(cfg, st, pk, model);
                    }
                    catch (const std::exception& e)
                    {
                        policy_error = e.what();
                    }
                }
                const double design_ms = detail::elapsed_ms(t_design);
                for (EvalMethod m : spec.methods)
                {
                    HitRow row{spec.variable, v, to_string(st), to_string(m), to_string(pk), 0.0, 0.0, 0.0, spec.seed, policy_error};
                    if (!policy_error.empty())
                    {
                        row.hit = row.ci_halfwidth = std::nan("");
                        curve.rows.push_back(row);
                        continue;
                    }
                    if (m == EvalMethod::MonteCarlo)
                    {
                        HitRequest req{policy, st, {cfg.radio.beta}, cfg.profile().q};
                        if (detail::sampler_invariant(spec.variable))
                        {
                            shared_requests.push_back(std::move(req));
                            shared_slots.push_back({curve.rows.size(), shared_requests.size() - 1});
                        }
                        else
                        {
                            requests.push_back(std::move(req));
                            slots.push_back({curve.rows.size(), requests.size() - 1});
                        }
                        row.runtime_ms = design_ms;
                        curve.rows.push_back(row);
                        continue;
                    }
                    const auto t_eval = std::chrono::steady_clock::now();
                    try
                    {
                        row.hit = analytic_network_hit(cfg, policy, st,
                                                       m == EvalMethod::Exact ? Method::Exact : Method::Approximate,
                                                       spec.law, model);
                    }
                    catch (const std::exception& e)
                    {
                        row.hit = row.ci_halfwidth = std::nan("");
                        row.error = e.what();
                    }
                    row.runtime_ms = design_ms + detail::elapsed_ms(t_eval);
                    curve.rows.push_back(row);
                }
            }
        if (want_mc && !requests.empty())
        {
            const auto t_mc = std::chrono::steady_clock::now();
            SimSettings ss;
            ss.trials = spec.trials;
            ss.seed = spec.seed;
            ss.threads = spec.threads;
            try
            {
                const auto est = estimate_hits(cfg, requests, ss);
                const double share = detail::elapsed_ms(t_mc) / static_cast<double>(requests.size());
                for (const auto& s : slots)
                {
                    auto& row = curve.rows[s.row];
                    row.hit = est[s.request].front().network.estimate;
                    row.ci_halfwidth = est[s.request].front().network.half_width;
                    row.runtime_ms += share;
                }
            }
            catch (const std::exception& e)
            {
                for (const auto& s : slots)
                {
                    auto& row = curve.rows[s.row];
                    row.hit = row.ci_halfwidth = std::nan("");
                    row.error = e.what();
                }
            }
        }
    }

    if (!shared_requests.empty())
    {
        const auto t_mc = std::chrono::steady_clock::now();
        SimSettings ss;
        ss.trials = spec.trials;
        ss.seed = spec.seed;
        ss.threads = spec.threads;
        try
        {
            const auto est = estimate_hits(base, shared_requests, ss);
            const double share = detail::elapsed_ms(t_mc) / static_cast<double>(shared_requests.size());
            for (const auto& s : shared_slots)
            {
                auto& row = curve.rows[s.row];
                row.hit = est[s.request].front().network.estimate;
                row.ci_halfwidth = est[s.request].front().network.half_width;
                row.runtime_ms += share;
            }
        }
        catch (const std::exception& e)
        {
            for (const auto& s : shared_slots)
            {
                auto& row = curve.rows[s.row];
                row.hit = row.ci_halfwidth = std::nan("");
                row.error = e.what();
            }
        }
    }
    if (!spec.timing)
        for (auto& r : curve.rows)
            r.runtime_ms = 0.0;
    return curve;
}

inline const char* csv_header() { return "variable,value,strategy,method,policy,hit,ci_halfwidth,runtime_ms,seed"; }

namespace detail {

// Shortest text that parses back to the same double.
inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s)
{
    if (s == "nan")
        return std::nan("");
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("csv: bad number '" + s + "'");
    return v;
}

} // namespace detail

inline void emit_csv(const HitCurve& curve, std::ostream& out)
{
    out << csv_header() << '\n';
    for (const auto& r : curve.rows)
        out << r.variable << ',' << detail::format_double(r.value) << ',' << r.strategy << ',' << r.method << ','
            << r.policy << ',' << detail::format_double(r.hit) << ',' << detail::format_double(r.ci_halfwidth) << ','
            << detail::format_double(r.runtime_ms) << ',' << r.seed << '\n';
}

inline void emit_csv(const HitCurve& curve, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("emit_csv: cannot open '" + path + "'");
    emit_csv(curve, out);
    if (!out)
        throw std::runtime_error("emit_csv: write to '" + path + "' failed");
}

inline HitCurve read_csv(std::istream& in)
{
    HitCurve curve;
    std::string line;
    if (!std::getline(in, line) || line != csv_header())
        throw std::runtime_error("read_csv: missing or unexpected header");
    int lineno = 1;
    while (std::getline(in, line))
    {
        ++lineno;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            f.push_back(cell);
        if (f.size() != 9)
            throw std::runtime_error("read_csv: line " + std::to_string(lineno) + " has " + std::to_string(f.size())
                                     + " columns");
        HitRow r;
        r.variable = f[0];
        r.value = detail::parse_double(f[1]);
        r.strategy = f[2];
        r.method = f[3];
        r.policy = f[4];
        r.hit = detail::parse_double(f[5]);
        r.ci_halfwidth = detail::parse_double(f[6]);
        r.runtime_ms = detail::parse_double(f[7]);
        r.seed = std::stoull(f[8]);
        curve.rows.push_back(r);
    }
    return curve;
}

/// Grids of the six standard sweeps.
inline SweepSpec figure_sweep(int figure)
{
    SweepSpec s;
    switch (figure)
    {
    case 2:
        s.variable = "beta_dB";
        s.values = {0, 5, 10, 15};
        s.methods = {EvalMethod::Exact, EvalMethod::Approximate, EvalMethod::MonteCarlo};
        break;
    case 3:
        s.variable = "d";
        s.values = {0, 5, 10, 15, 20, 25, 30};
        s.policies = {PolicyKind::Optimized, PolicyKind::MostPopular};
        break;
    case 4:
        s.variable = "N_c";
        for (int n = 1; n <= 20; ++n)
            s.values.push_back(n);
        s.policies = {PolicyKind::Optimized, PolicyKind::MostPopular};
        break;
    case 5:
        s.variable = "gamma";
        s.values = {0.0, 0.35, 0.7, 1.05, 1.4};
        s.policies = {PolicyKind::Optimized, PolicyKind::MostPopular};
        break;
    case 6:
        s.variable = "M";
        s.values = {2, 4, 6, 8, 10};
        break;
    case 7:
        s.variable = "alpha";
        for (int k = 0; k <= 12; ++k)
            s.values.push_back(2.0 + 0.25 * k);
        break;
    default:
        throw std::domain_error("figure_sweep: figures 2 to 7 only");
    }
    return s;
}

} // namespace cloudcache
