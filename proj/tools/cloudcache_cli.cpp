// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// cloudcache: analytic hit probabilities, Monte Carlo estimates, cache
// placement and parameter sweeps for a clustered cloud radio network.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cloudcache.hpp"

namespace cc = cloudcache;

namespace {

const std::map<std::string, cc::Strategy> strategy_names{{"closest", cc::Strategy::Closest},
                                                         {"best", cc::Strategy::Best}};
const std::map<std::string, cc::EvalMethod> method_names{{"exact", cc::EvalMethod::Exact},
                                                         {"approx", cc::EvalMethod::Approximate},
                                                         {"mc", cc::EvalMethod::MonteCarlo}};
const std::map<std::string, cc::PolicyKind> policy_names{{"optimized", cc::PolicyKind::Optimized},
                                                         {"most_popular", cc::PolicyKind::MostPopular}};
const std::map<std::string, cc::InterferenceLaw> law_names{{"gil-pelaez", cc::InterferenceLaw::GilPelaez},
                                                           {"gamma", cc::InterferenceLaw::GammaSurrogate}};

template<class T>
std::vector<T> lookup(const std::vector<std::string>& keys, const std::map<std::string, T>& table)
{
    std::vector<T> out;
    for (const auto& k : keys)
        out.push_back(table.at(k));
    return out;
}

template<class T>
std::vector<std::string> keys_of(const std::map<std::string, T>& table)
{
    std::vector<std::string> k;
    for (const auto& [name, v] : table)
        k.push_back(name);
    return k;
}

struct Common
{
    std::string config;
    std::string out;
    std::uint64_t seed = 1;
    std::uint64_t trials = 100000;
    int threads = 1;
    bool timing = false;

    cc::NetworkConfig network() const
    {
        cc::NetworkConfig cfg = config.empty() ? cc::NetworkConfig{} : cc::load_config(config);
        cfg.validate();
        return cfg;
    }
};

/// Writes to --out when given, otherwise stdout.
class Output
{
  public:
    explicit Output(const std::string& path)
    {
        if (!path.empty())
        {
            file_.open(path, std::ios::binary);
            if (!file_)
                throw std::runtime_error("cannot open '" + path + "' for writing");
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

  private:
    std::ofstream file_;
};

void print_policy(std::ostream& o, const cc::CachePolicy& p)
{
    for (std::size_t i = 0; i < p.size(); ++i)
        o << (i ? "," : "") << cc::detail::format_double(p.p[i]);
    o << '\n';
}

int run_analytic(const Common& c, const std::vector<std::string>& strategies, const std::string& method,
                 const std::string& policy, const std::string& law)
{
    const auto cfg = c.network();
    cc::ModelCache models;
    const auto model = models.get(cfg);
    Output out(c.out);
    auto& o = out.stream();
    o << "strategy,method,policy,file,q,p,hit\n";
    const auto profile = cfg.profile();
    for (auto st : lookup(strategies, strategy_names))
    {
        const auto pol = cc::design_policy(cfg, st, policy_names.at(policy), model);
        cc::HitQuery q;
        q.params = cfg.radio;
        q.geom = cfg.geometry();
        q.policy = pol;
        q.profile = profile;
        q.strategy = st;
        q.method = method == "exact" ? cc::Method::Exact : cc::Method::Approximate;
        q.law = law_names.at(law);
        q.model = model;
        const auto h = cc::cond_hits(q);
        double total = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i)
        {
            total += profile.q[i] * h[i];
            o << cc::to_string(st) << ',' << method << ',' << policy << ',' << i + 1 << ','
              << cc::detail::format_double(profile.q[i]) << ',' << cc::detail::format_double(pol.p[i]) << ','
              << cc::detail::format_double(h[i]) << '\n';
        }
        o << cc::to_string(st) << ',' << method << ',' << policy << ",all,1,"
          << cc::detail::format_double(pol.load()) << ',' << cc::detail::format_double(total) << '\n';
    }
    return 0;
}

int run_simulate(const Common& c, const std::vector<std::string>& strategies, const std::string& policy)
{
    const auto cfg = c.network();
    cc::ModelCache models;
    std::vector<cc::HitRequest> req;
    for (auto st : lookup(strategies, strategy_names))
    {
        cc::HitRequest r;
        r.strategy = st;
        r.policy = cc::design_policy(cfg, st, policy_names.at(policy), models.get(cfg));
        req.push_back(std::move(r));
    }
    cc::SimSettings s;
    s.trials = c.trials;
    s.seed = c.seed;
    s.threads = c.threads;
    const auto est = cc::estimate_hits(cfg, req, s);
    Output out(c.out);
    auto& o = out.stream();
    o << "strategy,policy,hit,ci_halfwidth,trials,seed\n";
    for (const auto& per_request : est)
        for (const auto& e : per_request)
            o << cc::to_string(e.strategy) << ',' << policy << ',' << cc::detail::format_double(e.network.estimate)
              << ',' << cc::detail::format_double(e.network.half_width) << ',' << e.network.trials << ','
              << e.network.seed << '\n';
    return 0;
}

int run_optimize(const Common& c, const std::vector<int>& problems)
{
    const auto cfg = c.network();
    cc::ModelCache models;
    const cc::CentreObjective obj(cfg.radio, cfg.D, cfg.d_g, models.get(cfg));
    const auto profile = cfg.profile();
    Output out(c.out);
    auto& o = out.stream();
    int status = 0;
    for (int pr : problems)
    {
        cc::OptimizerReport rep;
        try
        {
            rep = cc::solve(static_cast<cc::Problem>(pr), profile, cfg.N_c, obj);
        }
        catch (const cc::OptimizerError& e)
        {
            std::cerr << "optimize: " << e.what() << '\n';
            rep = e.best();
            status = 3;
        }
        o << "# " << cc::to_string(rep.problem) << " objective " << cc::detail::format_double(rep.objective)
          << " multiplier " << cc::detail::format_double(rep.multiplier) << " kkt "
          << cc::detail::format_double(rep.kkt_residual) << " iterations " << rep.iterations
          << (rep.converged ? "" : " (not converged)") << '\n';
        print_policy(o, rep.policy);
    }
    return status;
}

std::vector<double> parse_values(const std::string& text)
{
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        v.push_back(cc::detail::parse_double(item));
    return v;
}

int run_sweep_cmd(const Common& c, int figure, const std::string& variable, const std::string& values,
                  const std::vector<std::string>& strategies, const std::vector<std::string>& methods,
                  const std::vector<std::string>& policies, const std::string& law)
{
    const auto cfg = c.network();
    cc::SweepSpec spec;
    if (figure != 0)
        spec = cc::figure_sweep(figure);
    else
    {
        if (variable.empty() || values.empty())
            throw CLI::ValidationError("sweep", "give --figure or both --variable and --values");
        spec.variable = variable;
        spec.values = parse_values(values);
    }
    if (!strategies.empty())
        spec.strategies = lookup(strategies, strategy_names);
    if (!methods.empty())
        spec.methods = lookup(methods, method_names);
    if (!policies.empty())
        spec.policies = lookup(policies, policy_names);
    spec.law = law_names.at(law);
    spec.trials = c.trials;
    spec.seed = c.seed;
    spec.threads = c.threads;
    spec.timing = c.timing;
    const auto curve = cc::run_sweep(cfg, spec);
    Output out(c.out);
    cc::emit_csv(curve, out.stream());
    for (const auto& r : curve.rows)
        if (!r.error.empty())
            std::cerr << "sweep: " << r.variable << '=' << r.value << ' ' << r.strategy << ' ' << r.method << ' '
                      << r.policy << ": " << r.error << '\n';
    return curve.failures() ? 2 : 0;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Runs this executable's sweep twice and compares the files.
std::string cli_rerun(const std::string& exe, std::uint64_t seed)
{
    const std::string base = "cloudcache_determinism_" + std::to_string(seed);
    std::string texts[2];
    for (int k = 0; k < 2; ++k)
    {
        const std::string path = base + "_" + std::to_string(k) + ".csv";
        const std::string cmd = "\"" + exe + "\" sweep --variable beta_dB --values 5,10 --methods exact,mc --trials 2000"
                                + " --seed " + std::to_string(seed) + " --out " + path;
        if (std::system(cmd.c_str()) != 0)
            return "CLI sweep failed";
        texts[k] = slurp(path);
        std::remove(path.c_str());
    }
    if (texts[0].empty())
        return "CLI sweep wrote nothing";
    return texts[0] == texts[1] ? "" : "CLI reruns differ";
}

int run_validate(const Common& c, const std::vector<int>& only, const std::string& cli, bool verbose)
{
    cc::validation::Options opt;
    opt.cfg = c.network();
    opt.trials = c.trials;
    opt.seed = c.seed;
    opt.threads = c.threads;
    opt.log = verbose ? &std::cout : nullptr;
    cc::validation::Suite suite(opt);
    auto checks = cc::validation::all_checks();
    if (!cli.empty())
        checks[12] = [&](cc::validation::Suite& s) {
            return cc::validation::check_determinism(s, [&] { return cli_rerun(cli, c.seed); });
        };
    int failed = 0;
    for (std::size_t k = 0; k < checks.size(); ++k)
    {
        const int id = static_cast<int>(k) + 1;
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end())
            continue;
        const auto r = cc::validation::run_check(checks[k], suite, id);
        std::cout << cc::validation::format_result(r) << std::endl;
        failed += r.pass ? 0 : 1;
    }
    std::cout << (failed ? std::to_string(failed) + " check(s) failed" : "all checks passed") << std::endl;
    return failed ? 1 : 0;
}

void add_common(CLI::App* sub, Common& c, bool trials)
{
    sub->add_option("--config", c.config, "INI file with [radio], [geometry], [content]")->check(CLI::ExistingFile);
    sub->add_option("--out", c.out, "output file (default stdout)");
    if (trials)
    {
        sub->add_option("--seed", c.seed, "random seed");
        sub->add_option("--trials", c.trials, "Monte Carlo realizations")->check(CLI::PositiveNumber);
        sub->add_option("--threads", c.threads, "worker threads")->check(CLI::PositiveNumber);
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"hit probability analysis and cache placement for clustered cloud radio networks"};
    app.require_subcommand(1);
    Common c;

    std::vector<std::string> strategies{"closest", "best"};
    std::string method = "exact", policy = "optimized", law = "gil-pelaez";

    auto* analytic = app.add_subcommand("analytic", "per-file and network hit probability");
    add_common(analytic, c, false);
    analytic->add_option("--strategy", strategies, "closest, best")->check(CLI::IsMember(keys_of(strategy_names)));
    analytic->add_option("--method", method, "exact or approx")->check(CLI::IsMember({"exact", "approx"}));
    analytic->add_option("--policy", policy)->check(CLI::IsMember(keys_of(policy_names)));
    analytic->add_option("--law", law, "interference law for best/exact")->check(CLI::IsMember(keys_of(law_names)));

    auto* simulate = app.add_subcommand("simulate", "Monte Carlo network hit probability");
    add_common(simulate, c, true);
    simulate->add_option("--strategy", strategies)->check(CLI::IsMember(keys_of(strategy_names)));
    simulate->add_option("--policy", policy)->check(CLI::IsMember(keys_of(policy_names)));

    std::vector<int> problems{1, 2};
    auto* optimize = app.add_subcommand("optimize", "cache placement at the cloud centre");
    add_common(optimize, c, false);
    optimize->add_option("--problem", problems, "1 (closest) or 2 (best)")->check(CLI::Range(1, 2));

    int figure = 0;
    std::string variable, values;
    std::vector<std::string> sweep_strategies, methods, policies;
    auto* sweep = app.add_subcommand("sweep", "hit probability over a parameter grid, CSV");
    add_common(sweep, c, true);
    sweep->add_option("--figure", figure, "preset grid 2..7")->check(CLI::Range(2, 7));
    sweep->add_option("--variable", variable)->check(CLI::IsMember(cc::sweep_variables()));
    sweep->add_option("--values", values, "comma separated, ascending");
    sweep->add_option("--strategies", sweep_strategies)->delimiter(',')->check(CLI::IsMember(keys_of(strategy_names)));
    sweep->add_option("--methods", methods)->delimiter(',')->check(CLI::IsMember(keys_of(method_names)));
    sweep->add_option("--policies", policies)->delimiter(',')->check(CLI::IsMember(keys_of(policy_names)));
    sweep->add_option("--law", law)->check(CLI::IsMember(keys_of(law_names)));
    sweep->add_flag("--timing", c.timing, "fill runtime_ms (output is then not reproducible)");

    std::vector<int> only;
    std::string cli;
    bool verbose = false;
    auto* validate = app.add_subcommand("validate", "acceptance checks, one line per check");
    add_common(validate, c, true);
    validate->add_option("--only", only, "check numbers to run")->delimiter(',')->check(CLI::Range(1, 13));
    validate->add_option("--cli", cli, "also rerun this executable for the determinism check");
    validate->add_flag("-v,--verbose", verbose);

    CLI11_PARSE(app, argc, argv);

    try
    {
        if (*analytic)
            return run_analytic(c, strategies, method, policy, law);
        if (*simulate)
            return run_simulate(c, strategies, policy);
        if (*optimize)
            return run_optimize(c, problems);
        if (*sweep)
            return run_sweep_cmd(c, figure, variable, values, sweep_strategies, methods, policies, law);
        if (*validate)
            return run_validate(c, only, cli, verbose);
    }
    catch (const CLI::Error& e)
    {
        return app.exit(e);
    }
    catch (const std::exception& e)
    {
        std::cerr << "cloudcache: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
