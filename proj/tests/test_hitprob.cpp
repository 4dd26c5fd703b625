#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "cloudcache/config.hpp"
#include "cloudcache/experiments.hpp"
#include "cloudcache/hitprob.hpp"

using namespace cloudcache;
using std::numbers::pi;

namespace {

std::shared_ptr<const InterferenceModel> model()
{
    static const auto m = make_interference_model(RadioParams{}, 30.0, 2.0);
    return m;
}

HitQuery query(Strategy st, Method me, std::vector<double> p, double beta = 10.0)
{
    NetworkConfig cfg;
    HitQuery q;
    q.params = cfg.radio;
    q.params.beta = beta;
    q.geom = cfg.geometry();
    q.profile = zipf_profile(p.size(), 0.7);
    q.policy.p = std::move(p);
    q.policy.N_c = static_cast<int>(std::ceil(q.policy.load() - 1e-9));
    q.strategy = st;
    q.method = me;
    q.law = InterferenceLaw::GilPelaez;
    q.model = model();
    return q;
}

const Strategy strategies[] = {Strategy::Closest, Strategy::Best};
const Method methods[] = {Method::Exact, Method::Approximate};

} // namespace

TEST(EffectiveL, SaturatesAtM)
{
    const auto l = effective_L(RadioParams{}, 30.0);
    EXPECT_EQ(l.L, 10);
    EXPECT_NEAR(l.eta, 1.0, 1e-12);
    RadioParams sparse;
    sparse.lambda = 1e-4;
    const auto s = effective_L(sparse, 30.0);
    EXPECT_GE(s.L, 1);
    EXPECT_LT(s.L, 10);
}

TEST(CondHit, UncachedFileIsMiss)
{
    for (auto st : strategies)
        for (auto me : methods)
            EXPECT_EQ(cond_hit(1, query(st, me, {1.0, 0.0, 0.5})), 0.0) << to_string(st) << ' ' << to_string(me);
}

TEST(CondHit, TinyThresholdIsCacheExistence)
{
    for (auto st : strategies)
        for (double p : {0.02, 0.3})
        {
            const double ref = 1.0 - std::exp(-0.1 * p * pi * 900.0);
            EXPECT_NEAR(cond_hit(0, query(st, Method::Exact, {p}, 1e-6)), ref, 1e-4) << to_string(st) << " p=" << p;
        }
}

TEST(CondHit, BoundedAndIncreasingInP)
{
    for (auto st : strategies)
        for (auto me : methods)
        {
            double prev = 0.0;
            for (double p : {0.05, 0.2, 0.6, 1.0})
            {
                const double h = cond_hit(0, query(st, me, {p}));
                EXPECT_GE(h, prev - 1e-12);
                EXPECT_LE(h, 1.0);
                prev = h;
            }
        }
}

TEST(NetworkHit, Aggregation)
{
    for (auto st : strategies)
    {
        EXPECT_EQ(network_hit(query(st, Method::Exact, {0.0, 0.0, 0.0})), 0.0);
        auto one = query(st, Method::Exact, {1.0});
        EXPECT_DOUBLE_EQ(network_hit(one), cond_hit(0, one));
        auto q = query(st, Method::Exact, {1.0, 0.5, 0.25});
        const auto h = cond_hits(q);
        double w = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i)
            w += q.profile.q[i] * h[i];
        EXPECT_NEAR(network_hit(q), w, 1e-14);
    }
}

TEST(NetworkHit, BestBeatsClosestAndApproximationIsClose)
{
    for (double beta : {1.0, 10.0, 31.6})
    {
        const std::vector<double> p{1.0, 0.6, 0.3, 0.1};
        const double ce = network_hit(query(Strategy::Closest, Method::Exact, p, beta));
        const double be = network_hit(query(Strategy::Best, Method::Exact, p, beta));
        const double ca = network_hit(query(Strategy::Closest, Method::Approximate, p, beta));
        const double ba = network_hit(query(Strategy::Best, Method::Approximate, p, beta));
        EXPECT_GE(be, ce) << "beta=" << beta;
        EXPECT_LE(std::abs(ca - ce), 0.05);
        EXPECT_LE(std::abs(ba - be), 0.05);
    }
}

TEST(NetworkHit, DefaultNetworkValues)
{
    // Monte Carlo at 1e5 trials: closest 0.8275 +- 0.0023, best 0.9300 +- 0.0016
    NetworkConfig cfg;
    const auto m = model();
    const auto pc = design_policy(cfg, Strategy::Closest, PolicyKind::Optimized, m);
    const auto pb = design_policy(cfg, Strategy::Best, PolicyKind::Optimized, m);
    EXPECT_NEAR(analytic_network_hit(cfg, pc, Strategy::Closest, Method::Exact, InterferenceLaw::GilPelaez, m),
                0.82813, 1e-5);
    EXPECT_NEAR(analytic_network_hit(cfg, pb, Strategy::Best, Method::Exact, InterferenceLaw::GilPelaez, m), 0.93046,
                1e-5);
}

TEST(MaxPower, Limits)
{
    auto q = query(Strategy::Best, Method::Exact, {1.0});
    EXPECT_EQ(max_power_cdf(0.0, 10, 1, q), 0.0);
    EXPECT_NEAR(max_power_cdf(1e-12, 10, 1, q), 0.0, 1e-6);
    EXPECT_NEAR(max_power_cdf(1e9, 10, 3, q), 1.0, 1e-6);
    for (double x : {1e-4, 1e-3, 1e-2})
    {
        const double one = max_power_cdf(x, 10, 1, q);
        EXPECT_NEAR(max_power_cdf(x, 10, 2, q), one * one, 1e-14);
        EXPECT_LE(max_power_cdf(x, 7, 1, q), one + 1e-14);
    }
    EXPECT_THROW(max_power_cdf(1.0, 11, 1, q), std::domain_error);
    EXPECT_THROW(max_power_cdf(1.0, 10, 0, q), std::domain_error);
}

TEST(AlzerSum, BracketsGammaSurvival)
{
    for (double x : {0.5, 2.0, 8.0})
    {
        const double q = boost::math::gamma_q(4.0, x);
        const double eta = std::pow(std::tgamma(5.0), -0.25);
        const double upper = detail::alzer_sum(4, [&](int m) { return std::exp(-m * eta * x); });
        const double lower = detail::alzer_sum(4, [&](int m) { return std::exp(-m * x); });
        EXPECT_NEAR(upper, 1.0 - std::pow(1.0 - std::exp(-eta * x), 4), 1e-12);
        EXPECT_GT(upper, q);
        EXPECT_LT(lower, q);
    }
}
