#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cloudcache/experiments.hpp"
#include "cloudcache/simulator.hpp"

using namespace cloudcache;

namespace {

CachePolicy full(std::size_t n)
{
    CachePolicy p;
    p.p.assign(n, 1.0);
    p.N_c = static_cast<int>(n);
    return p;
}

} // namespace

TEST(Sampler, NoCloudsNoInterferers)
{
    NetworkConfig cfg;
    cfg.radio.lambda_p = 0.0;
    std::mt19937_64 rng(1);
    const auto r = sample_realization(cfg, rng);
    EXPECT_TRUE(r.interferers.empty());
    EXPECT_EQ(r.interference, 0.0);
}

TEST(Sampler, RepresentativeCloud)
{
    NetworkConfig cfg;
    std::mt19937_64 rng(2);
    const double mean = cfg.radio.lambda * std::numbers::pi * cfg.D * cfg.D;
    stats::Moments count;
    for (int k = 0; k < 400; ++k)
    {
        const auto r = sample_realization(cfg, rng);
        count.add(static_cast<double>(r.rus.size()));
        EXPECT_EQ(r.active, std::min<int>(cfg.radio.M, static_cast<int>(r.rus.size())));
        EXPECT_EQ(r.gain.size(), r.rus.size());
        for (const auto& p : r.rus)
            EXPECT_LE(std::hypot(p.x - r.centre.x, p.y - r.centre.y), cfg.D + 1e-9);
        EXPECT_NEAR(r.centre.norm(), cfg.d, 1e-12);
        for (const auto& a : r.interferers)
            EXPECT_GE(a.pos.norm(), cfg.d_g);
    }
    EXPECT_NEAR(count.mean(), mean, 4.0 * std::sqrt(mean / 400.0));
}

TEST(Sampler, InterferenceMean)
{
    NetworkConfig cfg;
    const auto s = sample_interference(cfg, 20000, 4);
    stats::Moments m;
    for (double v : s)
        m.add(v);
    const auto mom = lt_moments(InterferenceLT(cfg.radio, cfg.D, cfg.d_g));
    EXPECT_NEAR(m.mean(), mom.E_I, 3.0 * m.std_error());
}

TEST(Hit, MissWithoutCache)
{
    NetworkConfig cfg;
    std::mt19937_64 rng(3);
    const auto r = sample_realization(cfg, rng);
    CachePolicy none;
    none.p.assign(20, 0.0);
    for (auto st : {Strategy::Closest, Strategy::Best})
    {
        EXPECT_EQ(serving_ru(r, 0, st, none, cfg.radio), -1);
        EXPECT_FALSE(simulate_hit(r, 0, st, none, cfg.radio));
    }
}

TEST(Hit, NoiselessIsolatedCloudAlwaysHits)
{
    NetworkConfig cfg;
    cfg.radio.lambda_p = 0.0;
    cfg.radio.sigma2 = 1e-300;
    cfg.radio.beta = 1e6;
    std::mt19937_64 rng(5);
    for (int k = 0; k < 50; ++k)
    {
        const auto r = sample_realization(cfg, rng);
        for (auto st : {Strategy::Closest, Strategy::Best})
            EXPECT_TRUE(simulate_hit(r, 3, st, full(20), cfg.radio));
    }
}

TEST(Hit, ServingRuChoice)
{
    NetworkConfig cfg;
    std::mt19937_64 rng(8);
    const auto r = sample_realization(cfg, rng);
    const auto pol = full(20);
    const auto c = static_cast<std::size_t>(serving_ru(r, 0, Strategy::Closest, pol, cfg.radio));
    const auto b = static_cast<std::size_t>(serving_ru(r, 0, Strategy::Best, pol, cfg.radio));
    for (std::size_t k = 0; k < r.rus.size(); ++k)
    {
        EXPECT_LE(r.rus[c].norm(), r.rus[k].norm());
        EXPECT_GE(r.gain[b] * std::pow(r.rus[b].norm(), -2.5), r.gain[k] * std::pow(r.rus[k].norm(), -2.5));
    }
    EXPECT_GE(simulate_sinr(r, 0, Strategy::Best, pol, cfg.radio), simulate_sinr(r, 0, Strategy::Closest, pol, cfg.radio));
}

TEST(Estimator, SingleTrial)
{
    NetworkConfig cfg;
    const auto pol = most_popular_policy(cfg.profile(), cfg.N_c);
    const auto e = estimate_hit(cfg, pol, Strategy::Closest, 1, 9);
    for (const auto& f : e.per_file)
        EXPECT_TRUE(f.estimate == 0.0 || f.estimate == 1.0);
}

TEST(Estimator, DeterministicAcrossThreads)
{
    NetworkConfig cfg;
    const auto pol = most_popular_policy(cfg.profile(), cfg.N_c);
    SimSettings s;
    s.trials = 3000;
    s.seed = 17;
    s.block_size = 250;
    const std::vector<HitRequest> req{{pol, Strategy::Closest, {1.0, 10.0}, {}}, {pol, Strategy::Best, {}, {}}};
    const auto a = estimate_hits(cfg, req, s);
    s.threads = 3;
    const auto b = estimate_hits(cfg, req, s);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < a[i].size(); ++j)
        {
            EXPECT_EQ(a[i][j].network.estimate, b[i][j].network.estimate);
            EXPECT_EQ(a[i][j].network.half_width, b[i][j].network.half_width);
        }
    // lower threshold never hurts on common random numbers
    EXPECT_GE(a[0][0].network.estimate, a[0][1].network.estimate);
}

TEST(Estimator, AgreesWithAnalyticHit)
{
    NetworkConfig cfg;
    const auto model = make_interference_model(cfg.radio, cfg.D, cfg.d_g);
    const auto pol = most_popular_policy(cfg.profile(), cfg.N_c);
    const double exact = analytic_network_hit(cfg, pol, Strategy::Closest, Method::Exact, InterferenceLaw::GilPelaez, model);
    const auto e = estimate_hit(cfg, pol, Strategy::Closest, 20000, 23);
    EXPECT_NEAR(e.network.estimate, exact, 1.5 * e.network.half_width);
}

TEST(Laplace, EstimatorInterval)
{
    const std::vector<double> s{0.0, 0.0, 0.0};
    const auto e = laplace_estimate(s, 5.0);
    EXPECT_EQ(e.estimate, 1.0);
    EXPECT_EQ(e.half_width, 0.0);
}

TEST(ZfGain, GammaLaw)
{
    std::mt19937_64 rng(4);
    stats::Moments m;
    for (int k = 0; k < 20000; ++k)
        m.add(sample_zf_gain(10, 1, rng));
    EXPECT_NEAR(m.mean(), 10.0, 3.0 * m.std_error());
    for (auto [M, l] : std::vector<std::pair<int, int>>{{10, 1}, {10, 10}, {10, 5}, {4, 2}})
    {
        const auto r = validate_zf_gain(M, l, 20000, 6);
        EXPECT_TRUE(r.pass) << "M=" << M << " l=" << l << " p=" << r.ks.p_value;
        EXPECT_NEAR(r.sample_mean, M - l + 1.0, 0.05 * (M - l + 1.0));
    }
}

TEST(Stats, KolmogorovSmirnovDetectsWrongLaw)
{
    std::mt19937_64 rng(12);
    std::exponential_distribution<double> e(1.0);
    std::vector<double> x(5000);
    for (auto& v : x)
        v = e(rng);
    EXPECT_GT(stats::ks_test(x, [](double t) { return t <= 0 ? 0.0 : 1.0 - std::exp(-t); }).p_value, 0.01);
    EXPECT_LT(stats::ks_test(x, [](double t) { return t <= 0 ? 0.0 : 1.0 - std::exp(-1.2 * t); }).p_value, 0.01);
    EXPECT_NEAR(stats::kolmogorov_survival(1.36), 0.049, 1e-3);
}
