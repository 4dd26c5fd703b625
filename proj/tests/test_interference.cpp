#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "cloudcache/interference.hpp"
#include "cloudcache/simulator.hpp"

using namespace cloudcache;

namespace {

constexpr double D = 30.0, DG = 2.0;

const InterferenceLT& table1()
{
    static const InterferenceLT ctx(RadioParams{}, D, DG);
    return ctx;
}

/// Shared interference sample at the default network.
const std::vector<double>& samples()
{
    static const std::vector<double> s = sample_interference(NetworkConfig{}, 20000, 77);
    return s;
}

} // namespace

TEST(Lt, ZeroArgument)
{
    EXPECT_DOUBLE_EQ(table1().eval(0.0), 1.0);
    EXPECT_DOUBLE_EQ(lt_inner_F(0.0, 10.0, table1()), 1.0);
    EXPECT_DOUBLE_EQ(lt_inner_E(0.0, 50.0, table1()), 1.0);
}

TEST(Lt, NoClouds)
{
    RadioParams p;
    p.lambda_p = 0.0;
    EXPECT_DOUBLE_EQ(InterferenceLT(p, D, DG).eval(1e3), 1.0);
}

TEST(Lt, SparseRusAndFarClouds)
{
    RadioParams p;
    p.lambda = 1e-12;
    const InterferenceLT ctx(p, D, DG);
    EXPECT_NEAR(lt_inner_F(100.0, 10.0, ctx), 1.0, 1e-8);
    EXPECT_NEAR(lt_inner_E(1.0, 1e6, table1()), 1.0, 1e-12);
    EXPECT_THROW(lt_inner_F(1.0, D + 1.0, table1()), std::domain_error);
    EXPECT_THROW(lt_inner_E(1.0, 1.0, table1()), std::domain_error);
}

TEST(Lt, IndependentQuadratureOracle)
{
    // tests/oracles/lt_oracle.py
    const std::pair<double, double> ref[] = {{10.0, 0.9754803975339044},
                                             {100.0, 0.8753849404728055},
                                             {1e3, 0.5968752360052463},
                                             {1e4, 0.1408955205327445}};
    for (auto [s, v] : ref)
        EXPECT_NEAR(table1().eval(s), v, 1e-7 * v) << "s=" << s;
}

TEST(Lt, MonotoneInUnitInterval)
{
    double prev = 1.0;
    for (double s = 1.0; s <= 1e6; s *= 3.0)
    {
        const double v = table1().eval(s);
        EXPECT_GT(v, 0.0);
        EXPECT_LE(v, prev);
        prev = v;
    }
}

TEST(Lt, InnerMixtureMatchesMonteCarlo)
{
    // x = D: a = min(M, Poisson(lambda G(x))) points uniform in b(x, D) outside b(o, d_g)
    const auto& ctx = table1();
    const double x = D, s = 1.0;
    const double mu = ctx.eligible_mean(x);
    std::mt19937_64 rng(21);
    std::poisson_distribution<int> pois(mu);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int k = 0; k < n; ++k)
    {
        const int a = std::min(10, pois(rng));
        double prod = 1.0;
        for (int j = 0; j < a;)
        {
            const double px = D * u(rng), py = D * u(rng);
            if (px * px + py * py > D * D)
                continue;
            const double y = std::hypot(x + px, py);
            if (y < DG)
                continue;
            prod /= 1.0 + s * std::pow(y, -3.0);
            ++j;
        }
        sum += prod;
        sum2 += prod * prod;
    }
    const double m = sum / n;
    const double se = std::sqrt((sum2 / n - m * m) / n);
    EXPECT_NEAR(lt_inner_E(s, x, ctx), m, 3.0 * se + 1e-12);
}

TEST(Lt, EvalAgreesWithSampledInterference)
{
    for (double s : {100.0, 1000.0})
    {
        const auto mc = laplace_estimate(samples(), s, 3.0);
        EXPECT_NEAR(table1().eval(s), mc.estimate, mc.half_width) << "s=" << s;
    }
}

TEST(LtDerivative, OrderZeroAndSign)
{
    const double s = 200.0;
    const auto& ctx = table1();
    EXPECT_NEAR(lt_derivative(0, s, ctx), std::exp(-s * 1e-3) * ctx.eval(s), 1e-12);
    for (int m = 1; m <= 4; ++m)
        EXPECT_GE(std::pow(-1.0, m) * lt_derivative(m, s, ctx), 0.0) << "m=" << m;
}

TEST(LtDerivative, MatchesDifferences)
{
    const auto& ctx = table1();
    const double s = 300.0, h = 1.0;
    auto f = [&](double z) { return std::exp(-z * 1e-3) * ctx.eval(z); };
    const double d1 = (f(s + h) - f(s - h)) / (2.0 * h);
    const double d2 = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
    EXPECT_NEAR(lt_derivative(1, s, ctx), d1, 1e-5 * std::abs(d1));
    EXPECT_NEAR(lt_derivative(2, s, ctx), d2, 1e-3 * std::abs(d2));
}

TEST(LtDerivative, MatchesMonteCarlo)
{
    const auto& ctx = table1();
    const double s = 500.0, n2 = 1e-3;
    for (int m = 1; m <= 3; ++m)
    {
        stats::Moments acc;
        for (double i : samples())
            acc.add(std::pow(i + n2, m) * std::exp(-s * (i + n2)));
        const double target = std::pow(-1.0, m) * lt_derivative(m, s, ctx);
        EXPECT_NEAR(target, acc.mean(), 3.0 * acc.std_error()) << "m=" << m;
    }
}

TEST(LtMoments, NoCloudsAndSampleMoments)
{
    RadioParams p;
    p.lambda_p = 0.0;
    const auto z = lt_moments(InterferenceLT(p, D, DG));
    EXPECT_EQ(z.E_I, 0.0);
    EXPECT_EQ(z.E_I2, 0.0);

    const auto mom = lt_moments(table1());
    EXPECT_GT(mom.variance(), 0.0);
    stats::Moments first;
    for (double i : samples())
        first.add(i);
    EXPECT_NEAR(mom.E_I, first.mean(), 3.0 * first.std_error());
}

TEST(GammaFit, Algebra)
{
    const auto g = gamma_fit(LtMoments{2.0, 6.0});
    EXPECT_NEAR(g.tau, 2.0, 1e-14);
    EXPECT_NEAR(g.zeta, 1.0, 1e-14);
    const auto mom = lt_moments(table1());
    const auto f = gamma_fit(mom);
    EXPECT_NEAR(f.mean(), mom.E_I, 1e-9 * mom.E_I);
    EXPECT_NEAR(f.second_moment(), mom.E_I2, 1e-6 * mom.E_I2);
    EXPECT_THROW(gamma_fit(LtMoments{1.0, 1.0}), std::domain_error);
}

TEST(GilPelaez, DensityIsProper)
{
    const GilPelaezDensity gp(table1());
    EXPECT_FALSE(gp.truncated());
    const auto& v = gp.values();
    double mass = 0.0, mean = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k)
    {
        mass += v[k] * gp.step();
        mean += v[k] * gp.step() * gp.step() * static_cast<double>(k);
    }
    EXPECT_NEAR(mass, 1.0, 1e-3);
    EXPECT_NEAR(mean, gp.mean(), 2e-2 * gp.mean());
    const double peak = *std::max_element(v.begin(), v.end());
    for (double d : v)
        EXPECT_GE(d, -1e-3 * peak);
}

TEST(GilPelaez, MatchesEmpiricalMedianMass)
{
    const GilPelaezDensity gp(table1());
    auto s = samples();
    std::sort(s.begin(), s.end());
    const double q25 = s[s.size() / 4], q75 = s[3 * s.size() / 4];
    double mass = 0.0;
    const int n = 2000;
    for (int k = 0; k < n; ++k)
    {
        const double g = q25 + (k + 0.5) * (q75 - q25) / n;
        mass += gp.pdf(g) * (q75 - q25) / n;
    }
    EXPECT_NEAR(mass, 0.5, 0.02);
}
