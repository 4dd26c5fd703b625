#include <cmath>
#include <complex>
#include <numbers>

#include <gtest/gtest.h>

#include "cloudcache/quadrature.hpp"

using namespace cloudcache;

TEST(Quadrature, PolynomialIsExact)
{
    const auto r = quad::integrate_finite([](double x) { return 3.0 * x * x; }, 0.0, 2.0);
    EXPECT_NEAR(r.value, 8.0, 1e-13);
    EXPECT_TRUE(r.converged);
}

TEST(Quadrature, KinkNeedsBreakpoint)
{
    quad::QuadSpec spec;
    spec.rel_tol = 1e-12;
    const auto r = quad::integrate_finite([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, spec, {0.3});
    EXPECT_NEAR(r.value, 0.5 * (0.09 + 0.49), 1e-13);
}

TEST(Quadrature, SquareRootEndpoint)
{
    quad::QuadSpec spec;
    spec.rel_tol = 1e-10;
    const auto r = quad::integrate_finite([](double x) { return std::sqrt(1.0 - x * x); }, -1.0, 1.0, spec);
    EXPECT_NEAR(r.value, std::numbers::pi / 2.0, 1e-9);
}

TEST(Quadrature, SemiInfinite)
{
    const auto r = quad::integrate_semi_infinite([](double x) { return std::exp(-x); }, 1.0);
    EXPECT_NEAR(r.value, std::exp(-1.0), 1e-12);
    const auto p = quad::integrate_semi_infinite([](double x) { return 1.0 / (x * x * x); }, 2.0, {}, {5.0});
    EXPECT_NEAR(p.value, 0.125, 1e-12);
}

TEST(Quadrature, ComplexAndVectorValues)
{
    const auto c = quad::integrate_finite([](double x) { return std::exp(std::complex<double>(0.0, x)); }, 0.0,
                                          std::numbers::pi);
    EXPECT_NEAR(c.value.real(), 0.0, 1e-12);
    EXPECT_NEAR(c.value.imag(), 2.0, 1e-12);
    const auto v = quad::integrate_finite([](double x) { return std::vector<double>{1.0, x, x * x}; }, 0.0, 1.0);
    ASSERT_EQ(v.value.size(), 3u);
    EXPECT_NEAR(v.value[1], 0.5, 1e-14);
    EXPECT_NEAR(v.value[2], 1.0 / 3.0, 1e-14);
}

TEST(Quadrature, FailureCarriesTolerance)
{
    quad::QuadSpec spec;
    spec.rel_tol = 1e-15;
    spec.abs_tol = 0.0;
    spec.max_subdivisions = 3;
    try
    {
        quad::integrate_finite([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, spec);
        FAIL() << "expected QuadratureError";
    }
    catch (const quad::QuadratureError& e)
    {
        EXPECT_GT(e.achieved(), e.requested());
    }
    spec.throw_on_failure = false;
    EXPECT_FALSE(quad::integrate_finite([](double x) { return std::sin(1.0 / (x + 1e-3)); }, 0.0, 1.0, spec).converged);
}

TEST(Bisect, FindsRoot)
{
    EXPECT_NEAR(quad::bisect([](double x) { return x * x - 2.0; }, 0.0, 2.0, 1e-14), std::numbers::sqrt2, 1e-12);
    EXPECT_DOUBLE_EQ(quad::bisect([](double x) { return x - 1.0; }, 1.0, 3.0, 1e-12), 1.0);
}

TEST(Bisect, RejectsBadBracket)
{
    EXPECT_THROW(quad::bisect([](double x) { return x * x + 1.0; }, -1.0, 1.0, 1e-12), quad::BracketError);
}
