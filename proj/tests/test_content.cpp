#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "cloudcache/content.hpp"

using namespace cloudcache;

TEST(Zipf, UniformAndTwoFiles)
{
    const auto u = zipf_profile(4, 0.0);
    for (double q : u.q)
        EXPECT_DOUBLE_EQ(q, 0.25);
    const auto t = zipf_profile(2, 1.0);
    EXPECT_NEAR(t.q[0], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(t.q[1], 1.0 / 3.0, 1e-15);
}

TEST(Zipf, ExtendedPrecisionOracle)
{
    // 40-digit partial sums
    const double ref[20] = {0.1827868981474484,   0.11251853424343866,  0.08471497455328314,  0.06926328241578408,
                            0.059246958454334066, 0.05214818382396564,  0.046814073754156194, 0.04263655159806187,
                            0.039262261060824234, 0.03647078095436587,  0.034116948775116056, 0.03210097259047952,
                            0.030351818491991173, 0.028817442684173133, 0.027458776469687564, 0.02624587615212307,
                            0.025155376284253385, 0.024168756680161704, 0.02327113375520538,  0.02245039911114686};
    const auto p = zipf_profile(20, 0.7);
    for (int i = 0; i < 20; ++i)
        EXPECT_NEAR(p.q[static_cast<std::size_t>(i)], ref[i], 1e-12) << "file " << i + 1;
    EXPECT_NEAR(std::accumulate(p.q.begin(), p.q.end(), 0.0), 1.0, 1e-14);
}

TEST(Zipf, RejectsBadInput)
{
    EXPECT_THROW(zipf_profile(0, 0.7), std::domain_error);
    EXPECT_THROW(zipf_profile(5, -0.1), std::domain_error);
    PopularityProfile bad;
    bad.q = {0.7, 0.2};
    EXPECT_THROW(bad.validate(), std::domain_error);
}

TEST(MostPopular, FillsTopFiles)
{
    const auto p = most_popular_policy(zipf_profile(5, 0.7), 2);
    EXPECT_EQ(p.p, (std::vector<double>{1, 1, 0, 0, 0}));
    EXPECT_EQ(most_popular_policy(zipf_profile(5, 0.7), 0).p, std::vector<double>(5, 0.0));
    EXPECT_EQ(most_popular_policy(zipf_profile(5, 0.7), 5).p, std::vector<double>(5, 1.0));
}

TEST(CachePolicy, BudgetInvariant)
{
    CachePolicy p;
    p.p = {0.5, 1.2};
    EXPECT_THROW(p.validate(), std::domain_error);
    p.p = {0.5, 0.7};
    p.N_c = 1;
    EXPECT_THROW(p.validate(), std::domain_error);
    p.N_c = 2;
    EXPECT_NO_THROW(p.validate());
}

TEST(CacheContents, ExtremesAndFrequencies)
{
    std::mt19937_64 rng(9);
    CachePolicy all;
    all.p = std::vector<double>(6, 1.0);
    all.N_c = 6;
    EXPECT_EQ(sample_cache_contents(all, rng).size(), 6u);
    CachePolicy none;
    none.p = std::vector<double>(6, 0.0);
    EXPECT_TRUE(sample_cache_contents(none, rng).empty());

    CachePolicy half;
    half.p = {0.9, 0.5, 0.1};
    half.N_c = 2;
    std::vector<int> count(3, 0);
    const int n = 200000;
    for (int k = 0; k < n; ++k)
        for (auto f : sample_cache_contents(half, rng))
            ++count[f];
    for (std::size_t i = 0; i < 3; ++i)
    {
        const double p = half.p[i];
        EXPECT_NEAR(count[i] / static_cast<double>(n), p, 4.0 * std::sqrt(p * (1 - p) / n));
    }
}
