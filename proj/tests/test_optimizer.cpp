#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "cloudcache/config.hpp"
#include "cloudcache/hitprob.hpp"
#include "cloudcache/optimizer.hpp"

using namespace cloudcache;

namespace {

const CentreObjective& objective()
{
    static const CentreObjective obj(RadioParams{}, 30.0, 2.0);
    return obj;
}

const Problem problems[] = {Problem::Closest, Problem::Best};

} // namespace

TEST(CentreObjective, MatchesApproximateHitAtCentre)
{
    const auto& obj = objective();
    for (auto [pr, st] : {std::pair{Problem::Closest, Strategy::Closest}, std::pair{Problem::Best, Strategy::Best}})
        for (double p : {0.05, 0.4, 1.0})
        {
            HitQuery q;
            q.geom = CloudGeometry{30.0, 2.0, 0.0};
            q.policy.p = {p};
            q.policy.N_c = 1;
            q.profile = PopularityProfile::uniform(1);
            q.strategy = st;
            q.method = Method::Approximate;
            q.model = obj.model();
            EXPECT_NEAR(obj.value(pr, p), cond_hit(0, q), 1e-9) << to_string(pr) << " p=" << p;
        }
}

TEST(CentreObjective, DerivativesAndConcavity)
{
    const auto& obj = objective();
    for (auto pr : problems)
        for (double p : {0.1, 0.5, 0.9})
        {
            const double h = 1e-5;
            const double d1 = (obj.value(pr, p + h) - obj.value(pr, p - h)) / (2 * h);
            const double d2 = (obj.derivative(pr, p + h) - obj.derivative(pr, p - h)) / (2 * h);
            EXPECT_NEAR(obj.derivative(pr, p), d1, 1e-6 * std::abs(d1) + 1e-10);
            EXPECT_NEAR(obj.second_derivative(pr, p), d2, 1e-5 * std::abs(d2) + 1e-9);
            EXPECT_GT(obj.derivative(pr, p), 0.0);
            EXPECT_LT(obj.second_derivative(pr, p), 0.0);
        }
    EXPECT_NEAR(obj.C(), 8.125699, 1e-6);
}

TEST(Solver, UniformPopularity)
{
    const auto prof = PopularityProfile::uniform(20);
    for (auto pr : problems)
    {
        const auto r = solve(pr, prof, 7, objective());
        for (double p : r.policy.p)
            EXPECT_NEAR(p, 0.35, 1e-9);
    }
}

TEST(Solver, SaturatedAndEmptyBudget)
{
    const auto prof = zipf_profile(20, 0.7);
    for (auto pr : problems)
    {
        for (double p : solve(pr, prof, 20, objective()).policy.p)
            EXPECT_EQ(p, 1.0);
        for (double p : solve(pr, prof, 0, objective()).policy.p)
            EXPECT_EQ(p, 0.0);
    }
    EXPECT_THROW(solve(Problem::Best, prof, 21, objective()), std::domain_error);
}

TEST(Solver, DefaultNetwork)
{
    const auto prof = zipf_profile(20, 0.7);
    const auto p1 = solve_problem1(prof, 10, objective());
    const auto p2 = solve_problem2(prof, 10, objective());
    EXPECT_TRUE(p1.converged);
    EXPECT_TRUE(p2.converged);
    EXPECT_NEAR(p1.objective, 0.8281251776, 1e-8);
    EXPECT_NEAR(p2.objective, 0.9857114675, 1e-8);
    EXPECT_LE(p1.kkt_residual, 1e-8);
    for (const auto* r : {&p1, &p2})
    {
        EXPECT_NEAR(r->policy.load(), 10.0, 1e-9);
        EXPECT_TRUE(std::is_sorted(r->policy.p.rbegin(), r->policy.p.rend()));
        // beats the most popular placement
        const auto mp = most_popular_policy(prof, 10);
        EXPECT_GT(r->objective, objective().total(r->problem, prof, mp.p));
    }
}

TEST(Solver, GridOracleThreeFiles)
{
    const auto prof = zipf_profile(3, 0.7);
    for (auto pr : problems)
    {
        const auto g = grid_search_three(pr, prof, 1, objective(), 1e-3);
        const auto s = solve(pr, prof, 1, objective());
        EXPECT_GE(s.objective, g.objective - 1e-9);
        EXPECT_LE(s.objective - g.objective, 1e-3);
    }
}

TEST(Solver, ClosedFormMatchesProjectedGradient)
{
    for (double gamma : {0.3, 0.7, 1.4})
    {
        const auto prof = zipf_profile(20, gamma);
        for (auto pr : problems)
        {
            const auto a = solve(pr, prof, 6, objective());
            const auto b = solve_projected_gradient(pr, prof, 6, objective());
            EXPECT_NEAR(a.objective, b.objective, 1e-6) << "gamma=" << gamma;
        }
    }
}

TEST(Solver, GapFormulaAndLargeCLimit)
{
    const auto prof = zipf_profile(20, 0.7);
    const auto r = solve_problem2(prof, 10, objective());
    const auto g = policy_gap_diagnostic(r, prof, objective().C());
    EXPECT_GT(g.interior_pairs, 0);
    EXPECT_LE(g.max_error, 1e-9);

    // denser clouds make C large and the policy flat
    RadioParams dense;
    dense.lambda = 2.0;
    const CentreObjective big(dense, 30.0, 2.0);
    const auto f = solve_problem2(prof, 10, big);
    const double spread = f.policy.p.front() - f.policy.p.back();
    EXPECT_NEAR(spread, std::log(prof.q.front() / prof.q.back()) / big.C(), 1e-9);
    EXPECT_LT(spread, 0.05);
}

TEST(Projection, CappedSimplex)
{
    const auto p = project_capped_simplex({0.9, 1.7, -0.3, 0.2}, 2.0);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 2.0, 1e-12);
    for (double v : p)
    {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
    EXPECT_EQ(p[1], 1.0);
    EXPECT_EQ(p[2], 0.0);
}

TEST(Concavity, RandomPolicies)
{
    const auto prof = zipf_profile(20, 0.7);
    for (auto pr : problems)
    {
        const auto r = check_concavity(pr, prof, 10, objective(), 20, 3);
        EXPECT_TRUE(r.pass) << to_string(pr) << ' ' << r.max_second_difference;
        EXPECT_LT(r.max_second_difference, 0.0);
    }
}
