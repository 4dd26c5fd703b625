// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// Request popularity and probabilistic cache placement.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace cloudcache {

/// Request probabilities q_1 >= ... >= q_N summing to one.
struct PopularityProfile
{
    std::vector<double> q;
    double gamma = std::numeric_limits<double>::quiet_NaN(); // Zipf skewness when generated

    std::size_t size() const { return q.size(); }

    void validate() const
    {
        if (q.empty())
            throw std::domain_error("PopularityProfile: empty library");
        double sum = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i)
        {
            if (!(q[i] >= 0.0))
                throw std::domain_error("PopularityProfile: negative request probability");
            if (i > 0 && q[i] > q[i - 1] * (1.0 + 1e-12))
                throw std::domain_error("PopularityProfile: probabilities must be nonincreasing");
            sum += q[i];
        }
        if (std::abs(sum - 1.0) > 1e-12 * static_cast<double>(q.size()))
        {
            std::ostringstream msg;
            msg << "PopularityProfile: probabilities sum to " << sum;
            throw std::domain_error(msg.str());
        }
    }

    static PopularityProfile uniform(std::size_t n)
    {
        if (n == 0)
            throw std::domain_error("PopularityProfile::uniform: n must be >= 1");
        return PopularityProfile{std::vector<double>(n, 1.0 / static_cast<double>(n)), 0.0};
    }
};

/// Per-file cache probabilities with memory budget sum(p) <= N_c.
struct CachePolicy
{
    std::vector<double> p;
    int N_c = 0;

    std::size_t size() const { return p.size(); }

    double load() const { return std::accumulate(p.begin(), p.end(), 0.0); }

    void validate() const
    {
        for (double v : p)
            if (!(v >= 0.0 && v <= 1.0))
                throw std::domain_error("CachePolicy: cache probabilities must lie in [0, 1]");
        if (load() > N_c + 1e-9)
        {
            std::ostringstream msg;
            msg << "CachePolicy: sum of cache probabilities " << load() << " exceeds memory " << N_c;
            throw std::domain_error(msg.str());
        }
    }
};

/// q_i = i^-gamma / sum_j j^-gamma.
inline PopularityProfile zipf_profile(std::size_t N, double gamma)
{
    if (N == 0)
        throw std::domain_error("zipf_profile: library size must be >= 1");
    if (!(gamma >= 0.0) || !std::isfinite(gamma))
        throw std::domain_error("zipf_profile: gamma must be finite and >= 0");
    std::vector<double> q(N);
    for (std::size_t i = 0; i < N; ++i)
        q[i] = std::pow(static_cast<double>(i + 1), -gamma);
    // Summing from the smallest terms keeps the normaliser accurate.
    double norm = 0.0;
    for (std::size_t i = N; i-- > 0;)
        norm += q[i];
    for (double& v : q)
        v /= norm;
    return PopularityProfile{std::move(q), gamma};
}

/// Greedy benchmark: cache the N_c most requested files everywhere.
inline CachePolicy most_popular_policy(const PopularityProfile& profile, int N_c)
{
    if (N_c < 0 || static_cast<std::size_t>(N_c) > profile.size())
    {
        std::ostringstream msg;
        msg << "most_popular_policy: memory size " << N_c << " not in [0, " << profile.size() << "]";
        throw std::domain_error(msg.str());
    }
    CachePolicy policy{std::vector<double>(profile.size(), 0.0), N_c};
    for (int i = 0; i < N_c; ++i)
        policy.p[static_cast<std::size_t>(i)] = 1.0;
    return policy;
}

/// Independent Bernoulli(p_i) draw per file for one radio unit.
template<class Rng>
std::vector<std::size_t> sample_cache_contents(const CachePolicy& policy, Rng& rng)
{
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<std::size_t> files;
    for (std::size_t i = 0; i < policy.p.size(); ++i)
        if (unif(rng) < policy.p[i])
            files.push_back(i);
    return files;
}

} // namespace cloudcache
