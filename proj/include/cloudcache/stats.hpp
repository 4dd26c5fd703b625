// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// Goodness-of-fit helpers for the Monte Carlo checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

namespace cloudcache::stats {

/// Limiting Kolmogorov survival function Q(t) = 2 sum (-1)^{k-1} exp(-2 k^2 t^2).
inline double kolmogorov_survival(double t)
{
    if (t <= 0.0)
        return 1.0;
    if (t < 0.2)
        return 1.0;
    double acc = 0.0;
    for (int k = 1; k <= 100; ++k)
    {
        const double term = std::exp(-2.0 * k * k * t * t);
        acc += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-17)
            break;
    }
    return std::clamp(acc, 0.0, 1.0);
}

struct KsResult
{
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
};

/// One-sample Kolmogorov-Smirnov test; p-value from the limiting law with
/// Stephens' finite-n correction.
template<class Cdf>
KsResult ks_test(std::vector<double> samples, Cdf&& cdf)
{
    if (samples.empty())
        throw std::domain_error("ks_test: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i)
    {
        const double F = cdf(samples[i]);
        d = std::max({d, F - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - F});
    }
    const double sn = std::sqrt(n);
    return {d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d), samples.size()};
}

struct ChiSquareResult
{
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
};

/// Pearson chi-square of observed counts against expected counts. Adjacent
/// cells are pooled from both ends until every expected count is >= min_expected.
inline ChiSquareResult chi_square_test(const std::vector<double>& observed,
                                       const std::vector<double>& expected,
                                       int fitted_parameters = 0,
                                       double min_expected = 5.0)
{
    if (observed.size() != expected.size() || observed.empty())
        throw std::domain_error("chi_square_test: size mismatch");
    std::vector<double> o, e;
    double co = 0.0, ce = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i)
    {
        co += observed[i];
        ce += expected[i];
        if (ce >= min_expected)
        {
            o.push_back(co);
            e.push_back(ce);
            co = ce = 0.0;
        }
    }
    if (ce > 0.0 || co > 0.0)
    {
        if (e.empty())
        {
            o.push_back(co);
            e.push_back(ce);
        }
        else
        {
            o.back() += co;
            e.back() += ce;
        }
    }
    ChiSquareResult r;
    for (std::size_t i = 0; i < o.size(); ++i)
        r.statistic += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
    r.dof = static_cast<int>(o.size()) - 1 - fitted_parameters;
    if (r.dof < 1)
        return r;
    r.p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(r.dof), r.statistic));
    return r;
}

/// Normal-approximation 95% half width of a binomial proportion.
inline double binomial_half_width(double p_hat, double trials)
{
    return 1.96 * std::sqrt(std::max(0.0, p_hat * (1.0 - p_hat)) / trials);
}

/// Running mean and variance.
struct Moments
{
    double n = 0.0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double v)
    {
        n += 1.0;
        sum += v;
        sum_sq += v * v;
    }

    void merge(const Moments& o)
    {
        n += o.n;
        sum += o.sum;
        sum_sq += o.sum_sq;
    }

    double mean() const { return n > 0.0 ? sum / n : 0.0; }
    double variance() const { return n > 1.0 ? std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0)) : 0.0; }
    double std_error() const { return n > 0.0 ? std::sqrt(variance() / n) : 0.0; }
};

} // namespace cloudcache::stats
