// Copyright 2026 The cloudcache Authors
// SPDX-License-Identifier: Apache-2.0
//
// Monte Carlo reference for the cloud caching model.
//
// One trial draws the user's cloud (RU positions, effective gains, cache
// contents) and the active RUs of every other cloud in a window of radius
// R_w around the user. Clouds beyond R_w enter through their mean
// interference, a constant added to every draw.

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "cloudcache/config.hpp"
#include "cloudcache/content.hpp"
#include "cloudcache/geometry.hpp"
#include "cloudcache/hitprob.hpp"
#include "cloudcache/quadrature.hpp"
#include "cloudcache/stats.hpp"

namespace cloudcache {

struct SimSettings
{
    std::uint64_t trials = 100000;
    std::uint64_t seed = 1;
    int threads = 1;
    std::uint64_t block_size = 1000;
    double window_factor = 40.0; // R_w = window_factor * D + d_g
    bool tail_correction = true;
};

struct Point
{
    double x = 0.0;
    double y = 0.0;
    double norm() const { return std::hypot(x, y); }
};

struct ActiveRu
{
    Point pos;
    double fading = 1.0;
};

struct NetworkRealization
{
    Point centre;                 // user's cloud centre, user at the origin
    std::vector<Point> rus;       // RUs of the user's cloud
    std::vector<double> gain;     // effective ZF gain per RU
    int active = 0;               // l = min(M, #RUs)
    std::uint64_t cache_key = 0;  // seeds the per-(RU, file) cache draws
    std::vector<Point> interferer_centres;
    std::vector<ActiveRu> interferers;
    double tail = 0.0;            // mean interference of clouds outside the window
    double interference = 0.0;    // I_o including tail

    /// Uniform draw behind the cache decision of RU `ru` for file `file`.
    double cache_uniform(std::size_t ru, std::size_t file) const
    {
        return detail_hash_uniform(cache_key, (static_cast<std::uint64_t>(ru) << 20) ^ file);
    }

    bool caches(std::size_t ru, std::size_t file, const CachePolicy& policy) const
    {
        return cache_uniform(ru, file) < policy.p[file];
    }

    std::vector<std::size_t> cached_files(std::size_t ru, const CachePolicy& policy) const
    {
        std::vector<std::size_t> out;
        for (std::size_t i = 0; i < policy.size(); ++i)
            if (caches(ru, i, policy))
                out.push_back(i);
        return out;
    }

    static std::uint64_t splitmix64(std::uint64_t z)
    {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static double detail_hash_uniform(std::uint64_t key, std::uint64_t index)
    {
        const std::uint64_t h = splitmix64(key ^ splitmix64(index));
        return static_cast<double>(h >> 11) * 0x1.0p-53;
    }
};

struct EstimatorResult
{
    double estimate = 0.0;
    double half_width = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline double window_radius(const NetworkConfig& cfg, const SimSettings& s)
{
    return s.window_factor * cfg.D + cfg.d_g;
}

/// E[min(M, Poisson(mu))].
inline double mean_active(int M, double mu)
{
    double acc = 0.0;
    double pj = std::exp(-mu);
    for (int j = 1; j < M; ++j)
    {
        pj *= mu / j;
        acc += j * pj;
    }
    return acc + M * boost::math::gamma_p(static_cast<double>(M), mu);
}

/// Mean interference from clouds centred beyond R_w.
inline double tail_interference(const NetworkConfig& cfg, double Rw)
{
    const RadioParams& r = cfg.radio;
    if (r.lambda_p == 0.0)
        return 0.0;
    quad::QuadSpec spec;
    spec.rel_tol = 1e-10;
    spec.abs_tol = 1e-300;
    auto per_cloud = [&](double x) {
        const CloudGeometry g{cfg.D, cfg.d_g, x};
        const double mu = r.lambda * guard_excluded_area(x, g);
        const double ey = integrate_distance_law<double>(
            g, [&](double y) { return std::pow(y, -r.alpha_o); }, cfg.d_g, spec);
        const double norm = guard_excluded_area(x, g) / (std::numbers::pi * cfg.D * cfg.D);
        return mean_active(r.M, mu) * r.P * ey / norm * x;
    };
    return 2.0 * std::numbers::pi * r.lambda_p * quad::integrate_semi_infinite(per_cloud, Rw, spec).value;
}

// 53-bit uniform on [0, 1); cheaper than std::generate_canonical in libstdc++.
inline double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double unit_exponential(std::mt19937_64& rng)
{
    return -std::log(static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53);
}

inline Point uniform_in_disk(double cx, double cy, double R, std::mt19937_64& rng)
{
    const double rad = R * std::sqrt(unit(rng));
    const double th = 2.0 * std::numbers::pi * unit(rng);
    return {cx + rad * std::cos(th), cy + rad * std::sin(th)};
}

} // namespace detail

/// Reusable sampler; holds the window and the tail constant for one config.
class NetworkSampler
{
  public:
    NetworkSampler(NetworkConfig cfg, SimSettings settings = {}) : cfg_(std::move(cfg)), settings_(settings)
    {
        cfg_.validate();
        Rw_ = detail::window_radius(cfg_, settings_);
        tail_ = settings_.tail_correction ? detail::tail_interference(cfg_, Rw_) : 0.0;
        // CDF of min(M, Poisson) for clouds clear of the guard disk
        const double mu = cfg_.radio.lambda * std::numbers::pi * cfg_.D * cfg_.D;
        double pj = std::exp(-mu);
        double acc = 0.0;
        for (int j = 0; j < cfg_.radio.M; ++j)
        {
            if (j > 0)
                pj *= mu / j;
            acc += pj;
            full_cdf_.push_back(acc);
        }
    }

    const NetworkConfig& config() const { return cfg_; }
    double window() const { return Rw_; }
    double tail() const { return tail_; }

    /// Active RUs of the other clouds and their aggregate power at the origin.
    void sample_interferers(std::mt19937_64& rng, NetworkRealization& out) const
    {
        const RadioParams& r = cfg_.radio;
        const double D = cfg_.D;
        const double dg = cfg_.d_g;
        out.interferer_centres.clear();
        out.interferers.clear();
        double I = 0.0;
        if (r.lambda_p > 0.0)
        {
            auto u = [&](std::mt19937_64& g) { return detail::unit(g); };
            std::poisson_distribution<long> parents(r.lambda_p * std::numbers::pi * Rw_ * Rw_);
            const long n_parents = parents(rng);
            const CloudGeometry g{D, dg, 0.0};
            const double half_a = 0.5 * r.alpha_o;
            for (long k = 0; k < n_parents; ++k)
            {
                const double x = Rw_ * std::sqrt(u(rng));
                const double th = 2.0 * std::numbers::pi * u(rng);
                const Point c{x * std::cos(th), x * std::sin(th)};
                out.interferer_centres.push_back(c);
                long a;
                if (x >= D + dg)
                    a = draw_active(full_cdf_, u(rng));
                else
                {
                    const double mu = r.lambda * guard_excluded_area(x, g);
                    if (mu <= 0.0)
                        continue;
                    std::poisson_distribution<long> eligible(mu);
                    a = std::min<long>(r.M, eligible(rng));
                }
                for (long j = 0; j < a; ++j)
                {
                    Point p;
                    double d2;
                    do
                    {
                        // two 32-bit coordinates from one draw
                        const std::uint64_t bits = rng();
                        const double ox = static_cast<double>(bits >> 32) * 0x1.0p-31 - 1.0;
                        const double oy = static_cast<double>(bits & 0xffffffffULL) * 0x1.0p-31 - 1.0;
                        if (ox * ox + oy * oy > 1.0)
                            continue;
                        p = {c.x + D * ox, c.y + D * oy};
                        d2 = p.x * p.x + p.y * p.y;
                        if (d2 >= dg * dg)
                            break;
                    } while (true);
                    const double f = detail::unit_exponential(rng);
                    out.interferers.push_back({p, f});
                    I += r.P * f * (half_a == 1.5 ? 1.0 / (d2 * std::sqrt(d2)) : std::pow(d2, -half_a));
                }
            }
        }
        out.tail = tail_;
        out.interference = I + tail_;
    }

    /// User's cloud: RUs, effective gains and the cache key.
    void sample_cloud(std::mt19937_64& rng, NetworkRealization& out) const
    {
        const RadioParams& r = cfg_.radio;
        out.centre = {cfg_.d, 0.0};
        std::poisson_distribution<long> count(r.lambda * std::numbers::pi * cfg_.D * cfg_.D);
        const long n = count(rng);
        out.rus.resize(static_cast<std::size_t>(n));
        for (auto& p : out.rus)
            p = detail::uniform_in_disk(out.centre.x, out.centre.y, cfg_.D, rng);
        out.active = static_cast<int>(std::min<long>(r.M, n));
        out.gain.resize(out.rus.size());
        std::gamma_distribution<double> gain(static_cast<double>(r.M - out.active + 1), 1.0);
        for (double& g : out.gain)
            g = gain(rng);
        out.cache_key = rng();
    }

    void sample(std::mt19937_64& rng, NetworkRealization& out) const
    {
        sample_cloud(rng, out);
        sample_interferers(rng, out);
    }

  private:
    static long draw_active(const std::vector<double>& cdf, double u)
    {
        return static_cast<long>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    }

    NetworkConfig cfg_;
    SimSettings settings_;
    double Rw_ = 0.0;
    double tail_ = 0.0;
    std::vector<double> full_cdf_;
};

/// Independent generator for block `block` of a run seeded with `seed`.
inline std::mt19937_64 block_stream(std::uint64_t seed, std::uint64_t block)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    return std::mt19937_64(seq);
}

template<class Rng>
NetworkRealization sample_realization(const NetworkConfig& cfg, Rng& rng, const SimSettings& settings = {})
{
    NetworkSampler sampler(cfg, settings);
    std::mt19937_64 stream(rng());
    NetworkRealization out;
    sampler.sample(stream, out);
    return out;
}

/// Serving RU for file i, or -1 when no RU of the cloud caches it.
inline long serving_ru(const NetworkRealization& real,
                       std::size_t i,
                       Strategy strategy,
                       const CachePolicy& policy,
                       const RadioParams& radio)
{
    long best = -1;
    double key = 0.0;
    for (std::size_t k = 0; k < real.rus.size(); ++k)
    {
        if (!real.caches(k, i, policy))
            continue;
        const double r = std::hypot(real.rus[k].x, real.rus[k].y);
        const double v = strategy == Strategy::Closest ? -r : real.gain[k] * std::pow(r, -radio.alpha_i);
        if (best < 0 || v > key)
        {
            best = static_cast<long>(k);
            key = v;
        }
    }
    return best;
}

/// SINR of the user when served for file i, 0 on a cache miss.
inline double simulate_sinr(const NetworkRealization& real,
                            std::size_t i,
                            Strategy strategy,
                            const CachePolicy& policy,
                            const RadioParams& radio)
{
    const long k = serving_ru(real, i, strategy, policy, radio);
    if (k < 0)
        return 0.0;
    const auto& p = real.rus[static_cast<std::size_t>(k)];
    const double w = radio.P * real.gain[static_cast<std::size_t>(k)] * std::pow(std::hypot(p.x, p.y), -radio.alpha_i);
    return w / (radio.sigma2 + real.interference);
}

inline bool simulate_hit(const NetworkRealization& real,
                         std::size_t i,
                         Strategy strategy,
                         const CachePolicy& policy,
                         const RadioParams& radio)
{
    return simulate_sinr(real, i, strategy, policy, radio) > radio.beta;
}

/// One (policy, strategy) pair evaluated at several thresholds.
struct HitRequest
{
    CachePolicy policy;
    Strategy strategy = Strategy::Closest;
    std::vector<double> betas;   // linear; empty means the config's beta
    std::vector<double> weights; // request probabilities; empty means the config's profile
};

struct HitEstimate
{
    Strategy strategy = Strategy::Closest;
    double beta = 0.0;
    std::vector<EstimatorResult> per_file;
    EstimatorResult network; // per-trial sum of q_i * hit_i, CI from its sample variance
};

namespace detail {

struct BlockTally
{
    // [request][beta][file] hit counts and [request][beta] network moments
    std::vector<std::vector<std::vector<std::uint64_t>>> hits;
    std::vector<std::vector<stats::Moments>> network;
};

struct SortedCloud
{
    std::vector<std::size_t> by_distance;
    std::vector<std::size_t> by_power;
    std::vector<double> dist;
    std::vector<double> power;
};

inline void sort_cloud(const NetworkRealization& real, const RadioParams& radio, SortedCloud& s)
{
    const std::size_t n = real.rus.size();
    s.dist.resize(n);
    s.power.resize(n);
    s.by_distance.resize(n);
    s.by_power.resize(n);
    for (std::size_t k = 0; k < n; ++k)
    {
        s.dist[k] = std::hypot(real.rus[k].x, real.rus[k].y);
        s.power[k] = radio.P * real.gain[k] * std::pow(s.dist[k], -radio.alpha_i);
        s.by_distance[k] = s.by_power[k] = k;
    }
    std::sort(s.by_distance.begin(), s.by_distance.end(), [&](std::size_t a, std::size_t b) {
        return s.dist[a] < s.dist[b] || (s.dist[a] == s.dist[b] && a < b);
    });
    std::sort(s.by_power.begin(), s.by_power.end(), [&](std::size_t a, std::size_t b) {
        return s.power[a] > s.power[b] || (s.power[a] == s.power[b] && a < b);
    });
}

} // namespace detail

/// Hit estimates for several requests from shared realizations.
///
/// Every request sees the same networks and the same cache draws, so
/// differences between policies or strategies carry no sampling noise from
/// the geometry. Trials are split in blocks, each with its own stream; the
/// result does not depend on the thread count.
inline std::vector<std::vector<HitEstimate>> estimate_hits(const NetworkConfig& cfg,
                                                           std::vector<HitRequest> requests,
                                                           const SimSettings& settings)
{
    if (settings.trials < 1)
        throw std::domain_error("estimate_hits: trials must be >= 1");
    const NetworkSampler sampler(cfg, settings);
    const PopularityProfile profile = cfg.profile();
    const std::size_t N = profile.size();
    for (auto& r : requests)
    {
        r.policy.validate();
        if (r.policy.size() != N)
            throw std::domain_error("estimate_hits: policy length differs from the library size");
        if (r.betas.empty())
            r.betas.push_back(cfg.radio.beta);
        if (r.weights.empty())
            r.weights = profile.q;
        if (r.weights.size() != N)
            throw std::domain_error("estimate_hits: weights length differs from the library size");
    }
    const std::uint64_t bs = std::max<std::uint64_t>(1, settings.block_size);
    const std::uint64_t n_blocks = (settings.trials + bs - 1) / bs;

    auto run_block = [&](std::uint64_t b) {
        detail::BlockTally t;
        t.hits.resize(requests.size());
        t.network.resize(requests.size());
        for (std::size_t r = 0; r < requests.size(); ++r)
        {
            t.hits[r].assign(requests[r].betas.size(), std::vector<std::uint64_t>(N, 0));
            t.network[r].assign(requests[r].betas.size(), stats::Moments{});
        }
        auto rng = block_stream(settings.seed, b);
        NetworkRealization real;
        detail::SortedCloud sc;
        std::vector<double> net;
        const std::uint64_t end = std::min(settings.trials, (b + 1) * bs);
        for (std::uint64_t trial = b * bs; trial < end; ++trial)
        {
            sampler.sample(rng, real);
            detail::sort_cloud(real, cfg.radio, sc);
            const double denom = cfg.radio.sigma2 + real.interference;
            for (std::size_t r = 0; r < requests.size(); ++r)
            {
                const auto& req = requests[r];
                const auto& order = req.strategy == Strategy::Closest ? sc.by_distance : sc.by_power;
                net.assign(req.betas.size(), 0.0);
                for (std::size_t i = 0; i < N; ++i)
                {
                    if (req.policy.p[i] <= 0.0)
                        continue;
                    double sinr = -1.0;
                    for (std::size_t k : order)
                        if (real.caches(k, i, req.policy))
                        {
                            sinr = sc.power[k] / denom;
                            break;
                        }
                    if (sinr < 0.0)
                        continue;
                    for (std::size_t j = 0; j < req.betas.size(); ++j)
                        if (sinr > req.betas[j])
                        {
                            ++t.hits[r][j][i];
                            net[j] += req.weights[i];
                        }
                }
                for (std::size_t j = 0; j < req.betas.size(); ++j)
                    t.network[r][j].add(net[j]);
            }
        }
        return t;
    };

    std::vector<detail::BlockTally> tallies(n_blocks);
    const int threads = std::max(1, settings.threads);
    if (threads == 1 || n_blocks == 1)
    {
        for (std::uint64_t b = 0; b < n_blocks; ++b)
            tallies[b] = run_block(b);
    }
    else
    {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w)
            pool.emplace_back([&, w] {
                for (std::uint64_t b = static_cast<std::uint64_t>(w); b < n_blocks; b += threads)
                    tallies[b] = run_block(b);
            });
        for (auto& th : pool)
            th.join();
    }

    const double n = static_cast<double>(settings.trials);
    std::vector<std::vector<HitEstimate>> out(requests.size());
    for (std::size_t r = 0; r < requests.size(); ++r)
        for (std::size_t j = 0; j < requests[r].betas.size(); ++j)
        {
            HitEstimate e;
            e.strategy = requests[r].strategy;
            e.beta = requests[r].betas[j];
            std::vector<std::uint64_t> hits(N, 0);
            stats::Moments m;
            for (const auto& t : tallies)
            {
                for (std::size_t i = 0; i < N; ++i)
                    hits[i] += t.hits[r][j][i];
                m.merge(t.network[r][j]);
            }
            for (std::size_t i = 0; i < N; ++i)
            {
                const double p = static_cast<double>(hits[i]) / n;
                e.per_file.push_back({p, stats::binomial_half_width(p, n), settings.trials, settings.seed});
            }
            e.network = {m.mean(), 1.96 * m.std_error(), settings.trials, settings.seed};
            out[r].push_back(std::move(e));
        }
    return out;
}

inline HitEstimate estimate_hit(const NetworkConfig& cfg,
                                const CachePolicy& policy,
                                Strategy strategy,
                                std::uint64_t trials,
                                std::uint64_t seed)
{
    SimSettings s;
    s.trials = trials;
    s.seed = seed;
    return estimate_hits(cfg, {HitRequest{policy, strategy, {}}}, s).front().front();
}

/// I.i.d. draws of the out-of-cloud interference power.
inline std::vector<double> sample_interference(const NetworkConfig& cfg, const SimSettings& settings)
{
    const NetworkSampler sampler(cfg, settings);
    std::vector<double> out(settings.trials);
    const std::uint64_t bs = std::max<std::uint64_t>(1, settings.block_size);
    NetworkRealization real;
    for (std::uint64_t b = 0; b * bs < settings.trials; ++b)
    {
        auto rng = block_stream(settings.seed, b);
        const std::uint64_t end = std::min(settings.trials, (b + 1) * bs);
        for (std::uint64_t t = b * bs; t < end; ++t)
        {
            sampler.sample_interferers(rng, real);
            out[t] = real.interference;
        }
    }
    return out;
}

inline std::vector<double> sample_interference(const NetworkConfig& cfg, std::uint64_t trials, std::uint64_t seed)
{
    SimSettings s;
    s.trials = trials;
    s.seed = seed;
    return sample_interference(cfg, s);
}

/// Sample mean of exp(-s I) with a CI half width at the given normal quantile.
inline EstimatorResult laplace_estimate(const std::vector<double>& samples, double s, double z = 1.96)
{
    stats::Moments m;
    for (double I : samples)
        m.add(std::exp(-s * I));
    return {m.mean(), z * m.std_error(), static_cast<std::uint64_t>(samples.size()), 0};
}

/// Zero-forcing gain |h^H v|^2 from explicit channels: v is h projected onto
/// the orthogonal complement of l - 1 other users' channels, normalised.
template<class Rng>
double sample_zf_gain(int M, int l, Rng& rng)
{
    std::normal_distribution<double> n(0.0, std::sqrt(0.5));
    auto draw = [&] { return std::complex<double>(n(rng), n(rng)); };
    Eigen::VectorXcd h(M);
    for (int a = 0; a < M; ++a)
        h(a) = draw();
    if (l <= 1)
        return h.squaredNorm();
    Eigen::MatrixXcd others(M, l - 1);
    for (int c = 0; c < l - 1; ++c)
        for (int a = 0; a < M; ++a)
            others(a, c) = draw();
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(others);
    const Eigen::MatrixXcd Q = qr.householderQ() * Eigen::MatrixXcd::Identity(M, l - 1);
    const Eigen::VectorXcd perp = h - Q * (Q.adjoint() * h);
    if (perp.norm() == 0.0)
        return 0.0;
    const Eigen::VectorXcd v = perp / perp.norm();
    return std::norm(h.dot(v));
}

struct ZfGainReport
{
    int M = 0;
    int l = 0;
    stats::KsResult ks;
    double sample_mean = 0.0;
    bool pass = false;
};

inline ZfGainReport validate_zf_gain(int M, int l, std::uint64_t trials, std::uint64_t seed)
{
    if (M < 1 || l < 1 || l > M)
        throw std::domain_error("validate_zf_gain: need 1 <= l <= M");
    auto rng = block_stream(seed, 0);
    std::vector<double> g(trials);
    double sum = 0.0;
    for (auto& v : g)
    {
        v = sample_zf_gain(M, l, rng);
        sum += v;
    }
    const double shape = M - l + 1;
    ZfGainReport r;
    r.M = M;
    r.l = l;
    r.sample_mean = sum / static_cast<double>(trials);
    r.ks = stats::ks_test(std::move(g), [&](double x) { return x <= 0.0 ? 0.0 : boost::math::gamma_p(shape, x); });
    r.pass = r.ks.p_value > 0.01;
    return r;
}

} // namespace cloudcache
