#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "popsim/engine.hpp"
#include "popsim/errors.hpp"
#include "popsim/rng.hpp"

namespace popsim {

// H_k = sum_{i=1..k} 1/i, summed smallest-first.
inline double harmonic(int k) {
    if (k < 1) throw InvalidArgumentError("harmonic requires k >= 1");
    double h = 0.0;
    for (int i = k; i >= 1; --i) h += 1.0 / static_cast<double>(i);
    return h;
}

// Two-way epidemic from one infected agent under the uniform scheduler;
// returns the number of interactions until the whole population is infected.
inline std::uint64_t epidemic_trial(int n, RngStream& rng) {
    if (n < 2) throw InvalidArgumentError("epidemic requires a population of at least 2");
    std::vector<char> infected(static_cast<std::size_t>(n), 0);
    infected[0] = 1;
    int count = 1;
    std::uint64_t t = 0;
    while (count < n) {
        const auto [i, j] = pick_pair(rng, n);
        ++t;
        const char any = infected[static_cast<std::size_t>(i)] |
                         infected[static_cast<std::size_t>(j)];
        if (any) {
            if (!infected[static_cast<std::size_t>(i)]) {
                infected[static_cast<std::size_t>(i)] = 1;
                ++count;
            }
            if (!infected[static_cast<std::size_t>(j)]) {
                infected[static_cast<std::size_t>(j)] = 1;
                ++count;
            }
        }
    }
    return t;
}

// Roll call: n simultaneous epidemics, one per agent ID, spreading by pairwise
// roster union. Returns interactions until every agent holds all n IDs.
inline std::uint64_t roll_call_trial(int n, RngStream& rng) {
    if (n < 2) throw InvalidArgumentError("roll call requires a population of at least 2");
    const std::size_t words = (static_cast<std::size_t>(n) + 63) / 64;
    std::vector<std::uint64_t> rosters(static_cast<std::size_t>(n) * words, 0);
    std::vector<int> popcount(static_cast<std::size_t>(n), 1);
    for (int a = 0; a < n; ++a)
        rosters[static_cast<std::size_t>(a) * words + static_cast<std::size_t>(a) / 64] =
            1ULL << (a % 64);
    int complete = 0;
    std::uint64_t t = 0;
    while (complete < n) {
        const auto [i, j] = pick_pair(rng, n);
        ++t;
        std::uint64_t* ri = &rosters[static_cast<std::size_t>(i) * words];
        std::uint64_t* rj = &rosters[static_cast<std::size_t>(j) * words];
        int bits = 0;
        for (std::size_t w = 0; w < words; ++w) {
            const std::uint64_t u = ri[w] | rj[w];
            ri[w] = u;
            rj[w] = u;
            bits += std::popcount(u);
        }
        for (int a : {i, j}) {
            if (popcount[static_cast<std::size_t>(a)] < n && bits == n) ++complete;
            popcount[static_cast<std::size_t>(a)] = bits;
        }
    }
    return t;
}

// Ordinary least squares on (ln n, ln t).
struct ScalingFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

inline ScalingFit fit_loglog(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3)
        throw InvalidArgumentError("fit_loglog requires at least 3 points");
    std::vector<double> xs, ys;
    xs.reserve(points.size());
    ys.reserve(points.size());
    for (const auto& [n, t] : points) {
        if (n <= 0.0 || t <= 0.0)
            throw DomainError("fit_loglog requires positive coordinates");
        xs.push_back(std::log(n));
        ys.push_back(std::log(t));
    }
    const double count = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (sxx == 0.0) throw DomainError("fit_loglog requires at least two distinct n values");
    ScalingFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

// Exact moments and nearest-rank quantiles.
struct SampleSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0; // unbiased sample variance
    double min = 0.0;
    double max = 0.0;
    double p50 = 0.0;
    double p90 = 0.0;
    double p99 = 0.0;
};

inline SampleSummary summarize(std::vector<double> samples) {
    if (samples.empty()) throw InvalidArgumentError("summarize requires a nonempty sample");
    std::sort(samples.begin(), samples.end());
    SampleSummary s;
    s.count = samples.size();
    double sum = 0.0;
    for (double v : samples) sum += v;
    s.mean = sum / static_cast<double>(s.count);
    double ss = 0.0;
    for (double v : samples) ss += (v - s.mean) * (v - s.mean);
    s.variance = s.count > 1 ? ss / static_cast<double>(s.count - 1) : 0.0;
    s.min = samples.front();
    s.max = samples.back();
    const auto nearest_rank = [&](double q) {
        const std::size_t rank = static_cast<std::size_t>(
            std::ceil(q * static_cast<double>(s.count)));
        return samples[std::max<std::size_t>(rank, 1) - 1];
    };
    s.p50 = nearest_rank(0.50);
    s.p90 = nearest_rank(0.90);
    s.p99 = nearest_rank(0.99);
    return s;
}

} // namespace popsim
