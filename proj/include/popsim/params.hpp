#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "popsim/errors.hpp"

namespace popsim {

// Population size plus every derived constant the protocols use.
//
// All counter ceilings are multiples of an integer "effective logarithm"
// log_n = max(1, ceil(ln n)) so they stay positive at n = 2, 3. Fields are
// mutable after construction: exact-verification runs scale the ceilings and
// the name space down to keep state spaces enumerable; such runs are reported
// with a scaled-parameter caveat.
struct Params {
    int n = 0;                       // population size, >= 2
    int log_n = 0;                   // max(1, ceil(ln n))
    std::uint64_t name_space = 0;    // name universe size, default n^3
    int r_max = 0;                   // reset propagation ceiling, 60 * log_n
    int d_max = 0;                   // dormancy delay ceiling, 408 * log_n
    int c_max = 0;                   // phase-clock countdown ceiling, 24 * log_n
    int error_init = 0;              // unsettled error counter start, 4n
    double coin_bias = 0.0;          // error-timer decrement probability, min(1, 1/ln n)
    std::uint64_t max_interactions = 0;
    std::uint64_t tail_margin = 0;   // hindsight-stability window, default 10 * n * log_n

    static int effective_log(int n) {
        return std::max(1, static_cast<int>(std::ceil(std::log(static_cast<double>(n)))));
    }

    static Params make(int n) {
        if (n < 2) throw InvalidArgumentError("population size must be at least 2");
        Params p;
        p.n = n;
        p.log_n = effective_log(n);
        p.name_space = static_cast<std::uint64_t>(n) * n * n;
        p.r_max = 60 * p.log_n;
        p.d_max = 408 * p.log_n;
        p.c_max = 24 * p.log_n;
        p.error_init = 4 * n;
        p.coin_bias = std::min(1.0, 1.0 / std::log(static_cast<double>(n)));
        p.tail_margin = 10ULL * static_cast<std::uint64_t>(n) * p.log_n;
        return p;
    }

    void validate() const {
        if (n < 2) throw InvalidArgumentError("population size must be at least 2");
        if (name_space < static_cast<std::uint64_t>(n))
            throw InvalidArgumentError("name space must be at least n");
        if (r_max < 1 || d_max < 1 || c_max < 1)
            throw InvalidArgumentError("counter ceilings must be positive");
        if (coin_bias <= 0.0 || coin_bias > 1.0)
            throw InvalidArgumentError("coin bias must be in (0, 1]");
    }
};

} // namespace popsim
