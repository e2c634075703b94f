#pragma once

#include <algorithm>
#include <cmath>
#include <compare>

#include "popsim/params.hpp"

namespace popsim::proto {

// Derandomized error timer: counts roughly m * k * 2^k interactions using
// 2*m*k states and no transition randomness. The initiator/responder roles of
// the uniform scheduler stand in for coin flips: the counter advances one
// notch per block of k interactions in which the agent was never a responder.
struct SyntheticTimerFields {
    int errorcount = 0; // in {0..m-1}
    int clock = 0;      // in {0..k-1}
    bool decrement = true;

    auto operator<=>(const SyntheticTimerFields&) const = default;
};

struct SyntheticTimerParams {
    int m = 1;
    int k = 1;

    // m = floor(4n / log2 ln n), k = floor(log2 ln n), both clamped >= 1.
    static SyntheticTimerParams make(int n) {
        const double loglog = std::log2(std::log(static_cast<double>(n)));
        const int k = std::max(1, static_cast<int>(std::floor(loglog)));
        const int m = std::max(1, static_cast<int>(std::floor(4.0 * n / loglog)));
        return {m, k};
    }
};

// One interaction of the timer for a single agent. Returns true when the
// counter exhausts (the caller is expected to fire a reset trigger).
inline bool synthetic_error_timer_step(SyntheticTimerFields& t, bool is_responder,
                                       const SyntheticTimerParams& sp) {
    if (is_responder) t.decrement = false;
    t.clock = (t.clock + 1) % sp.k;
    if (t.clock == 0) {
        if (t.decrement) t.errorcount = (t.errorcount + 1) % sp.m;
        t.decrement = true;
    }
    return t.errorcount == 0;
}

} // namespace popsim::proto
