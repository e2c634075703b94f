#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>

#include "popsim/params.hpp"

namespace popsim::proto {

// Self-stabilizing leaderless phase clock. Phases only grow; the countdown is
// restarted to c_max on every phase change.
struct PhaseClockFields {
    std::uint64_t phase = 0;
    int countdown = 0;

    auto operator<=>(const PhaseClockFields&) const = default;
};

struct PhaseClockResult {
    bool advanced_a = false; // a's phase just changed
    bool advanced_b = false;
    bool changed = false;
};

// Equal phases: both countdowns tick down; when either hits zero both agents
// enter the next phase. Unequal phases: the laggard jumps to the larger phase.
// Either way the two agents leave the interaction in the same phase.
inline PhaseClockResult phase_clock_step(PhaseClockFields& a, PhaseClockFields& b,
                                         const Params& p) {
    PhaseClockResult res;
    if (a.phase == b.phase) {
        a.countdown = std::max(a.countdown - 1, 0);
        b.countdown = std::max(b.countdown - 1, 0);
        res.changed = true;
        if (a.countdown == 0 || b.countdown == 0) {
            a.phase += 1;
            b.phase = a.phase;
            a.countdown = p.c_max;
            b.countdown = p.c_max;
            res.advanced_a = res.advanced_b = true;
        }
    } else if (a.phase < b.phase) {
        a.phase = b.phase;
        a.countdown = p.c_max;
        res.advanced_a = true;
        res.changed = true;
    } else {
        b.phase = a.phase;
        b.countdown = p.c_max;
        res.advanced_b = true;
        res.changed = true;
    }
    return res;
}

} // namespace popsim::proto
