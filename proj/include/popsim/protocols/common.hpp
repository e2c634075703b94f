#pragma once

#include <compare>
#include <cstdint>

namespace popsim {

// Reported by every pairwise transition.
struct StepOutcome {
    bool changed = false; // at least one of the two states differs from entry
    int triggers = 0;     // agents that entered the triggered state (resetcount = r_max)

    StepOutcome& operator|=(const StepOutcome& o) {
        changed = changed || o.changed;
        triggers += o.triggers;
        return *this;
    }
};

namespace proto {

// Shared fields of the Resetting role. delaytimer exists only while
// resetcount = 0; kNoDelay marks it absent.
struct Resetting {
    static constexpr int kNoDelay = -1;

    int resetcount = 0;
    int delaytimer = kNoDelay;

    static Resetting triggered(int r_max) { return {r_max, kNoDelay}; }
    static Resetting propagating(int count) { return {count, kNoDelay}; }
    static Resetting dormant(int delay) { return {0, delay}; }

    bool is_dormant() const { return resetcount == 0; }

    auto operator<=>(const Resetting&) const = default;
};

} // namespace proto
} // namespace popsim
