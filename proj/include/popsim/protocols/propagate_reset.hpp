#pragma once

#include <algorithm>

#include "popsim/errors.hpp"
#include "popsim/params.hpp"
#include "popsim/protocols/common.hpp"

namespace popsim::proto {

// Population-wide reset used by the bounded-state ranking protocols.
//
// Requires from the host state type (found by overload in this namespace):
//   Resetting*       as_resetting(State&)
//   const Resetting* as_resetting(const State&)
//   void             enter_resetting(State&, Resetting)
//
// `reset_fn(State&, Rng&)` re-initializes an agent into a computing role; it
// must leave the Resetting role or the call is rejected as an internal error.
//
// The first argument must be Resetting; when both agents are Resetting the
// caller passes (initiator, responder). Lines execute sequentially on current
// field values. "resetcount just became 0" is judged against the value at
// interaction entry, with computing agents counting as resetcount 0.
template <class State, class ResetFn, class Rng>
StepOutcome propagate_reset(State& a, State& b, const Params& p, ResetFn&& reset_fn,
                            Rng& rng) {
    Resetting* ra = as_resetting(a);
    if (ra == nullptr)
        throw InternalError("propagate_reset: first agent is not Resetting");

    const int entry_rc_a = ra->resetcount;
    const Resetting* rb_entry = as_resetting(b);
    const int entry_rc_b = rb_entry != nullptr ? rb_entry->resetcount : 0;

    StepOutcome out;

    // Bring a computing partner into the Resetting role, dormant.
    if (ra->resetcount > 0 && as_resetting(b) == nullptr) {
        enter_resetting(b, Resetting::dormant(p.d_max));
        out.changed = true;
    }

    // Propagating-variable update: both counters drop to max(a-1, b-1, 0).
    if (Resetting* rb = as_resetting(b); rb != nullptr) {
        const int m = std::max({ra->resetcount - 1, rb->resetcount - 1, 0});
        for (Resetting* r : {ra, rb}) {
            if (r->resetcount != m) {
                r->resetcount = m;
                if (m > 0) r->delaytimer = Resetting::kNoDelay;
                out.changed = true;
            }
        }
    }

    // Dormant agents tick their delay timer and may awaken.
    const int entry_rcs[2] = {entry_rc_a, entry_rc_b};
    State* agents[2] = {&a, &b};
    for (int idx = 0; idx < 2; ++idx) {
        State& self = *agents[idx];
        Resetting* r = as_resetting(self);
        if (r == nullptr || r->resetcount != 0) continue;
        if (entry_rcs[idx] > 0) {
            r->delaytimer = p.d_max; // just became dormant
        } else {
            const int next = std::max(r->delaytimer - 1, 0);
            if (next != r->delaytimer) out.changed = true;
            r->delaytimer = next;
        }
        if (r->delaytimer == 0 || as_resetting(b) == nullptr) {
            reset_fn(self, rng); // dormant agents awaken by epidemic
            if (as_resetting(self) != nullptr)
                throw InternalError("reset routine left the agent in the Resetting role");
            out.changed = true;
        }
    }
    return out;
}

} // namespace popsim::proto
