#pragma once

#include <algorithm>
#include <compare>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "popsim/errors.hpp"
#include "popsim/params.hpp"
#include "popsim/protocols/common.hpp"
#include "popsim/protocols/propagate_reset.hpp"

namespace popsim::proto {

// Settled agents hold a rank and their belief about whether the next rank up
// is occupied. rank = n forces next_full (there is no next rank).
struct LsSettled {
    int rank = 1;
    bool next_full = false;
    auto operator<=>(const LsSettled&) const = default;
};

// Unsettled agents wait for a settled agent advertising an empty next rank,
// counting down an error timer that eventually forces a global reset.
struct LsUnsettled {
    int errorcount = 0;
    auto operator<=>(const LsUnsettled&) const = default;
};

using LinearStateState = std::variant<LsSettled, LsUnsettled, Resetting>;

inline Resetting* as_resetting(LinearStateState& s) { return std::get_if<Resetting>(&s); }
inline const Resetting* as_resetting(const LinearStateState& s) {
    return std::get_if<Resetting>(&s);
}
inline void enter_resetting(LinearStateState& s, Resetting r) { s = r; }

inline void reset_linear_state(LinearStateState& s) { s = LsSettled{1, false}; }

// Error timer for one Unsettled agent: decrement with probability coin_bias;
// a zero counter converts the agent into a triggered resetter.
template <class Rng>
StepOutcome error_timer_step(LinearStateState& s, const Params& p, Rng& rng) {
    LsUnsettled* u = std::get_if<LsUnsettled>(&s);
    if (u == nullptr) throw InternalError("error_timer_step on a non-Unsettled agent");
    StepOutcome out;
    if (rng.bernoulli(p.coin_bias) && u->errorcount > 0) {
        u->errorcount -= 1;
        out.changed = true;
    }
    if (u->errorcount == 0) {
        s = LinearStateState(Resetting::triggered(p.r_max));
        out.changed = true;
        out.triggers = 1;
    }
    return out;
}

// One interaction of the linear-state protocol, lines applied in order on
// current values:
//   1. Settled/Settled: the lower-ranked agent learns next_full; equal ranks
//      unsettle the responder (initiator/responder asymmetry).
//   2. An Unsettled agent settling at an advertised empty rank.
//   3. Error timers of agents that are Unsettled at this point.
//   4. Propagate-Reset if anyone is Resetting by now.
template <class Rng>
StepOutcome linear_state_step(LinearStateState& a, LinearStateState& b, const Params& p,
                              Rng& rng) {
    StepOutcome out;

    if (LsSettled* sa = std::get_if<LsSettled>(&a)) {
        if (LsSettled* sb = std::get_if<LsSettled>(&b)) {
            LsSettled* lower = sa->rank < sb->rank ? sa : (sb->rank < sa->rank ? sb : nullptr);
            if (lower != nullptr && !lower->next_full) {
                lower->next_full = true; // a higher rank exists, so rank+1 must be full
                out.changed = true;
            }
            if (sa->rank == sb->rank) {
                b = LinearStateState(LsUnsettled{p.error_init});
                out.changed = true;
            }
        }
    }

    {
        LinearStateState* uside = std::get_if<LsUnsettled>(&a) != nullptr ? &a
                                : std::get_if<LsUnsettled>(&b) != nullptr ? &b
                                                                          : nullptr;
        LinearStateState* sside = uside == &a ? &b : &a;
        LsSettled* js = uside != nullptr ? std::get_if<LsSettled>(sside) : nullptr;
        if (uside != nullptr && js != nullptr && !js->next_full) {
            const int rank = js->rank + 1;
            *uside = LinearStateState(LsSettled{rank, rank >= p.n});
            js->next_full = true;
            out.changed = true;
        }
    }

    for (LinearStateState* s : {&a, &b})
        if (std::get_if<LsUnsettled>(s) != nullptr)
            out |= error_timer_step(*s, p, rng);

    auto reset_fn = [](LinearStateState& s, Rng&) { reset_linear_state(s); };
    if (as_resetting(a) != nullptr) out |= propagate_reset(a, b, p, reset_fn, rng);
    else if (as_resetting(b) != nullptr) out |= propagate_reset(b, a, p, reset_fn, rng);

    return out;
}

struct LinearState {
    using State = LinearStateState;
    static constexpr const char* kName = "linear_state";
    static constexpr bool kSilent = true;
    static constexpr int kRankBase = 1;

    template <class Rng>
    static StepOutcome step(State& a, State& b, const Params& p, Rng& rng) {
        return linear_state_step(a, b, p, rng);
    }

    static int rank_of(const State& s) {
        const LsSettled* st = std::get_if<LsSettled>(&s);
        return st != nullptr ? st->rank : -1;
    }

    static void validate(const State& s, const Params& p) {
        if (const LsSettled* st = std::get_if<LsSettled>(&s)) {
            if (st->rank < 1 || st->rank > p.n)
                throw InternalError("linear_state rank out of range");
            if (st->rank == p.n && !st->next_full)
                throw InternalError("rank n must have next_full");
        } else if (const LsUnsettled* u = std::get_if<LsUnsettled>(&s)) {
            if (u->errorcount < 0 || u->errorcount > p.error_init)
                throw InternalError("errorcount out of range");
        } else {
            const Resetting& r = std::get<Resetting>(s);
            if (r.resetcount < 0 || r.resetcount > p.r_max)
                throw InternalError("resetcount out of range");
            if (r.resetcount == 0 && (r.delaytimer < 0 || r.delaytimer > p.d_max))
                throw InternalError("delaytimer out of range");
            if (r.resetcount > 0 && r.delaytimer != Resetting::kNoDelay)
                throw InternalError("delaytimer present while propagating");
        }
    }

    // Unique silent configuration: all Settled, ranks a permutation of
    // {1..n}, every nextrank Full.
    static bool silent(std::span<const State> config, const Params& p) {
        std::vector<char> seen(static_cast<std::size_t>(p.n) + 1, 0);
        for (const State& s : config) {
            const LsSettled* st = std::get_if<LsSettled>(&s);
            if (st == nullptr || !st->next_full) return false;
            if (seen[static_cast<std::size_t>(st->rank)]) return false;
            seen[static_cast<std::size_t>(st->rank)] = 1;
        }
        return true;
    }

    static void enumerate_states(const Params& p, std::vector<State>& out) {
        for (int rank = 1; rank <= p.n; ++rank) {
            if (rank < p.n) out.push_back(State(LsSettled{rank, false}));
            out.push_back(State(LsSettled{rank, true}));
        }
        for (int ec = 0; ec <= p.error_init; ++ec)
            out.push_back(State(LsUnsettled{ec}));
        for (int rc = 1; rc <= p.r_max; ++rc)
            out.push_back(State(Resetting::propagating(rc)));
        for (int dt = 0; dt <= p.d_max; ++dt)
            out.push_back(State(Resetting::dormant(dt)));
    }

    static std::string to_string(const State& s) {
        if (const LsSettled* st = std::get_if<LsSettled>(&s))
            return "Settled{rank=" + std::to_string(st->rank) +
                   (st->next_full ? ",Full}" : ",Empty}");
        if (const LsUnsettled* u = std::get_if<LsUnsettled>(&s))
            return "Unsettled{errorcount=" + std::to_string(u->errorcount) + "}";
        const Resetting& r = std::get<Resetting>(s);
        if (r.is_dormant())
            return "Resetting{rc=0,dt=" + std::to_string(r.delaytimer) + "}";
        return "Resetting{rc=" + std::to_string(r.resetcount) + "}";
    }
};

} // namespace popsim::proto
