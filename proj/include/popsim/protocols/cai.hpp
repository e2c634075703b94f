#pragma once

#include <compare>
#include <span>
#include <string>
#include <vector>

#include "popsim/errors.hpp"
#include "popsim/params.hpp"
#include "popsim/protocols/common.hpp"

namespace popsim::proto {

// n-state ranking: on a rank collision the responder increments mod n.
// Ranks live in {0, ..., n-1}.
struct CaiState {
    int rank = 0;
    auto operator<=>(const CaiState&) const = default;
};

// Transition for initiator `a` and responder `b`. Only the responder ever
// moves, and only when the ranks collide.
inline StepOutcome cai_step(CaiState& a, CaiState& b, int n) {
    if (a.rank == b.rank) {
        b.rank = (b.rank + 1) % n;
        return {true, 0};
    }
    return {};
}

struct Cai {
    using State = CaiState;
    static constexpr const char* kName = "cai";
    static constexpr bool kSilent = true;
    static constexpr int kRankBase = 0; // ranks are 0-based

    template <class Rng>
    static StepOutcome step(State& a, State& b, const Params& p, Rng&) {
        return cai_step(a, b, p.n);
    }

    // -1 would mean "not in a ranked role"; every cai agent is ranked.
    static int rank_of(const State& s) { return s.rank; }

    static void validate(const State& s, const Params& p) {
        if (s.rank < 0 || s.rank >= p.n)
            throw InternalError("cai rank out of range");
    }

    // Silent iff no two agents share a rank (the only non-null rule needs
    // a rank collision).
    static bool silent(std::span<const State> config, const Params& p) {
        std::vector<char> seen(static_cast<std::size_t>(p.n), 0);
        for (const State& s : config) {
            if (seen[static_cast<std::size_t>(s.rank)]) return false;
            seen[static_cast<std::size_t>(s.rank)] = 1;
        }
        return true;
    }

    static void enumerate_states(const Params& p, std::vector<State>& out) {
        for (int r = 0; r < p.n; ++r) out.push_back(State{r});
    }

    static std::string to_string(const State& s) {
        return "rank=" + std::to_string(s.rank);
    }
};

} // namespace popsim::proto
