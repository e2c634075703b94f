#pragma once

#include <compare>
#include <span>
#include <string>
#include <vector>

#include "popsim/errors.hpp"
#include "popsim/params.hpp"
#include "popsim/protocols/common.hpp"

namespace popsim::proto {

// Six-state leader election for a population of exactly 3 agents, electing a
// leader without solving ranking. State set {l, f0, ..., f4}; the silent
// configurations are {l, f_i, f_j} with |i-j| = 1 mod 5.
struct ObsState {
    static constexpr int kLeader = -1;
    int follower = kLeader; // kLeader, or follower index in {0..4}

    bool is_leader() const { return follower == kLeader; }

    static ObsState leader() { return {kLeader}; }
    static ObsState f(int i) { return {i}; }

    auto operator<=>(const ObsState&) const = default;
};

namespace detail_obs {
inline ObsState from_code(std::uint64_t code) { // 0 -> leader, 1..5 -> f0..f4
    return code == 0 ? ObsState::leader() : ObsState::f(static_cast<int>(code) - 1);
}
inline bool randomizing_pair(const ObsState& a, const ObsState& b) {
    if (a == b) return true;
    if (a.is_leader() || b.is_leader()) return false;
    const int d = (a.follower - b.follower + 5) % 5;
    return d != 1 && d != 4;
}
} // namespace detail_obs

// Equal states, or two followers whose indices do not differ by 1 mod 5, are
// replaced by a uniform random pair from the 36 elements of S x S.
template <class Rng>
StepOutcome obs_ssle_step(ObsState& a, ObsState& b, Rng& rng) {
    if (!detail_obs::randomizing_pair(a, b)) return {};
    const std::uint64_t code = rng.uniform_below(36);
    ObsState na = detail_obs::from_code(code / 6);
    ObsState nb = detail_obs::from_code(code % 6);
    const bool changed = na != a || nb != b;
    a = na;
    b = nb;
    return {changed, 0};
}

struct ObsSsle {
    using State = ObsState;
    static constexpr const char* kName = "obs";
    static constexpr bool kSilent = true;

    template <class Rng>
    static StepOutcome step(State& a, State& b, const Params&, Rng& rng) {
        return obs_ssle_step(a, b, rng);
    }

    static void validate(const State& s, const Params& p) {
        if (p.n != 3)
            throw UnsupportedProtocolError("obs protocol is defined for a population of 3");
        if (s.follower < ObsState::kLeader || s.follower > 4)
            throw InternalError("obs state out of range");
    }

    // Correct means exactly one leader (SSLE, not ranking).
    static bool correct(std::span<const State> config, const Params&) {
        int leaders = 0;
        for (const State& s : config) leaders += s.is_leader() ? 1 : 0;
        return leaders == 1;
    }

    static bool silent(std::span<const State> config, const Params&) {
        for (std::size_t i = 0; i < config.size(); ++i)
            for (std::size_t j = 0; j < config.size(); ++j)
                if (i != j && detail_obs::randomizing_pair(config[i], config[j]))
                    return false;
        return true;
    }

    static void enumerate_states(const Params&, std::vector<State>& out) {
        out.push_back(State::leader());
        for (int i = 0; i < 5; ++i) out.push_back(State::f(i));
    }

    static std::string to_string(const State& s) {
        return s.is_leader() ? std::string("l") : "f" + std::to_string(s.follower);
    }
};

} // namespace popsim::proto
