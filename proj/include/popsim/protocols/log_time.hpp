#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "popsim/errors.hpp"
#include "popsim/params.hpp"
#include "popsim/protocols/common.hpp"
#include "popsim/protocols/phase_clock.hpp"

namespace popsim::proto {

// Lexicographic roster entry: rank major, name minor, both ascending.
struct RankName {
    int rank = 0;
    std::uint64_t name = 0;
    auto operator<=>(const RankName&) const = default;
};

using PairRoster = std::shared_ptr<const std::vector<RankName>>;

inline PairRoster make_pair_roster(std::vector<RankName> entries) {
    std::sort(entries.begin(), entries.end());
    entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
    return std::make_shared<const std::vector<RankName>>(std::move(entries));
}

inline PairRoster pair_roster_union(const PairRoster& x, const PairRoster& y) {
    if (x == y) return x;
    std::vector<RankName> merged;
    merged.reserve(x->size() + y->size());
    std::set_union(x->begin(), x->end(), y->begin(), y->end(), std::back_inserter(merged));
    if (merged.size() == x->size()) return x;
    if (merged.size() == y->size()) return y;
    return std::make_shared<const std::vector<RankName>>(std::move(merged));
}

struct LogTimeState {
    int rank = 1;
    std::uint64_t name = 1;
    PairRoster roster;
    PhaseClockFields clock;

    bool operator==(const LogTimeState& o) const {
        return rank == o.rank && name == o.name && clock == o.clock &&
               (roster == o.roster || *roster == *o.roster);
    }
};

// One interaction: run the phase clock, then every agent whose phase just
// changed re-ranks (only if its roster is complete), renames and restarts its
// roster; finally agents in a common phase merge rosters.
template <class Rng>
StepOutcome log_time_step(LogTimeState& a, LogTimeState& b, const Params& p, Rng& rng) {
    const PhaseClockResult clk = phase_clock_step(a.clock, b.clock, p);
    StepOutcome out;
    out.changed = clk.changed;

    const bool advanced[2] = {clk.advanced_a, clk.advanced_b};
    LogTimeState* agents[2] = {&a, &b};
    for (int i = 0; i < 2; ++i) {
        if (!advanced[i]) continue;
        LogTimeState& s = *agents[i];
        if (s.roster->size() == static_cast<std::size_t>(p.n)) {
            const RankName own{s.rank, s.name};
            const auto it = std::lower_bound(s.roster->begin(), s.roster->end(), own);
            s.rank = 1 + static_cast<int>(it - s.roster->begin());
        }
        s.name = rng.uniform_below(p.name_space) + 1;
        s.roster = make_pair_roster({RankName{s.rank, s.name}});
        out.changed = true;
    }

    if (a.clock.phase == b.clock.phase) {
        PairRoster merged = pair_roster_union(a.roster, b.roster);
        if (*a.roster != *merged || *b.roster != *merged) out.changed = true;
        a.roster = merged;
        b.roster = merged;
    }
    return out;
}

struct LogTime {
    using State = LogTimeState;
    static constexpr const char* kName = "log_time";
    static constexpr bool kSilent = false;
    static constexpr int kRankBase = 1;

    template <class Rng>
    static StepOutcome step(State& a, State& b, const Params& p, Rng& rng) {
        return log_time_step(a, b, p, rng);
    }

    static int rank_of(const State& s) { return s.rank; }

    static void validate(const State& s, const Params& p) {
        if (s.rank < 1 || s.rank > p.n) throw InternalError("log_time rank out of range");
        if (s.name < 1 || s.name > p.name_space)
            throw InternalError("log_time name out of range");
        if (s.clock.countdown < 0 || s.clock.countdown > p.c_max)
            throw InternalError("countdown out of range");
        for (const RankName& e : *s.roster)
            if (e.rank < 1 || e.rank > p.n || e.name < 1 || e.name > p.name_space)
                throw InternalError("roster entry out of range");
    }

    static std::string to_string(const State& s) {
        std::string r = "{rank=" + std::to_string(s.rank) + ",name=" + std::to_string(s.name) +
                        ",phase=" + std::to_string(s.clock.phase) +
                        ",countdown=" + std::to_string(s.clock.countdown) + ",roster={";
        for (std::size_t i = 0; i < s.roster->size(); ++i) {
            if (i > 0) r += ",";
            r += "(" + std::to_string((*s.roster)[i].rank) + "," +
                 std::to_string((*s.roster)[i].name) + ")";
        }
        return r + "}}";
    }
};

} // namespace popsim::proto
