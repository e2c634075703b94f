#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "popsim/errors.hpp"
#include "popsim/params.hpp"
#include "popsim/protocols/common.hpp"
#include "popsim/protocols/propagate_reset.hpp"

namespace popsim::proto {

// Rosters are sorted, duplicate-free and shared: a pairwise union leaves both
// agents pointing at one immutable vector.
using NameRoster = std::shared_ptr<const std::vector<std::uint64_t>>;

inline NameRoster make_roster(std::vector<std::uint64_t> names) {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    return std::make_shared<const std::vector<std::uint64_t>>(std::move(names));
}

// Number of distinct names in the union, without materializing it.
inline std::size_t union_size(const std::vector<std::uint64_t>& x,
                              const std::vector<std::uint64_t>& y) {
    std::size_t i = 0, j = 0, count = 0;
    while (i < x.size() && j < y.size()) {
        if (x[i] < y[j]) ++i;
        else if (y[j] < x[i]) ++j;
        else { ++i; ++j; }
        ++count;
    }
    return count + (x.size() - i) + (y.size() - j);
}

inline NameRoster roster_union(const NameRoster& x, const NameRoster& y) {
    const std::size_t total = union_size(*x, *y);
    if (total == x->size()) return x; // y is a subset
    if (total == y->size()) return y;
    std::vector<std::uint64_t> merged;
    merged.reserve(total);
    std::set_union(x->begin(), x->end(), y->begin(), y->end(), std::back_inserter(merged));
    return std::make_shared<const std::vector<std::uint64_t>>(std::move(merged));
}

// Collecting role of the linear-time protocol. The agent's own name is always
// a member of its roster; losing that guarantee would let an adversary plant
// a full roster of ghosts that no pairwise union can ever expose.
struct LtCollecting {
    int rank = 1;
    std::uint64_t name = 1;
    NameRoster roster;

    bool operator==(const LtCollecting& o) const {
        return rank == o.rank && name == o.name &&
               (roster == o.roster || *roster == *o.roster);
    }
};

using LinearTimeState = std::variant<LtCollecting, Resetting>;

inline Resetting* as_resetting(LinearTimeState& s) { return std::get_if<Resetting>(&s); }
inline const Resetting* as_resetting(const LinearTimeState& s) {
    return std::get_if<Resetting>(&s);
}
inline void enter_resetting(LinearTimeState& s, Resetting r) { s = r; }

template <class Rng>
void reset_linear_time(LinearTimeState& s, const Params& p, Rng& rng) {
    const std::uint64_t name = rng.uniform_below(p.name_space) + 1;
    s = LtCollecting{1, name, make_roster({name})};
}

// One interaction. Two Collecting agents either detect an error (shared name,
// or a union too large to be ghost-free) and both trigger a reset, or merge
// rosters; a complete roster assigns both ranks by sorted name order. Any
// other pairing delegates to propagate_reset with the Resetting agent first.
template <class Rng>
StepOutcome linear_time_step(LinearTimeState& a, LinearTimeState& b, const Params& p,
                             Rng& rng) {
    LtCollecting* ca = std::get_if<LtCollecting>(&a);
    LtCollecting* cb = std::get_if<LtCollecting>(&b);
    if (ca != nullptr && cb != nullptr) {
        const std::size_t total = union_size(*ca->roster, *cb->roster);
        if (ca->name == cb->name || total > static_cast<std::size_t>(p.n)) {
            a = LinearTimeState(Resetting::triggered(p.r_max));
            b = LinearTimeState(Resetting::triggered(p.r_max));
            return {true, 2};
        }
        StepOutcome out;
        NameRoster merged = roster_union(ca->roster, cb->roster);
        for (LtCollecting* c : {ca, cb}) {
            if (*c->roster != *merged) out.changed = true;
            c->roster = merged;
        }
        if (merged->size() == static_cast<std::size_t>(p.n)) {
            // do not set rank until all names have been collected
            for (LtCollecting* c : {ca, cb}) {
                const auto it = std::lower_bound(merged->begin(), merged->end(), c->name);
                const int pos = 1 + static_cast<int>(it - merged->begin());
                if (c->rank != pos) {
                    c->rank = pos;
                    out.changed = true;
                }
            }
        }
        return out;
    }
    auto reset_fn = [&p](LinearTimeState& s, Rng& r) { reset_linear_time(s, p, r); };
    if (as_resetting(a) != nullptr) return propagate_reset(a, b, p, reset_fn, rng);
    return propagate_reset(b, a, p, reset_fn, rng);
}

struct LinearTime {
    using State = LinearTimeState;
    static constexpr const char* kName = "linear_time";
    static constexpr bool kSilent = true;
    static constexpr int kRankBase = 1;

    template <class Rng>
    static StepOutcome step(State& a, State& b, const Params& p, Rng& rng) {
        return linear_time_step(a, b, p, rng);
    }

    static int rank_of(const State& s) {
        const LtCollecting* c = std::get_if<LtCollecting>(&s);
        return c != nullptr ? c->rank : -1;
    }

    static void validate(const State& s, const Params& p) {
        if (const LtCollecting* c = std::get_if<LtCollecting>(&s)) {
            if (c->rank < 1 || c->rank > p.n) throw InternalError("linear_time rank out of range");
            if (c->name < 1 || c->name > p.name_space)
                throw InternalError("linear_time name out of range");
            if (c->roster == nullptr || c->roster->size() > static_cast<std::size_t>(p.n))
                throw InternalError("linear_time roster too large");
            if (!std::binary_search(c->roster->begin(), c->roster->end(), c->name))
                throw InternalError("linear_time roster missing own name");
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

    // Silent iff everyone is Collecting with pairwise-distinct names, every
    // roster is the complete name set of size n, and every rank equals the
    // position of the agent's name in that sorted set.
    static bool silent(std::span<const State> config, const Params& p) {
        std::vector<std::uint64_t> names;
        names.reserve(config.size());
        for (const State& s : config) {
            const LtCollecting* c = std::get_if<LtCollecting>(&s);
            if (c == nullptr) return false;
            names.push_back(c->name);
        }
        std::sort(names.begin(), names.end());
        if (std::adjacent_find(names.begin(), names.end()) != names.end()) return false;
        if (names.size() != static_cast<std::size_t>(p.n)) return false;
        for (const State& s : config) {
            const LtCollecting& c = std::get<LtCollecting>(s);
            if (*c.roster != names) return false;
            const auto it = std::lower_bound(names.begin(), names.end(), c.name);
            if (c.rank != 1 + static_cast<int>(it - names.begin())) return false;
        }
        return true;
    }

    static void enumerate_states(const Params& p, std::vector<State>& out) {
        // All rosters that contain `name` plus at most n-1 other names.
        std::vector<std::uint64_t> scratch;
        for (std::uint64_t name = 1; name <= p.name_space; ++name) {
            scratch.assign(1, name);
            enumerate_rosters(p, name, 1, scratch, out);
        }
        for (int rc = 1; rc <= p.r_max; ++rc)
            out.push_back(State(Resetting::propagating(rc)));
        for (int dt = 0; dt <= p.d_max; ++dt)
            out.push_back(State(Resetting::dormant(dt)));
    }

    static std::string to_string(const State& s) {
        if (const LtCollecting* c = std::get_if<LtCollecting>(&s)) {
            std::string r = "Collecting{rank=" + std::to_string(c->rank) +
                            ",name=" + std::to_string(c->name) + ",roster={";
            for (std::size_t i = 0; i < c->roster->size(); ++i) {
                if (i > 0) r += ",";
                r += std::to_string((*c->roster)[i]);
            }
            return r + "}}";
        }
        const Resetting& r = std::get<Resetting>(s);
        if (r.is_dormant())
            return "Resetting{rc=0,dt=" + std::to_string(r.delaytimer) + "}";
        return "Resetting{rc=" + std::to_string(r.resetcount) + "}";
    }

private:
    static void enumerate_rosters(const Params& p, std::uint64_t own_name,
                                  std::uint64_t next, std::vector<std::uint64_t>& members,
                                  std::vector<State>& out) {
        NameRoster roster = make_roster(members);
        for (int rank = 1; rank <= p.n; ++rank)
            out.push_back(State(LtCollecting{rank, own_name, roster}));
        if (members.size() >= static_cast<std::size_t>(p.n)) return;
        for (std::uint64_t extra = next; extra <= p.name_space; ++extra) {
            if (extra == own_name) continue;
            members.push_back(extra);
            enumerate_rosters(p, own_name, extra + 1, members, out);
            members.pop_back();
        }
    }
};

} // namespace popsim::proto
