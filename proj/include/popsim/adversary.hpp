#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "popsim/engine.hpp"
#include "popsim/errors.hpp"
#include "popsim/params.hpp"
#include "popsim/protocols/registry.hpp"
#include "popsim/rng.hpp"

namespace popsim {

// Adversarial and baseline initial configurations.
//
//   all_same       every agent in one identical state
//   cai_worst      rank counts m_0 = 2, m_{n-1} = 0, otherwise 1
//   rank_pairs     two Settled agents in each of n/2 ranks, all nextrank Empty
//   ghost_roster   distinct names, every roster carries one planted ghost
//   false_full     ranks 1..n-1 Settled claiming Full, one Unsettled; rank n
//                  is empty but unreachable without a reset
//   mid_reset      one triggered resetter, everyone else computing
//   stale_phase    phases split over {phi, phi+1}, rosters seeded with a
//                  fabricated leader pair, all agents at the bottom rank
//   uniform_random independent uniform draws over the valid state space
//   correct_ranked stably correct (silent, for the silent protocols)
enum class InitKind {
    all_same,
    cai_worst,
    rank_pairs,
    ghost_roster,
    false_full,
    mid_reset,
    stale_phase,
    uniform_random,
    correct_ranked,
};

inline std::string_view init_kind_name(InitKind k) {
    switch (k) {
        case InitKind::all_same: return "all_same";
        case InitKind::cai_worst: return "cai_worst";
        case InitKind::rank_pairs: return "rank_pairs";
        case InitKind::ghost_roster: return "ghost_roster";
        case InitKind::false_full: return "false_full";
        case InitKind::mid_reset: return "mid_reset";
        case InitKind::stale_phase: return "stale_phase";
        case InitKind::uniform_random: return "uniform_random";
        case InitKind::correct_ranked: return "correct_ranked";
    }
    throw InvalidArgumentError("unknown init kind");
}

inline InitKind init_kind_from_name(std::string_view name) {
    for (InitKind k : {InitKind::all_same, InitKind::cai_worst, InitKind::rank_pairs,
                       InitKind::ghost_roster, InitKind::false_full, InitKind::mid_reset,
                       InitKind::stale_phase, InitKind::uniform_random,
                       InitKind::correct_ranked}) {
        if (init_kind_name(k) == name) return k;
    }
    throw InvalidArgumentError("unknown init kind: " + std::string(name));
}

namespace detail {

[[noreturn]] inline void bad_pairing(InitKind kind, std::string_view protocol) {
    throw DomainError("init kind '" + std::string(init_kind_name(kind)) +
                      "' is not defined for protocol '" + std::string(protocol) + "'");
}

inline std::vector<std::uint64_t> distinct_names(int count, const Params& p, RngStream& rng) {
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::uint64_t> names;
    names.reserve(static_cast<std::size_t>(count));
    while (names.size() < static_cast<std::size_t>(count)) {
        const std::uint64_t name = rng.uniform_below(p.name_space) + 1;
        if (seen.insert(name).second) names.push_back(name);
    }
    return names;
}

inline std::uint64_t unused_name(const std::vector<std::uint64_t>& used, const Params& p) {
    std::unordered_set<std::uint64_t> set(used.begin(), used.end());
    for (std::uint64_t g = 1; g <= p.name_space; ++g)
        if (!set.contains(g)) return g;
    throw DomainError("name space too small to plant a ghost name");
}

// Resetting state drawn as in the coverage decision: resetcount uniform over
// {0..r_max}, delaytimer uniform when dormant.
inline proto::Resetting random_resetting(const Params& p, RngStream& rng) {
    const int rc = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(p.r_max) + 1));
    if (rc == 0)
        return proto::Resetting::dormant(
            static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(p.d_max) + 1)));
    return proto::Resetting::propagating(rc);
}

// Roster size drawn proportionally to the number of rosters of that size,
// i.e. P(size s) ~ C(name_space-1, s-1); for large name spaces this is
// essentially always the maximal size n.
inline int random_roster_size(const Params& p, RngStream& rng) {
    const int n = p.n;
    std::vector<double> weight(static_cast<std::size_t>(n) + 1, 0.0);
    weight[static_cast<std::size_t>(n)] = 1.0;
    for (int s = n; s > 1; --s) {
        // C(N-1, s-2) / C(N-1, s-1) = (s-1) / (N - s + 1)
        const double ratio = static_cast<double>(s - 1) /
                             static_cast<double>(p.name_space - static_cast<std::uint64_t>(s) + 1);
        weight[static_cast<std::size_t>(s - 1)] = weight[static_cast<std::size_t>(s)] * ratio;
    }
    double total = 0.0;
    for (int s = 1; s <= n; ++s) total += weight[static_cast<std::size_t>(s)];
    double u = rng.uniform01() * total;
    for (int s = n; s >= 1; --s) {
        u -= weight[static_cast<std::size_t>(s)];
        if (u <= 0.0) return s;
    }
    return 1;
}

} // namespace detail

inline Configuration<proto::Cai> generate_cai(InitKind kind, const Params& p, RngStream& rng) {
    const int n = p.n;
    Configuration<proto::Cai> config(static_cast<std::size_t>(n));
    switch (kind) {
        case InitKind::all_same:
            return config; // all rank 0
        case InitKind::cai_worst: {
            // two agents at rank 0, none at rank n-1
            config[0].rank = 0;
            for (int i = 1; i < n; ++i) config[static_cast<std::size_t>(i)].rank = i - 1;
            return config;
        }
        case InitKind::uniform_random:
            for (auto& s : config) s.rank = static_cast<int>(rng.uniform_below(
                static_cast<std::uint64_t>(n)));
            return config;
        case InitKind::correct_ranked:
            for (int i = 0; i < n; ++i) config[static_cast<std::size_t>(i)].rank = i;
            return config;
        default:
            detail::bad_pairing(kind, proto::Cai::kName);
    }
}

inline Configuration<proto::LinearTime> generate_linear_time(InitKind kind, const Params& p,
                                                             RngStream& rng) {
    using proto::LinearTimeState;
    using proto::LtCollecting;
    const int n = p.n;
    Configuration<proto::LinearTime> config;
    config.reserve(static_cast<std::size_t>(n));
    switch (kind) {
        case InitKind::all_same: {
            const LtCollecting agent{1, 1, proto::make_roster({1})};
            config.assign(static_cast<std::size_t>(n), LinearTimeState(agent));
            return config;
        }
        case InitKind::ghost_roster: {
            std::vector<std::uint64_t> names = detail::distinct_names(n, p, rng);
            const std::uint64_t ghost = detail::unused_name(names, p);
            for (int i = 0; i < n; ++i) {
                const std::uint64_t name = names[static_cast<std::size_t>(i)];
                config.emplace_back(LtCollecting{1, name, proto::make_roster({name, ghost})});
            }
            return config;
        }
        case InitKind::mid_reset: {
            std::vector<std::uint64_t> names = detail::distinct_names(n, p, rng);
            config.emplace_back(proto::Resetting::triggered(p.r_max));
            for (int i = 1; i < n; ++i) {
                const std::uint64_t name = names[static_cast<std::size_t>(i)];
                config.emplace_back(LtCollecting{1, name, proto::make_roster({name})});
            }
            return config;
        }
        case InitKind::uniform_random: {
            // Roles weighted by their state counts. Collecting dominates for
            // any realistic name space; the exact ratio is kept only while the
            // total count fits an integer.
            const StateCount sc = count_states(ProtocolId::linear_time, p);
            for (int i = 0; i < n; ++i) {
                bool collecting = true;
                if (sc.exact) {
                    const std::uint64_t resetting =
                        static_cast<std::uint64_t>(p.r_max + p.d_max + 1);
                    collecting = rng.uniform_below(sc.value) >= resetting;
                }
                if (!collecting) {
                    config.emplace_back(detail::random_resetting(p, rng));
                    continue;
                }
                const int rank = static_cast<int>(rng.uniform_below(
                                     static_cast<std::uint64_t>(n))) + 1;
                const std::uint64_t name = rng.uniform_below(p.name_space) + 1;
                const int size = detail::random_roster_size(p, rng);
                std::vector<std::uint64_t> members{name};
                std::unordered_set<std::uint64_t> seen{name};
                while (members.size() < static_cast<std::size_t>(size)) {
                    const std::uint64_t extra = rng.uniform_below(p.name_space) + 1;
                    if (seen.insert(extra).second) members.push_back(extra);
                }
                config.emplace_back(LtCollecting{rank, name, proto::make_roster(members)});
            }
            return config;
        }
        case InitKind::correct_ranked: {
            std::vector<std::uint64_t> names = detail::distinct_names(n, p, rng);
            std::vector<std::uint64_t> sorted = names;
            std::sort(sorted.begin(), sorted.end());
            const proto::NameRoster full = proto::make_roster(sorted);
            for (int i = 0; i < n; ++i) {
                const std::uint64_t name = names[static_cast<std::size_t>(i)];
                const auto it = std::lower_bound(sorted.begin(), sorted.end(), name);
                const int rank = 1 + static_cast<int>(it - sorted.begin());
                config.emplace_back(LtCollecting{rank, name, full});
            }
            return config;
        }
        default:
            detail::bad_pairing(kind, proto::LinearTime::kName);
    }
}

inline Configuration<proto::LinearState> generate_linear_state(InitKind kind, const Params& p,
                                                               RngStream& rng) {
    using proto::LinearStateState;
    using proto::LsSettled;
    using proto::LsUnsettled;
    const int n = p.n;
    Configuration<proto::LinearState> config;
    config.reserve(static_cast<std::size_t>(n));
    switch (kind) {
        case InitKind::all_same:
            config.assign(static_cast<std::size_t>(n), LinearStateState(LsSettled{1, false}));
            return config;
        case InitKind::rank_pairs: {
            // two agents per rank; an odd population parks the leftover agent
            // one rank above the paired block
            for (int i = 0; i < n; ++i) {
                const int rank = i / 2 + 1;
                config.emplace_back(LsSettled{rank, false});
            }
            return config;
        }
        case InitKind::false_full: {
            for (int i = 0; i < n - 1; ++i) config.emplace_back(LsSettled{i + 1, true});
            config.emplace_back(LsUnsettled{p.error_init});
            return config;
        }
        case InitKind::mid_reset: {
            config.emplace_back(proto::Resetting::triggered(p.r_max));
            for (int i = 1; i < n; ++i) config.emplace_back(LsSettled{i, false});
            return config;
        }
        case InitKind::uniform_random: {
            const std::uint64_t settled = static_cast<std::uint64_t>(2 * n - 1);
            const std::uint64_t unsettled = static_cast<std::uint64_t>(4 * n + 1);
            const std::uint64_t resetting = static_cast<std::uint64_t>(p.r_max + p.d_max + 1);
            const std::uint64_t total = settled + unsettled + resetting;
            for (int i = 0; i < n; ++i) {
                const std::uint64_t pick = rng.uniform_below(total);
                if (pick < settled) {
                    // uniform over (rank, nextrank) pairs minus (n, Empty)
                    const std::uint64_t idx = rng.uniform_below(settled);
                    const int rank = static_cast<int>(idx / 2) + 1;
                    const bool full = (idx % 2 == 1) || rank == n;
                    config.emplace_back(LsSettled{rank, full});
                } else if (pick < settled + unsettled) {
                    config.emplace_back(LsUnsettled{static_cast<int>(rng.uniform_below(
                        static_cast<std::uint64_t>(p.error_init) + 1))});
                } else {
                    config.emplace_back(detail::random_resetting(p, rng));
                }
            }
            return config;
        }
        case InitKind::correct_ranked:
            for (int i = 0; i < n; ++i) config.emplace_back(LsSettled{i + 1, true});
            return config;
        default:
            detail::bad_pairing(kind, proto::LinearState::kName);
    }
}

inline Configuration<proto::LogTime> generate_log_time(InitKind kind, const Params& p,
                                                       RngStream& rng) {
    using proto::LogTimeState;
    using proto::RankName;
    const int n = p.n;
    Configuration<proto::LogTime> config;
    config.reserve(static_cast<std::size_t>(n));
    switch (kind) {
        case InitKind::all_same: {
            LogTimeState s{1, 1, proto::make_pair_roster({RankName{1, 1}}), {0, p.c_max}};
            config.assign(static_cast<std::size_t>(n), s);
            return config;
        }
        case InitKind::ghost_roster:
        case InitKind::stale_phase: {
            std::vector<std::uint64_t> names = detail::distinct_names(n, p, rng);
            const std::uint64_t ghost_name = detail::unused_name(names, p);
            const RankName ghost{1, ghost_name}; // a fabricated leader entry
            const bool split_phases = kind == InitKind::stale_phase;
            for (int i = 0; i < n; ++i) {
                LogTimeState s;
                s.rank = split_phases ? n : 1;
                s.name = names[static_cast<std::size_t>(i)];
                s.roster = proto::make_pair_roster({RankName{s.rank, s.name}, ghost});
                s.clock.phase = split_phases ? (i % 2 == 0 ? 1 : 2) : 1;
                s.clock.countdown =
                    static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(p.c_max))) + 1;
                config.push_back(std::move(s));
            }
            return config;
        }
        case InitKind::uniform_random: {
            // phase drawn from a small window; a uniform draw over the
            // unbounded phase counter does not exist
            for (int i = 0; i < n; ++i) {
                LogTimeState s;
                s.rank = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n))) + 1;
                s.name = rng.uniform_below(p.name_space) + 1;
                const int extras = static_cast<int>(rng.uniform_below(
                    static_cast<std::uint64_t>(n)));
                std::vector<RankName> entries{RankName{s.rank, s.name}};
                for (int e = 0; e < extras; ++e) {
                    entries.push_back(RankName{
                        static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n))) + 1,
                        rng.uniform_below(p.name_space) + 1});
                }
                s.roster = proto::make_pair_roster(std::move(entries));
                s.clock.phase = rng.uniform_below(4);
                s.clock.countdown = static_cast<int>(rng.uniform_below(
                    static_cast<std::uint64_t>(p.c_max) + 1));
                config.push_back(std::move(s));
            }
            return config;
        }
        case InitKind::correct_ranked: {
            std::vector<std::uint64_t> names = detail::distinct_names(n, p, rng);
            for (int i = 0; i < n; ++i) {
                LogTimeState s;
                s.rank = i + 1;
                s.name = names[static_cast<std::size_t>(i)];
                s.roster = proto::make_pair_roster({RankName{s.rank, s.name}});
                s.clock = {0, p.c_max};
                config.push_back(std::move(s));
            }
            return config;
        }
        default:
            detail::bad_pairing(kind, proto::LogTime::kName);
    }
}

inline Configuration<proto::ObsSsle> generate_obs(InitKind kind, const Params& p,
                                                  RngStream& rng) {
    using proto::ObsState;
    if (p.n != 3)
        throw UnsupportedProtocolError("obs protocol is defined for a population of 3");
    Configuration<proto::ObsSsle> config(3);
    switch (kind) {
        case InitKind::all_same:
            config.assign(3, ObsState::leader());
            return config;
        case InitKind::uniform_random:
            for (auto& s : config)
                s = proto::detail_obs::from_code(rng.uniform_below(6));
            return config;
        case InitKind::correct_ranked:
            config[0] = ObsState::leader();
            config[1] = ObsState::f(0);
            config[2] = ObsState::f(1);
            return config;
        default:
            detail::bad_pairing(kind, proto::ObsSsle::kName);
    }
}

// Tag-dispatched front end used by templated callers.
template <class P>
Configuration<P> generate_initial(InitKind kind, const Params& p, RngStream& rng);

template <>
inline Configuration<proto::Cai> generate_initial<proto::Cai>(InitKind kind, const Params& p,
                                                              RngStream& rng) {
    return generate_cai(kind, p, rng);
}
template <>
inline Configuration<proto::LinearTime> generate_initial<proto::LinearTime>(
    InitKind kind, const Params& p, RngStream& rng) {
    return generate_linear_time(kind, p, rng);
}
template <>
inline Configuration<proto::LinearState> generate_initial<proto::LinearState>(
    InitKind kind, const Params& p, RngStream& rng) {
    return generate_linear_state(kind, p, rng);
}
template <>
inline Configuration<proto::LogTime> generate_initial<proto::LogTime>(InitKind kind,
                                                                      const Params& p,
                                                                      RngStream& rng) {
    return generate_log_time(kind, p, rng);
}
template <>
inline Configuration<proto::ObsSsle> generate_initial<proto::ObsSsle>(InitKind kind,
                                                                      const Params& p,
                                                                      RngStream& rng) {
    return generate_obs(kind, p, rng);
}

} // namespace popsim
