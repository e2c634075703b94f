#pragma once

#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "popsim/errors.hpp"
#include "popsim/metrics.hpp"
#include "popsim/params.hpp"
#include "popsim/protocols/common.hpp"
#include "popsim/rng.hpp"

namespace popsim {

template <class P>
using Configuration = std::vector<typename P::State>;

// Uniform ordered pair of distinct agents, one logical draw over the
// n(n-1) pair codes.
inline std::pair<int, int> pick_pair(RngStream& rng, int n) {
    if (n < 2) throw InvalidArgumentError("pick_pair requires a population of at least 2");
    const std::uint64_t code =
        rng.uniform_below(static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1));
    const int i = static_cast<int>(code / static_cast<std::uint64_t>(n - 1));
    int j = static_cast<int>(code % static_cast<std::uint64_t>(n - 1));
    if (j >= i) ++j;
    return {i, j};
}

namespace detail {

// Protocols with a rank_of member use an O(1)-update permutation tracker for
// per-interaction correctness; the rest (obs) fall back to a full scan.
template <class P>
concept RankedProtocol = requires(const typename P::State& s) {
    { P::rank_of(s) } -> std::convertible_to<int>;
};

template <class P>
class CorrectnessTracker {
public:
    void reset(std::span<const typename P::State> config, const Params& p) {
        if constexpr (RankedProtocol<P>) {
            params_ = &p;
            counts_.assign(static_cast<std::size_t>(p.n), 0);
            collisions_ = 0;
            unranked_ = 0;
            for (const auto& s : config) add(s);
        } else {
            params_ = &p;
        }
    }

    void remove(const typename P::State& s) {
        if constexpr (RankedProtocol<P>) {
            const int r = P::rank_of(s);
            if (r < 0) {
                --unranked_;
            } else {
                int& c = counts_[static_cast<std::size_t>(r - P::kRankBase)];
                if (c > 1) --collisions_;
                --c;
            }
        } else {
            (void)s;
        }
    }

    void add(const typename P::State& s) {
        if constexpr (RankedProtocol<P>) {
            const int r = P::rank_of(s);
            if (r < 0) {
                ++unranked_;
            } else {
                int& c = counts_[static_cast<std::size_t>(r - P::kRankBase)];
                ++c;
                if (c > 1) ++collisions_;
            }
        } else {
            (void)s;
        }
    }

    bool correct(std::span<const typename P::State> config) const {
        if constexpr (RankedProtocol<P>) {
            (void)config;
            return collisions_ == 0 && unranked_ == 0;
        } else {
            return P::correct(config, *params_);
        }
    }

private:
    const Params* params_ = nullptr;
    std::vector<int> counts_;
    int collisions_ = 0;
    int unranked_ = 0;
};

} // namespace detail

// True iff the ranked roles carry a permutation of the protocol's rank domain
// and no agent sits in a non-ranked role; obs checks single-leader instead.
template <class P>
bool detect_correct(std::span<const typename P::State> config, const Params& p) {
    if constexpr (detail::RankedProtocol<P>) {
        std::vector<char> seen(static_cast<std::size_t>(p.n), 0);
        for (const auto& s : config) {
            const int r = P::rank_of(s);
            if (r < 0) return false;
            auto& slot = seen[static_cast<std::size_t>(r - P::kRankBase)];
            if (slot) return false;
            slot = 1;
        }
        return true;
    } else {
        return P::correct(config, p);
    }
}

template <class P>
bool detect_silent(std::span<const typename P::State> config, const Params& p) {
    if constexpr (P::kSilent) {
        return P::silent(config, p);
    } else {
        throw UnsupportedProtocolError(std::string(P::kName) + " is not a silent protocol");
    }
}

struct StepEvent {
    std::uint64_t index = 0; // 1-based interaction index
    int initiator = 0;
    int responder = 0;
};

// Applies one transition to an explicitly chosen ordered pair.
template <class P, class Rng>
StepOutcome apply_pair(Configuration<P>& config, int i, int j, const Params& p, Rng& rng) {
    StepOutcome out = P::step(config[static_cast<std::size_t>(i)],
                              config[static_cast<std::size_t>(j)], p, rng);
    P::validate(config[static_cast<std::size_t>(i)], p);
    P::validate(config[static_cast<std::size_t>(j)], p);
    return out;
}

// One scheduler step: pick a uniform ordered pair and apply the transition.
template <class P>
std::pair<StepOutcome, StepEvent> step(Configuration<P>& config, const Params& p,
                                       RngStream& rng, std::uint64_t index = 0) {
    const auto [i, j] = pick_pair(rng, p.n);
    StepOutcome out = apply_pair<P>(config, i, j, p, rng);
    return {out, StepEvent{index, i, j}};
}

struct RunOptions {
    bool record_trace = false;
};

template <class P>
struct RunResult {
    Configuration<P> final_config;
    RunMetrics metrics;
    std::vector<char> timeline; // filled when record_trace is set
};

struct NullObserver {
    template <class... Args>
    void operator()(Args&&...) const {}
};

// Executes interactions until the horizon, or until a silent protocol goes
// silent, whichever is first. The optional observer is invoked after every
// interaction as observer(step_index, config, initiator, responder).
//
// Hindsight convergence is tracked online (last incorrect index plus the
// stability margin), equivalent to measure_convergence over the recorded
// timeline; a run that ends silent has certain stability and skips the
// margin requirement.
template <class P, class Observer = NullObserver>
RunResult<P> run(Configuration<P> config, const Params& p, RngStream& rng,
                 RunOptions opts = {}, Observer observer = {}) {
    RunResult<P> res;
    res.metrics.n = p.n;

    detail::CorrectnessTracker<P> tracker;
    tracker.reset(config, p);

    bool has_incorrect = false;
    std::uint64_t last_incorrect = 0;
    const auto note = [&](std::uint64_t idx, bool correct_now) {
        if (!correct_now) {
            has_incorrect = true;
            last_incorrect = idx;
        }
        if (opts.record_trace) res.timeline.push_back(correct_now ? 1 : 0);
    };

    bool silent_now = false;
    if constexpr (P::kSilent) {
        if (tracker.correct(config) && P::silent(config, p)) {
            res.metrics.silence_interaction = 0;
            silent_now = true;
        }
    }
    note(0, tracker.correct(config));

    std::uint64_t t = 0;
    while (!silent_now && t < p.max_interactions) {
        const auto [i, j] = pick_pair(rng, p.n);
        auto& si = config[static_cast<std::size_t>(i)];
        auto& sj = config[static_cast<std::size_t>(j)];
        tracker.remove(si);
        tracker.remove(sj);
        StepOutcome out = P::step(si, sj, p, rng);
        P::validate(si, p);
        P::validate(sj, p);
        tracker.add(si);
        tracker.add(sj);
        ++t;
        res.metrics.reset_triggers += static_cast<std::uint64_t>(out.triggers);
        const bool correct_now = tracker.correct(config);
        note(t, correct_now);
        if constexpr (P::kSilent) {
            // Only a change can make a non-silent configuration silent, and a
            // silent one is always correct - cheap gate before the full scan.
            if (out.changed && correct_now && P::silent(config, p)) {
                res.metrics.silence_interaction = t;
                silent_now = true;
            }
        }
        observer(t, std::as_const(config), i, j);
    }

    res.metrics.interactions = t;
    res.metrics.timed_out = !silent_now && t >= p.max_interactions;

    const std::uint64_t entries = t + 1;
    const std::uint64_t trailing = has_incorrect ? entries - 1 - last_incorrect : entries;
    res.metrics.stable_tail = silent_now || trailing >= p.tail_margin;
    if (res.metrics.stable_tail) {
        if (!has_incorrect)
            res.metrics.convergence_interaction = 0; // initially correct
        else if (trailing > 0)
            res.metrics.convergence_interaction = last_incorrect + 1;
    }

    res.final_config = std::move(config);
    return res;
}

} // namespace popsim
