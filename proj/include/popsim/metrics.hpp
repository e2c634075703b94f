#pragma once

#include <cstdint>
#include <optional>
#include <span>

namespace popsim {

// Per-run measurements. parallel_time is derived (interactions / n) so the
// identity parallel_time * n = interactions holds by construction.
struct RunMetrics {
    std::uint64_t interactions = 0;
    int n = 0;
    std::optional<std::uint64_t> silence_interaction;
    std::optional<std::uint64_t> convergence_interaction;
    bool stable_tail = false;
    bool timed_out = false;
    std::uint64_t reset_triggers = 0;

    double parallel_time() const {
        return static_cast<double>(interactions) / static_cast<double>(n);
    }
};

struct ConvergenceResult {
    std::optional<std::uint64_t> convergence_interaction;
    bool stable_tail = false;
};

// Hindsight convergence over a correctness timeline. Entry 0 describes the
// initial configuration, entry t the configuration after interaction t.
// Convergence is 1 + the index of the last incorrect entry (0 when the run
// was correct throughout), reported only when at least `tail_margin` trailing
// entries are correct. `certain_tail` bypasses the margin for runs whose
// stability is already proven (the run ended silent).
inline ConvergenceResult measure_convergence(std::span<const char> timeline,
                                             std::uint64_t tail_margin,
                                             bool certain_tail = false) {
    ConvergenceResult res;
    if (timeline.empty()) return res;
    std::size_t last_false = timeline.size(); // sentinel: none
    for (std::size_t i = timeline.size(); i-- > 0;) {
        if (!timeline[i]) {
            last_false = i;
            break;
        }
    }
    const std::uint64_t trailing_true =
        last_false == timeline.size() ? timeline.size() : timeline.size() - 1 - last_false;
    res.stable_tail = certain_tail || trailing_true >= tail_margin;
    if (last_false == timeline.size()) {
        if (res.stable_tail) res.convergence_interaction = 0; // initially correct
        return res;
    }
    if (trailing_true == 0) return res; // incorrect at the end: unresolved
    if (res.stable_tail)
        res.convergence_interaction = static_cast<std::uint64_t>(last_false) + 1;
    return res;
}

} // namespace popsim
