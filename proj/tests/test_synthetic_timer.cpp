#include <catch2/catch_amalgamated.hpp>

#include "popsim/protocols/synthetic_timer.hpp"
#include "popsim/rng.hpp"

using namespace popsim;
using namespace popsim::proto;

TEST_CASE("timer parameters derive from n") {
    const auto sp = SyntheticTimerParams::make(1000);
    // log2(ln 1000) = log2(6.907...) = 2.78...
    REQUIRE(sp.k == 2);
    REQUIRE(sp.m == 1434); // floor(4000 / 2.7884)
}

TEST_CASE("timer parameters match the floor formulas") {
    for (int n : {16, 100, 1000, 4096}) {
        const auto sp = SyntheticTimerParams::make(n);
        const double loglog = std::log2(std::log(static_cast<double>(n)));
        REQUIRE(sp.k == std::max(1, static_cast<int>(std::floor(loglog))));
        REQUIRE(sp.m == std::max(1, static_cast<int>(std::floor(4.0 * n / loglog))));
    }
}

TEST_CASE("a block containing a responder event does not advance the counter") {
    const SyntheticTimerParams sp{10, 4};
    SyntheticTimerFields t{5, 0, true};
    // responder in the middle of the block clears the flag
    synthetic_error_timer_step(t, false, sp);
    synthetic_error_timer_step(t, true, sp);
    synthetic_error_timer_step(t, false, sp);
    synthetic_error_timer_step(t, false, sp); // wrap
    REQUIRE(t.clock == 0);
    REQUIRE(t.errorcount == 5);
    REQUIRE(t.decrement); // re-armed at the wrap
}

TEST_CASE("an all-initiator block advances the counter at the wrap") {
    const SyntheticTimerParams sp{10, 4};
    SyntheticTimerFields t{5, 0, true};
    for (int i = 0; i < 4; ++i) synthetic_error_timer_step(t, false, sp);
    REQUIRE(t.errorcount == 6);
}

TEST_CASE("k=1 wraps every interaction") {
    const SyntheticTimerParams sp{100, 1};
    SyntheticTimerFields t{0, 0, true};
    synthetic_error_timer_step(t, false, sp); // initiator: flag survived, increment
    REQUIRE(t.errorcount == 1);
    synthetic_error_timer_step(t, true, sp); // responder clears, then wrap re-arms
    REQUIRE(t.errorcount == 1);
    synthetic_error_timer_step(t, false, sp);
    REQUIRE(t.errorcount == 2);
}

TEST_CASE("the counter exhausting raises the trigger") {
    const SyntheticTimerParams sp{3, 1};
    SyntheticTimerFields t{1, 0, true};
    REQUIRE_FALSE(synthetic_error_timer_step(t, false, sp)); // 1 -> 2
    REQUIRE(synthetic_error_timer_step(t, false, sp));       // 2 -> 0: exhausted
    REQUIRE(t.errorcount == 0);
}

TEST_CASE("block advance frequency approaches 2^-k under random roles") {
    const SyntheticTimerParams sp{1000000, 3};
    SyntheticTimerFields t{1, 0, true};
    RngStream rng(42);
    const int blocks = 40000;
    const int start = t.errorcount;
    for (int i = 0; i < blocks * sp.k; ++i)
        synthetic_error_timer_step(t, rng.bernoulli(0.5), sp);
    const double rate = static_cast<double>(t.errorcount - start) / blocks;
    REQUIRE(rate == Catch::Approx(1.0 / 8.0).margin(0.01));
}
