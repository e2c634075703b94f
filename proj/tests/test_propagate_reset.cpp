#include <catch2/catch_amalgamated.hpp>

#include "popsim/protocols/linear_time.hpp"
#include "popsim/rng.hpp"

using namespace popsim;
using namespace popsim::proto;

namespace {

const Params& params() {
    static const Params p = Params::make(4);
    return p;
}

LinearTimeState collecting(std::uint64_t name) {
    return LinearTimeState(LtCollecting{1, name, make_roster({name})});
}

// Reset routine standing in for a main protocol: leaves the Resetting role.
void stub_reset(LinearTimeState& s, RngStream&) { s = collecting(1); }

} // namespace

TEST_CASE("a propagating agent converts its partner and both step down") {
    RngStream rng(1);
    LinearTimeState a{Resetting::propagating(5)};
    LinearTimeState b = collecting(9);
    propagate_reset(a, b, params(), stub_reset, rng);
    REQUIRE(as_resetting(a) != nullptr);
    REQUIRE(as_resetting(b) != nullptr);
    REQUIRE(as_resetting(a)->resetcount == 4);
    REQUIRE(as_resetting(b)->resetcount == 4);
}

TEST_CASE("a dormant timer hitting zero awakens that agent only") {
    RngStream rng(2);
    LinearTimeState a{Resetting::dormant(1)};
    LinearTimeState b{Resetting::dormant(7)};
    propagate_reset(a, b, params(), stub_reset, rng);
    REQUIRE(as_resetting(a) == nullptr);
    REQUIRE(as_resetting(b) != nullptr);
    REQUIRE(as_resetting(b)->delaytimer == 6);
}

TEST_CASE("a dormant agent meeting a computing partner awakens immediately") {
    RngStream rng(3);
    LinearTimeState a{Resetting::dormant(50)};
    LinearTimeState b = collecting(2);
    propagate_reset(a, b, params(), stub_reset, rng);
    REQUIRE(as_resetting(a) == nullptr);
    REQUIRE(std::get_if<LtCollecting>(&b) != nullptr);
}

TEST_CASE("a propagating partner re-raises a dormant agent") {
    RngStream rng(4);
    LinearTimeState a{Resetting::dormant(3)};
    LinearTimeState b{Resetting::propagating(3)};
    propagate_reset(a, b, params(), stub_reset, rng);
    // max(0-1, 3-1, 0) = 2: both propagating, the delay timer is dropped
    REQUIRE(as_resetting(a)->resetcount == 2);
    REQUIRE(as_resetting(a)->delaytimer == Resetting::kNoDelay);
    REQUIRE(as_resetting(b)->resetcount == 2);
}

TEST_CASE("a counter reaching zero this interaction gets a fresh timer") {
    RngStream rng(5);
    LinearTimeState a{Resetting::propagating(1)};
    LinearTimeState b = collecting(4);
    propagate_reset(a, b, params(), stub_reset, rng);
    // both drop to max(0, -1, 0) = 0; a just became dormant, b was converted
    REQUIRE(as_resetting(a)->resetcount == 0);
    REQUIRE(as_resetting(a)->delaytimer == params().d_max);
    REQUIRE(as_resetting(b)->resetcount == 0);
    REQUIRE(as_resetting(b)->delaytimer == params().d_max - 1);
}

// The propagating-variable law: whenever both agents leave the interaction
// still Resetting, both counters equal max(a-1, b-1, 0), in either order.
TEST_CASE("resetcount max rule is order independent") {
    RngStream rng(6);
    for (int trial = 0; trial < 2000; ++trial) {
        const int rc_a = static_cast<int>(rng.uniform_below(
            static_cast<std::uint64_t>(params().r_max) + 1));
        const int rc_b = static_cast<int>(rng.uniform_below(
            static_cast<std::uint64_t>(params().r_max) + 1));
        const int dt_a = static_cast<int>(rng.uniform_below(
            static_cast<std::uint64_t>(params().d_max)) + 1);
        const int dt_b = static_cast<int>(rng.uniform_below(
            static_cast<std::uint64_t>(params().d_max)) + 1);
        const auto make = [&](int rc, int dt) {
            return rc == 0 ? LinearTimeState{Resetting::dormant(dt)}
                           : LinearTimeState{Resetting::propagating(rc)};
        };
        LinearTimeState a1 = make(rc_a, dt_a), b1 = make(rc_b, dt_b);
        LinearTimeState a2 = make(rc_b, dt_b), b2 = make(rc_a, dt_a);
        RngStream r1(trial), r2(trial);
        propagate_reset(a1, b1, params(), stub_reset, r1);
        propagate_reset(a2, b2, params(), stub_reset, r2);
        const int expected = std::max({rc_a - 1, rc_b - 1, 0});
        if (as_resetting(a1) && as_resetting(b1)) {
            REQUIRE(as_resetting(a1)->resetcount == expected);
            REQUIRE(as_resetting(b1)->resetcount == expected);
        }
        if (as_resetting(a2) && as_resetting(b2)) {
            REQUIRE(as_resetting(a2)->resetcount == expected);
            REQUIRE(as_resetting(b2)->resetcount == expected);
        }
    }
}

TEST_CASE("a reset routine that stays Resetting is rejected") {
    RngStream rng(7);
    LinearTimeState a{Resetting::dormant(0)};
    LinearTimeState b = collecting(3);
    const auto bad_reset = [](LinearTimeState& s, RngStream&) {
        s = LinearTimeState{Resetting::dormant(5)};
    };
    REQUIRE_THROWS_AS(propagate_reset(a, b, params(), bad_reset, rng), InternalError);
}

TEST_CASE("the first argument must be Resetting") {
    RngStream rng(8);
    LinearTimeState a = collecting(1);
    LinearTimeState b = collecting(2);
    REQUIRE_THROWS_AS(propagate_reset(a, b, params(), stub_reset, rng), InternalError);
}
