#include <catch2/catch_amalgamated.hpp>

#include "popsim/adversary.hpp"
#include "popsim/engine.hpp"
#include "popsim/protocols/registry.hpp"

using namespace popsim;
using namespace popsim::proto;

TEST_CASE("apply_pair touches only the selected agents") {
    Params p = Params::make(5);
    RngStream rng(1);
    Configuration<Cai> config{{3}, {3}, {1}, {0}, {2}};
    apply_pair<Cai>(config, 0, 1, p, rng);
    REQUIRE(config[0].rank == 3);
    REQUIRE(config[1].rank == 4);
    REQUIRE(config[2].rank == 1);
    REQUIRE(config[3].rank == 0);
    REQUIRE(config[4].rank == 2);
}

TEST_CASE("step leaves unselected agents alone across protocols") {
    Params p = Params::make(6);
    p.max_interactions = 1;
    RngStream rng(7);
    auto config = generate_initial<LinearState>(InitKind::uniform_random, p, rng);
    for (int trial = 0; trial < 300; ++trial) {
        auto before = config;
        const auto [outcome, event] = step<LinearState>(config, p, rng, 1);
        (void)outcome;
        for (int k = 0; k < p.n; ++k) {
            if (k == event.initiator || k == event.responder) continue;
            REQUIRE(config[static_cast<std::size_t>(k)] ==
                    before[static_cast<std::size_t>(k)]);
        }
    }
}

TEST_CASE("detect_correct accepts exactly rank permutations") {
    const Params p = Params::make(3);
    Configuration<Cai> perm{{2}, {0}, {1}};
    Configuration<Cai> dup{{1}, {1}, {2}};
    REQUIRE(detect_correct<Cai>(perm, p));
    REQUIRE_FALSE(detect_correct<Cai>(dup, p));

    Configuration<LinearState> unsettled{LsSettled{1, true}, LsSettled{2, true},
                                         LsUnsettled{4}};
    REQUIRE_FALSE(detect_correct<LinearState>(unsettled, p));

    Configuration<LogTime> lt;
    for (int i = 0; i < 3; ++i)
        lt.push_back(LogTimeState{i + 1, static_cast<std::uint64_t>(i + 1),
                                  make_pair_roster({{i + 1, static_cast<std::uint64_t>(i + 1)}}),
                                  {0, p.c_max}});
    REQUIRE(detect_correct<LogTime>(lt, p));
    lt[0].rank = 2;
    REQUIRE_FALSE(detect_correct<LogTime>(lt, p));
}

TEST_CASE("a resetting agent makes linear_time incorrect") {
    const Params p = Params::make(3);
    RngStream rng(4);
    auto config = generate_initial<LinearTime>(InitKind::correct_ranked, p, rng);
    REQUIRE(detect_correct<LinearTime>(config, p));
    config[1] = LinearTimeState(Resetting::dormant(3));
    REQUIRE_FALSE(detect_correct<LinearTime>(config, p));
}

// Locality across protocols: the multiset difference between successive
// configurations touches at most the two selected agents.
TEST_CASE("each interaction touches at most two agents") {
    Params p = Params::make(6);
    p.max_interactions = 1;
    RngStream rng(12);
    auto config = generate_initial<LogTime>(InitKind::stale_phase, p, rng);
    for (int trial = 0; trial < 400; ++trial) {
        auto before = config;
        const auto [outcome, event] = step<LogTime>(config, p, rng, 1);
        (void)outcome;
        int touched = 0;
        for (int k = 0; k < p.n; ++k)
            if (!(config[static_cast<std::size_t>(k)] ==
                  before[static_cast<std::size_t>(k)]))
                ++touched;
        REQUIRE(touched <= 2);
        for (int k = 0; k < p.n; ++k) {
            if (k == event.initiator || k == event.responder) continue;
            REQUIRE(config[static_cast<std::size_t>(k)] ==
                    before[static_cast<std::size_t>(k)]);
        }
    }
}

TEST_CASE("detect_silent rejects the non-silent protocol") {
    const Params p = Params::make(3);
    Configuration<LogTime> lt;
    for (int i = 0; i < 3; ++i)
        lt.push_back(LogTimeState{i + 1, static_cast<std::uint64_t>(i + 1),
                                  make_pair_roster({{i + 1, static_cast<std::uint64_t>(i + 1)}}),
                                  {0, p.c_max}});
    REQUIRE_THROWS_AS(detect_silent<LogTime>(lt, p), UnsupportedProtocolError);
}

TEST_CASE("a colliding pair at n=2 silences on the first interaction") {
    Params p = Params::make(2);
    p.max_interactions = 100;
    RngStream rng(33);
    Configuration<Cai> config{{0}, {0}};
    const auto res = run<Cai>(config, p, rng);
    REQUIRE(res.metrics.silence_interaction.has_value());
    REQUIRE(*res.metrics.silence_interaction == 1);
    REQUIRE_FALSE(res.metrics.timed_out);
    std::vector<int> ranks{res.final_config[0].rank, res.final_config[1].rank};
    std::sort(ranks.begin(), ranks.end());
    REQUIRE(ranks == std::vector<int>{0, 1});
}

TEST_CASE("an empty horizon reports a timeout without an error") {
    Params p = Params::make(3);
    p.max_interactions = 0;
    RngStream rng(1);
    Configuration<Cai> config{{0}, {0}, {1}};
    const auto res = run<Cai>(config, p, rng);
    REQUIRE(res.metrics.timed_out);
    REQUIRE(res.metrics.interactions == 0);
}

TEST_CASE("an initially silent configuration stops at zero") {
    Params p = Params::make(3);
    p.max_interactions = 50;
    RngStream rng(1);
    Configuration<Cai> config{{0}, {1}, {2}};
    const auto res = run<Cai>(config, p, rng);
    REQUIRE(res.metrics.interactions == 0);
    REQUIRE(*res.metrics.silence_interaction == 0);
    REQUIRE(*res.metrics.convergence_interaction == 0);
    REQUIRE_FALSE(res.metrics.timed_out);
}

// Absorbing-chain value: from the worst configuration at n=3 the expected
// silence time is exactly 6 interactions.
TEST_CASE("mean silence from the n=3 worst case is close to 6") {
    Params p = Params::make(3);
    p.max_interactions = 10000;
    double sum = 0.0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        RngStream rng = RngStream::derive(99, 3, static_cast<std::uint64_t>(t));
        Configuration<Cai> config{{0}, {0}, {1}};
        const auto res = run<Cai>(config, p, rng);
        REQUIRE(res.metrics.silence_interaction.has_value());
        sum += static_cast<double>(*res.metrics.silence_interaction);
    }
    REQUIRE(sum / trials == Catch::Approx(6.0).margin(0.2));
}

TEST_CASE("identical seeds give identical runs and metrics") {
    Params p = Params::make(8);
    p.max_interactions = 20000;
    for (int which = 0; which < 2; ++which) {
        RngStream rng1(1234), rng2(1234);
        auto c1 = generate_initial<LinearState>(InitKind::rank_pairs, p, rng1);
        auto c2 = generate_initial<LinearState>(InitKind::rank_pairs, p, rng2);
        const auto r1 = run<LinearState>(c1, p, rng1);
        const auto r2 = run<LinearState>(c2, p, rng2);
        REQUIRE(r1.metrics.interactions == r2.metrics.interactions);
        REQUIRE(r1.metrics.silence_interaction == r2.metrics.silence_interaction);
        REQUIRE(r1.metrics.reset_triggers == r2.metrics.reset_triggers);
        REQUIRE(r1.final_config.size() == r2.final_config.size());
        for (std::size_t i = 0; i < r1.final_config.size(); ++i)
            REQUIRE(r1.final_config[i] == r2.final_config[i]);
    }
}

TEST_CASE("online convergence equals the timeline measurement") {
    Params p = Params::make(4);
    p.max_interactions = 4000;
    p.tail_margin = 50;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RngStream rng(seed);
        auto config = generate_initial<Cai>(InitKind::uniform_random, p, rng);
        const auto res = run<Cai>(config, p, rng, RunOptions{.record_trace = true});
        const bool certain = res.metrics.silence_interaction.has_value();
        const auto conv = measure_convergence(res.timeline, p.tail_margin, certain);
        REQUIRE(res.metrics.convergence_interaction == conv.convergence_interaction);
        REQUIRE(res.metrics.stable_tail == conv.stable_tail);
        if (res.metrics.convergence_interaction && res.metrics.silence_interaction)
            REQUIRE(*res.metrics.convergence_interaction <=
                    *res.metrics.silence_interaction);
    }
}

// A silent configuration admits no state-changing transition; checked
// exhaustively over all ordered pairs for sampled silent endpoints.
TEST_CASE("silent endpoints are fixed points of every pair") {
    Params p = Params::make(4);
    p.max_interactions = 100000;
    RngStream rng(5);
    auto config = generate_initial<Cai>(InitKind::cai_worst, p, rng);
    const auto res = run<Cai>(config, p, rng);
    REQUIRE(res.metrics.silence_interaction.has_value());
    for (int i = 0; i < p.n; ++i) {
        for (int j = 0; j < p.n; ++j) {
            if (i == j) continue;
            auto copy = res.final_config;
            RngStream r2(1);
            apply_pair<Cai>(copy, i, j, p, r2);
            for (int k = 0; k < p.n; ++k)
                REQUIRE(copy[static_cast<std::size_t>(k)] ==
                        res.final_config[static_cast<std::size_t>(k)]);
        }
    }
}
