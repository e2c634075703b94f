#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "popsim/protocols/registry.hpp"

using namespace popsim;

TEST_CASE("protocol names round-trip") {
    for (ProtocolId id : {ProtocolId::cai, ProtocolId::linear_time, ProtocolId::linear_state,
                          ProtocolId::log_time, ProtocolId::obs})
        REQUIRE(protocol_from_name(protocol_name(id)) == id);
    REQUIRE_THROWS_AS(protocol_from_name("nope"), InvalidArgumentError);
}

TEST_CASE("cai uses exactly n states") {
    const StateCount c = count_states(ProtocolId::cai, Params::make(7));
    REQUIRE(c.exact);
    REQUIRE(c.value == 7);
}

TEST_CASE("obs uses six states") {
    const StateCount c = count_states(ProtocolId::obs, Params::make(3));
    REQUIRE(c.exact);
    REQUIRE(c.value == 6);
}

TEST_CASE("linear_state state count matches the role sum") {
    // n=10: log_n=3, so 19 + 41 + (180 + 1224 + 1) = 1465
    const StateCount c = count_states(ProtocolId::linear_state, Params::make(10));
    REQUIRE(c.exact);
    REQUIRE(c.value == 1465);
}

TEST_CASE("linear_time count matches enumeration at tiny scale") {
    Params p = Params::make(2);
    p.name_space = 4;
    const StateCount c = count_states(ProtocolId::linear_time, p);
    REQUIRE(c.exact);
    std::vector<proto::LinearTime::State> states;
    proto::LinearTime::enumerate_states(p, states);
    REQUIRE(c.value == states.size());
}

TEST_CASE("linear_time count falls back to a logarithm at full scale") {
    const Params p = Params::make(100);
    const StateCount c = count_states(ProtocolId::linear_time, p);
    REQUIRE_FALSE(c.exact);
    // n * name_space * C(name_space - 1, n - 1) is a lower bound
    const double lower = std::log(100.0) + std::log(1e6) +
                         (std::lgamma(1e6) - std::lgamma(100.0) - std::lgamma(1e6 - 99.0));
    REQUIRE(c.log_value > lower * 0.99);
}

TEST_CASE("log_time state count is undefined") {
    REQUIRE_THROWS_AS(count_states(ProtocolId::log_time, Params::make(4)),
                      UnsupportedProtocolError);
}

TEST_CASE("enumerations match the exact counts") {
    Params p = Params::make(3);
    p.name_space = 3;
    std::vector<proto::LinearState::State> ls;
    proto::LinearState::enumerate_states(p, ls);
    REQUIRE(ls.size() == count_states(ProtocolId::linear_state, p).value);

    std::vector<proto::Cai::State> cai;
    proto::Cai::enumerate_states(p, cai);
    REQUIRE(cai.size() == 3);

    std::vector<proto::ObsSsle::State> obs;
    proto::ObsSsle::enumerate_states(p, obs);
    REQUIRE(obs.size() == 6);
}
