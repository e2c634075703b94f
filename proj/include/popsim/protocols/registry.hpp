#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "popsim/errors.hpp"
#include "popsim/params.hpp"
#include "popsim/protocols/cai.hpp"
#include "popsim/protocols/linear_state.hpp"
#include "popsim/protocols/linear_time.hpp"
#include "popsim/protocols/log_time.hpp"
#include "popsim/protocols/obs_ssle.hpp"

namespace popsim {

enum class ProtocolId { cai, linear_time, linear_state, log_time, obs };

inline std::string_view protocol_name(ProtocolId id) {
    switch (id) {
        case ProtocolId::cai: return proto::Cai::kName;
        case ProtocolId::linear_time: return proto::LinearTime::kName;
        case ProtocolId::linear_state: return proto::LinearState::kName;
        case ProtocolId::log_time: return proto::LogTime::kName;
        case ProtocolId::obs: return proto::ObsSsle::kName;
    }
    throw InvalidArgumentError("unknown protocol id");
}

inline ProtocolId protocol_from_name(std::string_view name) {
    if (name == proto::Cai::kName) return ProtocolId::cai;
    if (name == proto::LinearTime::kName) return ProtocolId::linear_time;
    if (name == proto::LinearState::kName) return ProtocolId::linear_state;
    if (name == proto::LogTime::kName) return ProtocolId::log_time;
    if (name == proto::ObsSsle::kName) return ProtocolId::obs;
    throw InvalidArgumentError("unknown protocol: " + std::string(name));
}

// Applies f with the protocol tag type for the runtime id.
template <class F>
decltype(auto) dispatch_protocol(ProtocolId id, F&& f) {
    switch (id) {
        case ProtocolId::cai: return f(proto::Cai{});
        case ProtocolId::linear_time: return f(proto::LinearTime{});
        case ProtocolId::linear_state: return f(proto::LinearState{});
        case ProtocolId::log_time: return f(proto::LogTime{});
        case ProtocolId::obs: return f(proto::ObsSsle{});
    }
    throw InvalidArgumentError("unknown protocol id");
}

// Size of a protocol's per-agent state space. The linear-time count explodes
// combinatorially, so it is carried as a natural log alongside the exact
// value whenever that fits a 64-bit integer.
struct StateCount {
    bool exact = false;
    std::uint64_t value = 0;
    double log_value = 0.0; // natural log of the count
};

namespace detail {

// log(Sum_{j=0..n-1} C(N-1, j)) via log-sum-exp.
inline double log_roster_choices(std::uint64_t name_space, int n) {
    const double nm1 = static_cast<double>(name_space - 1);
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms;
    terms.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j <= n - 1; ++j) {
        const double t = std::lgamma(nm1 + 1.0) - std::lgamma(static_cast<double>(j) + 1.0) -
                         std::lgamma(nm1 - j + 1.0);
        terms.push_back(t);
        max_term = std::max(max_term, t);
    }
    double sum = 0.0;
    for (double t : terms) sum += std::exp(t - max_term);
    return max_term + std::log(sum);
}

} // namespace detail

// cai: n.  obs: 6.
// linear_state: (2n-1) Settled + (4n+1) Unsettled + (r_max + d_max + 1) Resetting.
// linear_time: n ranks x name_space names x rosters-containing-own-name,
//              plus the Resetting states.
// log_time has an unbounded state set and is rejected.
inline StateCount count_states(ProtocolId id, const Params& p) {
    StateCount out;
    switch (id) {
        case ProtocolId::cai:
            out.exact = true;
            out.value = static_cast<std::uint64_t>(p.n);
            out.log_value = std::log(static_cast<double>(p.n));
            return out;
        case ProtocolId::obs:
            out.exact = true;
            out.value = 6;
            out.log_value = std::log(6.0);
            return out;
        case ProtocolId::linear_state: {
            out.exact = true;
            out.value = static_cast<std::uint64_t>(2 * p.n - 1) +
                        static_cast<std::uint64_t>(4 * p.n + 1) +
                        static_cast<std::uint64_t>(p.r_max + p.d_max + 1);
            out.log_value = std::log(static_cast<double>(out.value));
            return out;
        }
        case ProtocolId::linear_time: {
            const double log_collecting = std::log(static_cast<double>(p.n)) +
                                          std::log(static_cast<double>(p.name_space)) +
                                          detail::log_roster_choices(p.name_space, p.n);
            const double resetting = static_cast<double>(p.r_max + p.d_max + 1);
            const double log_total =
                log_collecting + std::log1p(resetting / std::exp(log_collecting));
            out.log_value = log_total;
            if (log_total < 43.0) { // comfortably below 2^63
                // recompute exactly
                std::uint64_t rosters = 0;
                std::uint64_t binom = 1; // C(name_space-1, j)
                for (int j = 0; j <= p.n - 1; ++j) {
                    if (j > 0)
                        binom = binom * (p.name_space - static_cast<std::uint64_t>(j)) /
                                static_cast<std::uint64_t>(j);
                    rosters += binom;
                }
                out.exact = true;
                out.value = static_cast<std::uint64_t>(p.n) * p.name_space * rosters +
                            static_cast<std::uint64_t>(p.r_max + p.d_max + 1);
                out.log_value = std::log(static_cast<double>(out.value));
            }
            return out;
        }
        case ProtocolId::log_time:
            throw UnsupportedProtocolError(
                "log_time has an unbounded state set; count_states is undefined");
    }
    throw InvalidArgumentError("unknown protocol id");
}

} // namespace popsim
