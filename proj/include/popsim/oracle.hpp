#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "popsim/engine.hpp"
#include "popsim/errors.hpp"
#include "popsim/params.hpp"
#include "popsim/protocols/registry.hpp"

namespace popsim {

// ---------------------------------------------------------------------------
// Branch enumeration: the transitions are written against a generic Rng
// concept, so the exact oracle can replay them over every probabilistic
// branch instead of sampling one.

class BranchRng {
public:
    struct Choice {
        std::uint64_t chosen = 0;
        std::uint64_t options = 0;
        double param = 0.0; // bernoulli success probability; unused for uniform
        bool is_bernoulli = false;

        double prob() const {
            if (is_bernoulli) return chosen == 0 ? param : 1.0 - param;
            return 1.0 / static_cast<double>(options);
        }
    };

    explicit BranchRng(std::vector<Choice>& path) : path_(path) {}

    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        return advance(bound, 0.0, false);
    }

    bool bernoulli(double p) {
        if (p >= 1.0) return true;
        if (p <= 0.0) return false;
        return advance(2, p, true) == 0;
    }

private:
    std::uint64_t advance(std::uint64_t options, double param, bool is_bernoulli) {
        if (pos_ < path_.size()) {
            const Choice& c = path_[pos_];
            if (c.options != options || c.is_bernoulli != is_bernoulli)
                throw InternalError("transition is not deterministic under branch replay");
            ++pos_;
            return c.chosen;
        }
        path_.push_back(Choice{0, options, param, is_bernoulli});
        ++pos_;
        return 0;
    }

    std::vector<Choice>& path_;
    std::size_t pos_ = 0;
};

// Runs `body(rng)` once per probabilistic branch; `on_leaf(prob)` fires after
// each run with that branch's probability. `body` must be a pure function of
// the branch choices.
template <class Body, class OnLeaf>
void for_each_branch(Body&& body, OnLeaf&& on_leaf) {
    std::vector<BranchRng::Choice> path;
    for (;;) {
        BranchRng rng(path);
        body(rng);
        double prob = 1.0;
        for (const auto& c : path) prob *= c.prob();
        on_leaf(prob);
        while (!path.empty() && path.back().chosen + 1 >= path.back().options)
            path.pop_back();
        if (path.empty()) return;
        path.back().chosen += 1;
    }
}

// ---------------------------------------------------------------------------
// Exact configuration graph over the full valid state space.

struct GraphOptions {
    bool canonical = true;          // collapse configurations up to agent permutation
    std::uint64_t budget = 5'000'000; // maximum number of nodes
};

struct ConfigGraphCore {
    int n = 0;
    bool canonical = true;
    std::size_t node_count = 0;
    std::vector<std::uint64_t> offsets; // CSR, node_count + 1
    std::vector<std::uint32_t> targets;
    std::vector<double> probs;
    std::vector<char> correct;
    std::vector<char> silent;

    std::size_t edge_count() const { return targets.size(); }
};

template <class P>
struct ConfigGraph {
    ConfigGraphCore core;
    std::vector<typename P::State> state_table;
    std::vector<std::uint32_t> node_states; // node_count * n state ids

    std::vector<typename P::State> config_of(std::uint32_t node) const {
        std::vector<typename P::State> config;
        config.reserve(static_cast<std::size_t>(core.n));
        for (int a = 0; a < core.n; ++a)
            config.push_back(
                state_table[node_states[static_cast<std::size_t>(node) * core.n + a]]);
        return config;
    }

    std::vector<std::string> describe(std::uint32_t node) const {
        std::vector<std::string> out;
        for (const auto& s : config_of(node)) out.push_back(P::to_string(s));
        return out;
    }
};

namespace detail {

struct TupleHash {
    std::size_t operator()(const std::vector<std::uint32_t>& v) const {
        std::size_t h = 0xcbf29ce484222325ULL;
        for (std::uint32_t x : v) {
            h ^= x;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
};

inline double log_node_count(std::size_t states, int n, bool canonical) {
    const double s = static_cast<double>(states);
    if (!canonical) return n * std::log(s);
    // C(states + n - 1, n)
    return std::lgamma(s + n) - std::lgamma(s) - std::lgamma(static_cast<double>(n) + 1.0);
}

} // namespace detail

// Enumerates every valid configuration as a node and aggregates edge
// probabilities over scheduler choice (uniform ordered pairs) and transition
// randomness (all branches). Self-stabilization quantifies over every start,
// so the node set is the whole space, not a reachability closure.
template <class P>
ConfigGraph<P> build_config_graph(const Params& p, GraphOptions opts = {}) {
    ConfigGraph<P> graph;
    graph.core.n = p.n;
    graph.core.canonical = opts.canonical;

    std::vector<typename P::State>& states = graph.state_table;
    P::enumerate_states(p, states);
    for (const auto& s : states) P::validate(s, p);

    const double log_nodes =
        detail::log_node_count(states.size(), p.n, opts.canonical);
    if (log_nodes > std::log(static_cast<double>(opts.budget)) + 1e-9) {
        const double count = std::exp(log_nodes);
        const std::string shown = count < 9e18
                                      ? std::to_string(static_cast<std::uint64_t>(
                                            std::llround(count)))
                                      : "exp(" + std::to_string(log_nodes) + ")";
        throw CapacityError("configuration count " + shown + " exceeds budget " +
                            std::to_string(opts.budget));
    }

    std::unordered_map<std::string, std::uint32_t> state_ids;
    for (std::uint32_t i = 0; i < states.size(); ++i)
        state_ids.emplace(P::to_string(states[i]), i);
    if (state_ids.size() != states.size())
        throw InternalError("state enumeration contains duplicates");

    // Generate all node tuples (nondecreasing when canonical).
    std::unordered_map<std::vector<std::uint32_t>, std::uint32_t, detail::TupleHash> node_ids;
    std::vector<std::uint32_t> tuple(static_cast<std::size_t>(p.n), 0);
    const std::uint32_t state_count = static_cast<std::uint32_t>(states.size());

    const auto emit_node = [&](const std::vector<std::uint32_t>& t) {
        const std::uint32_t id = static_cast<std::uint32_t>(node_ids.size());
        node_ids.emplace(t, id);
        graph.node_states.insert(graph.node_states.end(), t.begin(), t.end());
    };
    const auto gen = [&](auto&& self, int agent, std::uint32_t min_id) -> void {
        if (agent == p.n) {
            emit_node(tuple);
            return;
        }
        for (std::uint32_t s = opts.canonical ? min_id : 0; s < state_count; ++s) {
            tuple[static_cast<std::size_t>(agent)] = s;
            self(self, agent + 1, s);
        }
    };
    gen(gen, 0, 0);
    graph.core.node_count = node_ids.size();
    if (graph.core.node_count > opts.budget)
        throw CapacityError("configuration count " + std::to_string(graph.core.node_count) +
                            " exceeds budget " + std::to_string(opts.budget));

    const auto state_id_of = [&](const typename P::State& s) -> std::uint32_t {
        const auto it = state_ids.find(P::to_string(s));
        if (it == state_ids.end())
            throw InternalError("transition left the enumerated state space: " +
                                P::to_string(s));
        return it->second;
    };

    // Edges.
    graph.core.offsets.reserve(graph.core.node_count + 1);
    graph.core.offsets.push_back(0);
    graph.core.correct.resize(graph.core.node_count);
    graph.core.silent.resize(graph.core.node_count);

    const double pair_weight =
        1.0 / (static_cast<double>(p.n) * static_cast<double>(p.n - 1));
    std::vector<typename P::State> config(static_cast<std::size_t>(p.n));
    std::map<std::uint32_t, double> successors;
    std::vector<std::uint32_t> succ_tuple(static_cast<std::size_t>(p.n));

    for (std::uint32_t node = 0; node < graph.core.node_count; ++node) {
        const std::uint32_t* ids = &graph.node_states[static_cast<std::size_t>(node) * p.n];
        for (int a = 0; a < p.n; ++a) config[static_cast<std::size_t>(a)] = states[ids[a]];

        graph.core.correct[node] = detect_correct<P>(config, p) ? 1 : 0;
        if constexpr (P::kSilent)
            graph.core.silent[node] = P::silent(config, p) ? 1 : 0;

        successors.clear();
        for (int i = 0; i < p.n; ++i) {
            for (int j = 0; j < p.n; ++j) {
                if (i == j) continue;
                typename P::State sa{}, sb{};
                for_each_branch(
                    [&](BranchRng& rng) {
                        sa = config[static_cast<std::size_t>(i)];
                        sb = config[static_cast<std::size_t>(j)];
                        P::step(sa, sb, p, rng);
                    },
                    [&](double prob) {
                        P::validate(sa, p);
                        P::validate(sb, p);
                        for (int a = 0; a < p.n; ++a)
                            succ_tuple[static_cast<std::size_t>(a)] = ids[a];
                        succ_tuple[static_cast<std::size_t>(i)] = state_id_of(sa);
                        succ_tuple[static_cast<std::size_t>(j)] = state_id_of(sb);
                        if (opts.canonical)
                            std::sort(succ_tuple.begin(), succ_tuple.end());
                        const auto it = node_ids.find(succ_tuple);
                        if (it == node_ids.end())
                            throw InternalError("transition left the configuration space");
                        successors[it->second] += pair_weight * prob;
                    });
            }
        }

        double total = 0.0;
        for (const auto& [succ, prob] : successors) {
            graph.core.targets.push_back(succ);
            graph.core.probs.push_back(prob);
            total += prob;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw InternalError("outgoing probabilities sum to " + std::to_string(total));
        graph.core.offsets.push_back(graph.core.targets.size());
    }
    return graph;
}

// ---------------------------------------------------------------------------
// Probability-1 stabilization check: every terminal SCC must consist solely
// of correct configurations.

struct VerificationReport {
    bool ok = false;
    std::size_t node_count = 0;
    std::size_t scc_count = 0;
    std::size_t silent_node_count = 0; // canonical silent configurations
    std::optional<std::uint32_t> counterexample_node;
    std::vector<std::string> counterexample; // human-readable configuration listing
};

namespace detail {

// Iterative Tarjan; returns the component id per node (reverse topological:
// a component's id is larger than those of components it can reach).
inline std::size_t strongly_connected_components(const ConfigGraphCore& g,
                                                 std::vector<std::uint32_t>& comp) {
    const std::size_t n = g.node_count;
    comp.assign(n, 0);
    std::vector<std::uint32_t> index(n, 0), lowlink(n, 0);
    std::vector<char> on_stack(n, 0), visited(n, 0);
    std::vector<std::uint32_t> stack;
    std::size_t comp_count = 0;
    std::uint32_t next_index = 1;

    struct Frame {
        std::uint32_t node;
        std::uint64_t edge;
    };
    std::vector<Frame> call;

    for (std::uint32_t root = 0; root < n; ++root) {
        if (visited[root]) continue;
        call.push_back({root, g.offsets[root]});
        visited[root] = 1;
        index[root] = lowlink[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;

        while (!call.empty()) {
            Frame& f = call.back();
            if (f.edge < g.offsets[f.node + 1]) {
                const std::uint32_t w = g.targets[f.edge++];
                if (!visited[w]) {
                    visited[w] = 1;
                    index[w] = lowlink[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, g.offsets[w]});
                } else if (on_stack[w]) {
                    lowlink[f.node] = std::min(lowlink[f.node], index[w]);
                }
            } else {
                const std::uint32_t v = f.node;
                call.pop_back();
                if (!call.empty())
                    lowlink[call.back().node] = std::min(lowlink[call.back().node], lowlink[v]);
                if (lowlink[v] == index[v]) {
                    for (;;) {
                        const std::uint32_t w = stack.back();
                        stack.pop_back();
                        on_stack[w] = 0;
                        comp[w] = static_cast<std::uint32_t>(comp_count);
                        if (w == v) break;
                    }
                    ++comp_count;
                }
            }
        }
    }
    return comp_count;
}

} // namespace detail

inline VerificationReport verify_self_stabilizing_core(const ConfigGraphCore& g) {
    VerificationReport report;
    report.node_count = g.node_count;

    std::vector<std::uint32_t> comp;
    report.scc_count = detail::strongly_connected_components(g, comp);

    std::vector<char> terminal(report.scc_count, 1);
    for (std::uint32_t u = 0; u < g.node_count; ++u)
        for (std::uint64_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e)
            if (comp[g.targets[e]] != comp[u]) terminal[comp[u]] = 0;

    report.ok = true;
    for (std::uint32_t u = 0; u < g.node_count; ++u) {
        if (terminal[comp[u]] && !g.correct[u]) {
            report.ok = false;
            report.counterexample_node = u;
            break;
        }
    }
    return report;
}

template <class P>
VerificationReport verify_self_stabilizing(const ConfigGraph<P>& g) {
    VerificationReport report = verify_self_stabilizing_core(g.core);
    for (std::uint32_t u = 0; u < g.core.node_count; ++u)
        if (g.core.silent[u]) ++report.silent_node_count;
    if (report.counterexample_node)
        report.counterexample = g.describe(*report.counterexample_node);
    return report;
}

// ---------------------------------------------------------------------------
// Exact expected hitting times by absorbing-chain solve.

enum class HitTarget { silent, correct };

// Expected interactions from `start` until the target label first holds.
// Dense elimination below `dense_threshold` unknowns, Gauss-Seidel above,
// both to residual 1e-10.
inline double expected_hitting_time_core(const ConfigGraphCore& g, std::uint32_t start,
                                         HitTarget target,
                                         std::size_t dense_threshold = 10'000) {
    const std::vector<char>& label = target == HitTarget::silent ? g.silent : g.correct;
    if (label[start]) return 0.0;

    // Restrict to nodes reachable from start.
    std::vector<std::uint32_t> order;
    std::vector<char> reached(g.node_count, 0);
    order.push_back(start);
    reached[start] = 1;
    for (std::size_t qi = 0; qi < order.size(); ++qi) {
        const std::uint32_t u = order[qi];
        if (label[u]) continue; // absorbing
        for (std::uint64_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
            const std::uint32_t w = g.targets[e];
            if (!reached[w]) {
                reached[w] = 1;
                order.push_back(w);
            }
        }
    }

    // Reverse reachability from the target set confirms almost-sure hitting.
    {
        std::vector<std::vector<std::uint32_t>> rev(g.node_count);
        for (const std::uint32_t u : order) {
            if (label[u]) continue;
            for (std::uint64_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e)
                if (reached[g.targets[e]]) rev[g.targets[e]].push_back(u);
        }
        std::vector<char> hits(g.node_count, 0);
        std::vector<std::uint32_t> queue;
        for (const std::uint32_t u : order)
            if (label[u]) {
                hits[u] = 1;
                queue.push_back(u);
            }
        for (std::size_t qi = 0; qi < queue.size(); ++qi)
            for (const std::uint32_t w : rev[queue[qi]])
                if (!hits[w]) {
                    hits[w] = 1;
                    queue.push_back(w);
                }
        for (const std::uint32_t u : order)
            if (!hits[u])
                throw DomainError(
                    "target set is not almost-surely reachable from the start configuration");
    }

    // Unknowns: reachable non-target nodes.
    std::vector<std::uint32_t> unknown_of(g.node_count, UINT32_MAX);
    std::vector<std::uint32_t> nodes;
    for (const std::uint32_t u : order)
        if (!label[u]) {
            unknown_of[u] = static_cast<std::uint32_t>(nodes.size());
            nodes.push_back(u);
        }
    const std::size_t m = nodes.size();

    if (m <= dense_threshold) {
        // x = 1 + Q x, solved by Gaussian elimination with partial pivoting.
        std::vector<double> a(m * (m + 1), 0.0);
        for (std::size_t r = 0; r < m; ++r) {
            const std::uint32_t u = nodes[r];
            a[r * (m + 1) + r] = 1.0;
            a[r * (m + 1) + m] = 1.0;
            for (std::uint64_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
                const std::uint32_t w = g.targets[e];
                if (unknown_of[w] != UINT32_MAX)
                    a[r * (m + 1) + unknown_of[w]] -= g.probs[e];
            }
        }
        for (std::size_t col = 0; col < m; ++col) {
            std::size_t pivot = col;
            for (std::size_t r = col + 1; r < m; ++r)
                if (std::abs(a[r * (m + 1) + col]) > std::abs(a[pivot * (m + 1) + col]))
                    pivot = r;
            if (pivot != col)
                for (std::size_t c = col; c <= m; ++c)
                    std::swap(a[pivot * (m + 1) + c], a[col * (m + 1) + c]);
            const double d = a[col * (m + 1) + col];
            if (std::abs(d) < 1e-14)
                throw DomainError("hitting-time system is singular");
            for (std::size_t r = col + 1; r < m; ++r) {
                const double factor = a[r * (m + 1) + col] / d;
                if (factor == 0.0) continue;
                for (std::size_t c = col; c <= m; ++c)
                    a[r * (m + 1) + c] -= factor * a[col * (m + 1) + c];
            }
        }
        std::vector<double> x(m, 0.0);
        for (std::size_t r = m; r-- > 0;) {
            double v = a[r * (m + 1) + m];
            for (std::size_t c = r + 1; c < m; ++c) v -= a[r * (m + 1) + c] * x[c];
            x[r] = v / a[r * (m + 1) + r];
        }
        return x[unknown_of[start]];
    }

    // Gauss-Seidel sweeps until the residual drops below 1e-10.
    std::vector<double> x(m, 0.0);
    for (std::size_t iter = 0; iter < 1'000'000; ++iter) {
        double max_residual = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
            const std::uint32_t u = nodes[r];
            double sum = 1.0;
            double self = 0.0;
            for (std::uint64_t e = g.offsets[u]; e < g.offsets[u + 1]; ++e) {
                const std::uint32_t w = g.targets[e];
                if (w == u) {
                    self += g.probs[e];
                } else if (unknown_of[w] != UINT32_MAX) {
                    sum += g.probs[e] * x[unknown_of[w]];
                }
            }
            const double next = sum / (1.0 - self);
            max_residual = std::max(max_residual, std::abs(next - x[r]));
            x[r] = next;
        }
        if (max_residual <= 1e-10) return x[unknown_of[start]];
    }
    throw DomainError("hitting-time iteration failed to converge");
}

// Node lookup for a concrete configuration (sorted when canonical).
template <class P>
std::uint32_t find_node(const ConfigGraph<P>& g, const std::vector<typename P::State>& config) {
    std::vector<std::string> keys;
    for (const auto& s : config) keys.push_back(P::to_string(s));
    std::unordered_map<std::string, std::uint32_t> state_ids;
    for (std::uint32_t i = 0; i < g.state_table.size(); ++i)
        state_ids.emplace(P::to_string(g.state_table[i]), i);
    std::vector<std::uint32_t> tuple;
    for (const auto& k : keys) {
        const auto it = state_ids.find(k);
        if (it == state_ids.end()) throw DomainError("configuration uses an unknown state");
        tuple.push_back(it->second);
    }
    if (g.core.canonical) std::sort(tuple.begin(), tuple.end());
    for (std::uint32_t node = 0; node < g.core.node_count; ++node) {
        const std::uint32_t* ids = &g.node_states[static_cast<std::size_t>(node) * g.core.n];
        if (std::equal(tuple.begin(), tuple.end(), ids)) return node;
    }
    throw DomainError("configuration not present in the graph");
}

template <class P>
double expected_hitting_time(const ConfigGraph<P>& g,
                             const std::vector<typename P::State>& start, HitTarget target) {
    return expected_hitting_time_core(g.core, find_node(g, start), target);
}

// ---------------------------------------------------------------------------
// Barrier rank of the n-state protocol.

// Rank counts m_r over a cai configuration.
inline std::vector<int> cai_rank_counts(const std::vector<proto::CaiState>& config, int n) {
    std::vector<int> m(static_cast<std::size_t>(n), 0);
    for (const auto& s : config) ++m[static_cast<std::size_t>(s.rank)];
    return m;
}

// Prefix condition: for all r, sum_{d=0}^{r} m_{(k-d) mod n} <= r + 1.
inline bool barrier_condition_holds(const std::vector<int>& m, int k) {
    const int n = static_cast<int>(m.size());
    int sum = 0;
    for (int r = 0; r < n; ++r) {
        sum += m[static_cast<std::size_t>(((k - r) % n + n) % n)];
        if (sum > r + 1) return false;
    }
    return true;
}

// Smallest rank index minimizing the prefix sums S_i = sum_{j<=i} (m_j - 1);
// that rank satisfies the barrier condition in every reachable configuration.
inline int barrier_rank(const std::vector<proto::CaiState>& config, int n) {
    const std::vector<int> m = cai_rank_counts(config, n);
    int best_k = 0;
    long long best = 0, s = 0;
    for (int i = 0; i < n; ++i) {
        s += m[static_cast<std::size_t>(i)] - 1;
        if (i == 0 || s < best) {
            best = s;
            best_k = i;
        }
    }
    if (!barrier_condition_holds(m, best_k))
        throw InternalError("barrier rank construction failed");
    return best_k;
}

// True iff the barrier condition for the same k survives every one-step
// successor (all ordered pairs).
inline bool check_barrier_preserved(const std::vector<proto::CaiState>& config, int k,
                                    const Params& p) {
    for (int i = 0; i < p.n; ++i) {
        for (int j = 0; j < p.n; ++j) {
            if (i == j) continue;
            std::vector<proto::CaiState> succ = config;
            proto::cai_step(succ[static_cast<std::size_t>(i)],
                            succ[static_cast<std::size_t>(j)], p.n);
            if (!barrier_condition_holds(cai_rank_counts(succ, p.n), k)) return false;
        }
    }
    return true;
}

} // namespace popsim
