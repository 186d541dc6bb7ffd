#include "starcco/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace starcco {

namespace {

double scal(const Objective2& w, const Objective2& v) { return w[0] * v[0] + w[1] * v[1]; }

} // namespace

void TabularMomdp::validate() const {
    if (n_states == 0 || n_actions == 0) throw InvalidArgument("empty MOMDP");
    if (start < 0 || static_cast<std::size_t>(start) >= n_states) throw InvalidArgument("start state out of range");
    if (transitions.size() != n_states || reward.size() != n_states) throw InvalidArgument("table size mismatch");
    for (std::size_t s = 0; s < n_states; ++s) {
        if (transitions[s].size() != n_actions || reward[s].size() != n_actions)
            throw InvalidArgument("table size mismatch at state " + std::to_string(s));
        for (const auto& outs : transitions[s]) {
            double p = 0.0;
            for (const auto& o : outs) {
                if (o.next >= static_cast<int>(n_states)) throw InvalidArgument("successor out of range");
                p += o.prob;
            }
            if (std::abs(p - 1.0) > 1e-12) throw InvalidArgument("transition probabilities must sum to 1");
        }
    }
}

TabularMomdp make_branch_toy() {
    // state 0: root; state 1 + 3b + d: branch b at depth d (d = 0..2)
    TabularMomdp m;
    m.n_states = 10;
    m.n_actions = 3;
    m.start = 0;
    m.horizon = 4;
    m.transitions.assign(m.n_states, std::vector<std::vector<TabularMomdp::Outcome>>(m.n_actions));
    m.reward.assign(m.n_states, std::vector<Objective2>(m.n_actions, Objective2{0.0, 0.0}));
    const Objective2 pay[3] = {{1.0, 0.0}, {0.0, 1.0}, {0.6, 0.6}};
    for (int b = 0; b < 3; ++b) m.transitions[0][b] = {{1.0, 1 + 3 * b}};
    for (int b = 0; b < 3; ++b) {
        for (int d = 0; d < 3; ++d) {
            const int s = 1 + 3 * b + d;
            const int next = d < 2 ? s + 1 : -1;
            for (int a = 0; a < 3; ++a) m.transitions[s][a] = {{1.0, next}};
            // labels rotate with the branch so no action index is bad everywhere
            m.reward[s][static_cast<std::size_t>(b)] = pay[b];
            m.reward[s][static_cast<std::size_t>((b + 1) % 3)] = {0.5 * pay[b][0], 0.5 * pay[b][1]};
        }
    }
    m.validate();
    return m;
}

TabularQ::TabularQ(std::size_t s, std::size_t a, std::vector<Objective2> p)
    : n_states(s), n_actions(a), prefs(std::move(p)), values(s * a * prefs.size(), Objective2{0.0, 0.0}) {
    if (prefs.empty()) throw InvalidArgument("preference set must not be empty");
}

FilterResult toy_optimality_filter(const TabularQ& q, std::size_t s, const Objective2& pref) {
    if (q.prefs.empty()) throw InvalidArgument("preference set must not be empty");
    if (s >= q.n_states) throw InvalidArgument("state out of range");
    FilterResult best;
    bool first = true;
    for (std::size_t a = 0; a < q.n_actions; ++a) {
        for (std::size_t w = 0; w < q.prefs.size(); ++w) {
            const double v = scal(pref, q.at(s, a, w));
            if (first || v > best.value) {
                best = {v, q.at(s, a, w), a, w};
                first = false;
            }
        }
    }
    return best;
}

TabularQ optimality_operator(const TabularMomdp& m, const TabularQ& q, double gamma) {
    TabularQ out(q.n_states, q.n_actions, q.prefs);
    for (std::size_t s = 0; s < m.n_states; ++s)
        for (std::size_t a = 0; a < m.n_actions; ++a)
            for (std::size_t w = 0; w < q.prefs.size(); ++w) {
                Objective2 v = m.reward[s][a];
                for (const auto& o : m.transitions[s][a]) {
                    if (o.next < 0) continue;
                    const auto f = toy_optimality_filter(q, static_cast<std::size_t>(o.next), q.prefs[w]);
                    v[0] += gamma * o.prob * f.vector[0];
                    v[1] += gamma * o.prob * f.vector[1];
                }
                out.at(s, a, w) = v;
            }
    return out;
}

TabularQ evaluation_operator(const TabularMomdp& m, const TabularQ& q,
                             const std::vector<std::vector<std::size_t>>& policy, double gamma) {
    TabularQ out(q.n_states, q.n_actions, q.prefs);
    for (std::size_t s = 0; s < m.n_states; ++s)
        for (std::size_t a = 0; a < m.n_actions; ++a)
            for (std::size_t w = 0; w < q.prefs.size(); ++w) {
                Objective2 v = m.reward[s][a];
                for (const auto& o : m.transitions[s][a]) {
                    if (o.next < 0) continue;
                    const auto& nv = q.at(static_cast<std::size_t>(o.next), policy[static_cast<std::size_t>(o.next)][w], w);
                    v[0] += gamma * o.prob * nv[0];
                    v[1] += gamma * o.prob * nv[1];
                }
                out.at(s, a, w) = v;
            }
    return out;
}

double value_metric(const TabularQ& q1, const TabularQ& q2) {
    if (q1.values.size() != q2.values.size() || q1.prefs.size() != q2.prefs.size())
        throw InvalidArgument("value tables differ in shape");
    double d = 0.0;
    for (std::size_t s = 0; s < q1.n_states; ++s)
        for (std::size_t a = 0; a < q1.n_actions; ++a)
            for (std::size_t w = 0; w < q1.prefs.size(); ++w) {
                const auto& x = q1.at(s, a, w);
                const auto& y = q2.at(s, a, w);
                d = std::max(d, std::abs(scal(q1.prefs[w], {x[0] - y[0], x[1] - y[1]})));
            }
    return d;
}

ValueIterationResult value_iteration(const TabularMomdp& m, const Objective2& pref, double gamma, double tol,
                                     std::size_t max_iter) {
    ValueIterationResult r;
    r.value.assign(m.n_states, 0.0);
    r.policy.assign(m.n_states, 0);
    for (std::size_t it = 0; it < max_iter; ++it) {
        double delta = 0.0;
        std::vector<double> next(m.n_states, 0.0);
        for (std::size_t s = 0; s < m.n_states; ++s) {
            double best = -std::numeric_limits<double>::infinity();
            for (std::size_t a = 0; a < m.n_actions; ++a) {
                double v = scal(pref, m.reward[s][a]);
                for (const auto& o : m.transitions[s][a])
                    if (o.next >= 0) v += gamma * o.prob * r.value[static_cast<std::size_t>(o.next)];
                if (v > best) {
                    best = v;
                    r.policy[s] = a;
                }
            }
            next[s] = best;
            delta = std::max(delta, std::abs(best - r.value[s]));
        }
        r.value = std::move(next);
        if (delta < tol) break;
    }
    return r;
}

Objective2 policy_return(const TabularMomdp& m, std::span<const std::size_t> policy, double gamma) {
    // Iterative policy evaluation on the vector return.
    std::vector<Objective2> v(m.n_states, Objective2{0.0, 0.0});
    for (std::size_t it = 0; it < 100000; ++it) {
        double delta = 0.0;
        std::vector<Objective2> next(m.n_states);
        for (std::size_t s = 0; s < m.n_states; ++s) {
            const std::size_t a = policy[s];
            Objective2 x = m.reward[s][a];
            for (const auto& o : m.transitions[s][a])
                if (o.next >= 0) {
                    x[0] += gamma * o.prob * v[static_cast<std::size_t>(o.next)][0];
                    x[1] += gamma * o.prob * v[static_cast<std::size_t>(o.next)][1];
                }
            delta = std::max({delta, std::abs(x[0] - v[s][0]), std::abs(x[1] - v[s][1])});
            next[s] = x;
        }
        v = std::move(next);
        if (delta < 1e-13) break;
    }
    return v[static_cast<std::size_t>(m.start)];
}

TabularMomdpEnv::TabularMomdpEnv(TabularMomdp m, std::uint64_t seed) : m_(std::move(m)), seed_(seed) {
    m_.validate();
    if (m_.horizon == 0) throw InvalidArgument("toy horizon must be positive");
    blocks_ = {m_.n_actions};
}

std::vector<double> TabularMomdpEnv::one_hot() const {
    std::vector<double> x(m_.n_states, 0.0);
    if (state_ >= 0) x[static_cast<std::size_t>(state_)] = 1.0;
    return x;
}

std::vector<double> TabularMomdpEnv::reset(std::uint64_t episode) {
    rng_ = make_stream(seed_, {kStreamEpisode, episode});
    state_ = m_.start;
    t_ = 0;
    return one_hot();
}

StepResult TabularMomdpEnv::step(std::span<const int> action) {
    if (action.size() != 1 || action[0] < 0 || static_cast<std::size_t>(action[0]) >= m_.n_actions)
        throw InvalidArgument("toy action out of range");
    if (state_ < 0) throw InvalidArgument("episode already finished");
    const auto s = static_cast<std::size_t>(state_);
    const auto a = static_cast<std::size_t>(action[0]);
    StepResult r;
    r.reward = m_.reward[s][a];
    r.tally = r.reward;
    const auto& outs = m_.transitions[s][a];
    double u = uniform01(rng_);
    int next = outs.back().next;
    for (const auto& o : outs) {
        if (u < o.prob) {
            next = o.next;
            break;
        }
        u -= o.prob;
    }
    state_ = next;
    ++t_;
    r.terminal = state_ < 0;
    r.done = r.terminal || t_ >= m_.horizon;
    r.observation = one_hot();
    return r;
}

} // namespace starcco
