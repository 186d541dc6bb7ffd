#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "starcco/common.hpp"
#include "starcco/env.hpp"

namespace starcco {

/// Small finite multi-objective MDP with explicit transition probabilities.
struct TabularMomdp {
    struct Outcome {
        double prob{1.0};
        int next{-1};  // -1 terminates the episode
    };
    std::size_t n_states{0};
    std::size_t n_actions{0};
    int start{0};
    std::size_t horizon{0};
    std::vector<std::vector<std::vector<Outcome>>> transitions;  // [s][a]
    std::vector<std::vector<Objective2>> reward;                 // [s][a]

    void validate() const;
};

/// Root state picks one of three branches; each branch is three steps long and
/// pays (1,0), (0,1) or (0.6,0.6) per step for "collect", half of it for "half"
/// and nothing for "skip". In branch b collect is action b, half is b+1 and skip
/// is b+2 (mod 3). Every branch is optimal for some preference.
TabularMomdp make_branch_toy();

/// Preference-indexed tabular action values Q[s][a][w] over a finite preference set.
struct TabularQ {
    std::size_t n_states{0};
    std::size_t n_actions{0};
    std::vector<Objective2> prefs;
    std::vector<Objective2> values;  // flat [(s * n_actions + a) * prefs.size() + w]

    TabularQ(std::size_t s, std::size_t a, std::vector<Objective2> p);
    Objective2& at(std::size_t s, std::size_t a, std::size_t w) { return values[(s * n_actions + a) * prefs.size() + w]; }
    const Objective2& at(std::size_t s, std::size_t a, std::size_t w) const {
        return values[(s * n_actions + a) * prefs.size() + w];
    }
};

struct FilterResult {
    double value{0.0};     // max over (a, w') of pref . Q(s, a, w')
    Objective2 vector{};   // the maximizing Q(s, a, w')
    std::size_t action{0};
    std::size_t pref_index{0};
};

/// Optimality filter at state s for preference `pref`. Ties keep the first
/// (action, preference) pair in enumeration order.
FilterResult toy_optimality_filter(const TabularQ& q, std::size_t s, const Objective2& pref);

/// One application of the multi-objective optimality operator:
/// (JQ)(s,a,w) = r(s,a) + gamma E[(HQ)(s', w) vector].
TabularQ optimality_operator(const TabularMomdp& m, const TabularQ& q, double gamma);

/// Evaluation operator for a preference-conditioned deterministic policy pi[s][w].
TabularQ evaluation_operator(const TabularMomdp& m, const TabularQ& q,
                             const std::vector<std::vector<std::size_t>>& policy, double gamma);

/// sup over (s, a, w) of |w . (Q - Q')|.
double value_metric(const TabularQ& q1, const TabularQ& q2);

struct ValueIterationResult {
    std::vector<double> value;        // scalarized optimal value per state
    std::vector<std::size_t> policy;  // greedy action per state
};

/// Scalarized value iteration for one preference; terminal successors contribute zero.
ValueIterationResult value_iteration(const TabularMomdp& m, const Objective2& pref, double gamma,
                                     double tol = 1e-12, std::size_t max_iter = 100000);

/// Expected discounted vector return of a deterministic stationary policy from the start state.
Objective2 policy_return(const TabularMomdp& m, std::span<const std::size_t> policy, double gamma);

class TabularMomdpEnv final : public MoEnvironment {
public:
    TabularMomdpEnv(TabularMomdp m, std::uint64_t seed);
    std::size_t observation_size() const override { return m_.n_states; }
    const std::vector<std::size_t>& action_blocks() const override { return blocks_; }
    std::vector<double> reset(std::uint64_t episode) override;
    StepResult step(std::span<const int> action) override;
    const TabularMomdp& model() const { return m_; }

private:
    std::vector<double> one_hot() const;

    TabularMomdp m_;
    std::uint64_t seed_;
    std::vector<std::size_t> blocks_;
    Rng rng_;
    int state_{0};
    std::size_t t_{0};
};

} // namespace starcco
