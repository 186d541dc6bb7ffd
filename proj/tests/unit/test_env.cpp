#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "starcco/env.hpp"
#include "starcco/tabular.hpp"

using namespace starcco;

namespace {

std::vector<int> random_action(const MoEnvironment& env, Rng& rng) {
    std::vector<int> a;
    for (auto b : env.action_blocks()) a.push_back(std::uniform_int_distribution<int>(0, static_cast<int>(b) - 1)(rng));
    return a;
}

} // namespace

TEST_CASE("poisson weights") {
    const std::vector<int> c1{1, 1};
    const auto w1 = poisson_weights(1.0, c1);
    CHECK(w1[0] == doctest::Approx(0.5));
    CHECK(w1[1] == doctest::Approx(0.5));
    const std::vector<int> c2{0, 1, 2};
    const auto w2 = poisson_weights(2.0, c2);
    CHECK(w2[0] == doctest::Approx(0.2));
    CHECK(w2[1] == doctest::Approx(0.4));
    CHECK(w2[2] == doctest::Approx(0.4));
    const std::vector<int> big{500, 64, 0};
    const auto w3 = poisson_weights(64.0, big);
    CHECK(w3[0] + w3[1] + w3[2] == doctest::Approx(1.0));
    CHECK_THROWS_AS(poisson_weights(0.0, c1), InvalidArgument);
    CHECK_THROWS_AS(poisson_weights(1.0, std::vector<int>{-1}), InvalidArgument);
}

TEST_CASE("environment defaults") {
    EnvConfig e;
    CHECK(e.lambda_cov == 5.0);
    CHECK(e.lambda_cap == 64.0);
    CHECK(e.p_initial == 2.1);
    CHECK(e.p_max == 200.0);
    CHECK(e.radio.rsrp_threshold == 0.23);
    CHECK(e.radio.noise_power == 9e-12);
}

TEST_CASE("reset") {
    StarRisEnv env(scenario_preset("desk"), 5);
    const auto o1 = env.reset(3);
    const auto s1 = env.state();
    CHECK(s1.tx_power == 2.1);
    double sc = 0.0, sk = 0.0;
    for (double v : env.weights().cov) sc += v;
    for (double v : env.weights().cap) sk += v;
    CHECK(sc == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sk == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(o1.size() == env.observation_size());

    StarRisEnv other(scenario_preset("desk"), 5);
    const auto o2 = other.reset(3);
    CHECK(o1 == o2);
    CHECK(other.state().phase_index == s1.phase_index);
    CHECK(other.objectives() == env.objectives());
}

TEST_CASE("holding the configuration gives a zero reward") {
    StarRisEnv env(scenario_preset("desk"), 6);
    env.reset(0);
    Rng rng = make_stream(1, {});
    env.step(random_action(env, rng));
    for (int t = 0; t < 5; ++t) {
        const auto r = env.step(env.hold_action());
        CHECK(r.reward[0] == 0.0);
        CHECK(r.reward[1] == 0.0);
    }
}

TEST_CASE("raising only the power never lowers coverage") {
    StarRisEnv env(scenario_preset("desk"), 7);
    env.reset(0);
    Rng rng = make_stream(2, {});
    auto a = random_action(env, rng);
    a.back() = 0;
    env.step(a);
    for (std::size_t p = 1; p < env.action_blocks().back(); ++p) {
        a.back() = static_cast<int>(p);
        CHECK(env.step(a).reward[0] >= 0.0);
    }
}

TEST_CASE("step matches a from-scratch recomputation") {
    const Scenario sc = scenario_preset("desk");
    StarRisEnv env(sc, 8);
    env.reset(1);
    Rng rng = make_stream(3, {});
    for (int t = 0; t < 20; ++t) {
        const Objective2 before = env.objectives();
        const auto r = env.step(random_action(env, rng));
        const auto m = evaluate_network(env.topology(), env.channels(), env.state().ris, env.state().tx_power,
                                        env.weights(), sc.env.radio);
        CHECK(std::abs(r.reward[0] - (m.coverage - before[0])) <= 1e-12);
        CHECK(std::abs(r.reward[1] - (m.capacity - before[1])) <= 1e-12 * std::max(1.0, m.capacity));
    }
}

TEST_CASE("episodes are deterministic given seed and actions") {
    StarRisEnv a(scenario_preset("desk"), 9), b(scenario_preset("desk"), 9);
    a.reset(4);
    b.reset(4);
    Rng rng = make_stream(4, {});
    for (int t = 0; t < 30; ++t) {
        const auto act = random_action(a, rng);
        const auto ra = a.step(act), rb = b.step(act);
        CHECK(ra.reward == rb.reward);
        CHECK(ra.observation == rb.observation);
    }
}

TEST_CASE("constraints, bounds and telescoping over random rollouts") {
    Scenario sc = scenario_preset("desk");
    sc.env.episode_length = 50;
    StarRisEnv env(sc, 10);
    Rng rng = make_stream(5, {});
    for (std::uint64_t ep = 0; ep < 4; ++ep) {
        env.reset(ep);
        const Objective2 start = env.objectives();
        Objective2 sum{0.0, 0.0};
        bool done = false;
        while (!done) {
            const auto r = env.step(random_action(env, rng));
            sum[0] += r.reward[0];
            sum[1] += r.reward[1];
            done = r.done;
            CHECK(std::abs(r.reward[0]) <= 1.0);
            CHECK(env.state().tx_power > 0.0);
            CHECK(env.state().tx_power <= sc.env.p_max);
            for (const auto& s : env.state().ris)
                CHECK(std::abs(s.k_re * s.beta_re + s.k_tr * s.beta_tr - 1.0) <= 1e-9);
        }
        CHECK(env.time_step() == 50);
        const Objective2 end = env.objectives();
        CHECK(std::abs(sum[0] - (end[0] - start[0])) <= 1e-10);
        CHECK(std::abs(sum[1] - (end[1] - start[1])) <= 1e-10 * std::max(1.0, std::abs(end[1])));
    }
}

TEST_CASE("malformed actions are rejected") {
    StarRisEnv env(scenario_preset("desk"), 11);
    env.reset(0);
    std::vector<int> a(env.action_blocks().size(), 0);
    a.pop_back();
    CHECK_THROWS_AS(env.step(a), InvalidArgument);
    a.push_back(static_cast<int>(env.action_blocks().back()));
    CHECK_THROWS_AS(env.step(a), InvalidArgument);
}

TEST_CASE("action blocks") {
    const Scenario sc = scenario_preset("desk");
    StarRisEnv env(sc, 1);
    const auto& b = env.action_blocks();
    CHECK(b.size() == sc.ris.size() * (1 + sc.elements.k_total()) + 1);
    CHECK(b.front() == 9);
    CHECK(b[1] == 8);
    CHECK(b.back() == 11);
    Scenario none = sc;
    none.ris.clear();
    StarRisEnv bare(none, 1);
    CHECK(bare.action_blocks().size() == 1);
    CHECK(bare.observation_size() == 1);
}

TEST_CASE("scenario json round trip") {
    const Scenario a = scenario_preset("desk");
    const Scenario b = scenario_from_json(to_json(a));
    CHECK(to_json(b) == to_json(a));
    CHECK_THROWS(scenario_preset("nope"));
    auto j = to_json(a);
    j["Rs"] = -1.0;
    CHECK_THROWS(scenario_from_json(j).validate());
}

TEST_CASE("tabular toy is consistent with value iteration") {
    const auto m = make_branch_toy();
    CHECK(m.n_states <= 20);
    for (double w : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        const Objective2 pref{w, 1.0 - w};
        const auto vi = value_iteration(m, pref, 0.99);
        const auto ret = policy_return(m, vi.policy, 0.99);
        CHECK(pref[0] * ret[0] + pref[1] * ret[1] == doctest::Approx(vi.value[m.start]));
    }
    TabularMomdpEnv env(m, 1);
    env.reset(0);
    bool done = false;
    std::size_t steps = 0;
    while (!done) {
        const std::vector<int> a{0};
        done = env.step(a).done;
        ++steps;
    }
    CHECK(steps <= m.horizon);
}
