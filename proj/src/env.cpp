#include "starcco/env.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace starcco {

std::vector<double> poisson_weights(double lambda, std::span<const int> counts) {
    if (!(lambda > 0.0)) throw InvalidArgument("Poisson mean must be positive");
    if (counts.empty()) throw InvalidArgument("need at least one count");
    // Work in log space relative to the largest term so large means do not underflow.
    std::vector<double> logp;
    logp.reserve(counts.size());
    for (int k : counts) {
        if (k < 0) throw InvalidArgument("event counts must be non-negative");
        logp.push_back(static_cast<double>(k) * std::log(lambda) - lambda - std::lgamma(static_cast<double>(k) + 1.0));
    }
    const double top = *std::max_element(logp.begin(), logp.end());
    double sum = 0.0;
    for (auto& v : logp) {
        v = std::exp(v - top);
        sum += v;
    }
    for (auto& v : logp) v /= sum;
    return logp;
}

ObjectiveWeights sample_traffic_weights(std::size_t n_points, double lambda_cov, double lambda_cap, Rng& rng) {
    std::poisson_distribution<int> pc(lambda_cov);
    std::poisson_distribution<int> pk(lambda_cap);
    std::vector<int> kc(n_points), kk(n_points);
    for (auto& k : kc) k = pc(rng);
    for (auto& k : kk) k = pk(rng);
    return {poisson_weights(lambda_cov, kc), poisson_weights(lambda_cap, kk)};
}

StarRisEnv::StarRisEnv(Scenario scenario, std::uint64_t seed)
    : scenario_(std::move(scenario)), seed_(seed) {
    scenario_.validate();
    grid_ = scenario_.grid();
    topo_ = build_topology(grid_);
    channel_params_ = scenario_.effective_channel();
    const auto& e = scenario_.env;
    for (std::size_t ns = 0; ns < grid_.n_ris(); ++ns) {
        blocks_.push_back(e.share_levels());
        for (std::size_t k = 0; k < scenario_.elements.k_total(); ++k) blocks_.push_back(e.phase_levels);
    }
    blocks_.push_back(e.power_levels());
}

std::size_t StarRisEnv::observation_size() const {
    return grid_.n_ris() * (2 * scenario_.elements.k_total() + 1) + 1;
}

double StarRisEnv::share_value(int index) const { return scenario_.env.z * static_cast<double>(index + 1); }

double StarRisEnv::phase_value(int index) const {
    return kTwoPi * static_cast<double>(index) / static_cast<double>(scenario_.env.phase_levels);
}

double StarRisEnv::power_value(int index) const {
    const auto& e = scenario_.env;
    if (index == 0) return e.p_floor_fraction * e.p_max;
    return std::min(e.p_max, e.z * static_cast<double>(index) * e.p_max);
}

std::vector<double> StarRisEnv::reset(std::uint64_t episode) {
    const auto& e = scenario_.env;
    channels_ = draw_channels(grid_, channel_params_, scenario_.elements, seed_, episode);
    Rng traffic = make_stream(seed_, {kStreamTraffic, episode});
    weights_ = sample_traffic_weights(grid_.n_points, e.lambda_cov, e.lambda_cap, traffic);

    Rng init = make_stream(seed_, {kStreamInitialState, episode});
    std::uniform_int_distribution<int> phase(0, static_cast<int>(e.phase_levels) - 1);
    const auto& el = scenario_.elements;
    state_ = MoState{};
    for (std::size_t ns = 0; ns < grid_.n_ris(); ++ns) {
        const int mid = static_cast<int>(e.share_levels() / 2);
        std::vector<int> idx(el.k_total());
        for (auto& p : idx) p = phase(init);
        state_.share_index.push_back(mid);
        state_.phase_index.push_back(std::move(idx));
    }
    state_.tx_power = e.p_initial;
    state_.power_index = -1;
    state_.ris.resize(grid_.n_ris());
    for (std::size_t ns = 0; ns < grid_.n_ris(); ++ns) {
        std::vector<double> re, tr;
        const auto& idx = state_.phase_index[ns];
        for (std::size_t k = 0; k < el.k_total(); ++k) (k < el.k_re ? re : tr).push_back(phase_value(idx[k]));
        state_.ris[ns] = StarRisState::from_share(el.k_re, el.k_tr(), share_value(state_.share_index[ns]),
                                                  std::move(re), std::move(tr));
    }
    t_ = 0;
    check_invariants();
    evaluate();
    return observation();
}

std::vector<double> StarRisEnv::observation() const {
    std::vector<double> obs;
    obs.reserve(observation_size());
    for (std::size_t ns = 0; ns < grid_.n_ris(); ++ns) {
        obs.push_back(share_value(state_.share_index[ns]));
        for (int p : state_.phase_index[ns]) {
            obs.push_back(std::cos(phase_value(p)));
            obs.push_back(std::sin(phase_value(p)));
        }
    }
    obs.push_back(state_.tx_power / scenario_.env.p_max);
    return obs;
}

std::vector<int> StarRisEnv::hold_action() const {
    std::vector<int> a;
    a.reserve(blocks_.size());
    for (std::size_t ns = 0; ns < grid_.n_ris(); ++ns) {
        a.push_back(state_.share_index[ns]);
        for (int p : state_.phase_index[ns]) a.push_back(p);
    }
    int pi = state_.power_index;
    if (pi < 0) {
        const double r = state_.tx_power / (scenario_.env.z * scenario_.env.p_max);
        pi = static_cast<int>(std::clamp(std::lround(r), 0L, static_cast<long>(blocks_.back()) - 1));
    }
    a.push_back(pi);
    return a;
}

void StarRisEnv::apply(std::span<const int> action) {
    if (action.size() != blocks_.size())
        throw InvalidArgument("action has " + std::to_string(action.size()) + " components, expected " +
                              std::to_string(blocks_.size()));
    for (std::size_t b = 0; b < blocks_.size(); ++b)
        if (action[b] < 0 || static_cast<std::size_t>(action[b]) >= blocks_[b])
            throw InvalidArgument("action component " + std::to_string(b) + " out of range");
    const auto& el = scenario_.elements;
    std::size_t pos = 0;
    for (std::size_t ns = 0; ns < grid_.n_ris(); ++ns) {
        state_.share_index[ns] = action[pos++];
        auto& idx = state_.phase_index[ns];
        for (std::size_t k = 0; k < el.k_total(); ++k) idx[k] = action[pos++];
        auto& st = state_.ris[ns];
        const double g = share_value(state_.share_index[ns]);
        st.beta_tr = g / static_cast<double>(el.k_tr());
        st.beta_re = (1.0 - g) / static_cast<double>(el.k_re);
        for (std::size_t k = 0; k < el.k_total(); ++k) {
            if (k < el.k_re)
                st.phi_re[k] = phase_value(idx[k]);
            else
                st.phi_tr[k - el.k_re] = phase_value(idx[k]);
        }
    }
    state_.power_index = action[pos];
    state_.tx_power = std::clamp(power_value(action[pos]), std::numeric_limits<double>::min(), scenario_.env.p_max);
}

void StarRisEnv::check_invariants() const {
    const double p = state_.tx_power;
    if (!(p > 0.0 && p <= scenario_.env.p_max))
        throw InternalError("transmit power " + std::to_string(p) + " mW outside (0, P_max]");
    for (std::size_t ns = 0; ns < state_.ris.size(); ++ns) {
        try {
            state_.ris[ns].validate();
        } catch (const InvalidArgument& e) {
            throw InternalError("surface " + std::to_string(ns) + ": " + e.what());
        }
    }
}

void StarRisEnv::evaluate() {
    metrics_ = evaluate_network(topo_, channels_, state_.ris, state_.tx_power, weights_, scenario_.env.radio);
}

StepResult StarRisEnv::step(std::span<const int> action) {
    const Objective2 before = objectives();
    apply(action);
    check_invariants();
    evaluate();
    ++t_;
    const Objective2 after = objectives();
    StepResult r;
    r.reward = {after[0] - before[0], after[1] - before[1]};
    const double inv_t = 1.0 / static_cast<double>(scenario_.env.episode_length);
    r.tally = {after[0] * inv_t, after[1] * inv_t};
    r.done = t_ >= scenario_.env.episode_length;
    r.observation = observation();
    if (!std::isfinite(r.reward[0]) || !std::isfinite(r.reward[1]) || std::abs(r.reward[0]) > 1.0 + 1e-12)
        throw InternalError("reward out of bounds after step " + std::to_string(t_));
    return r;
}

} // namespace starcco
