#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "starcco/channel.hpp"
#include "starcco/random.hpp"
#include "starcco/scenario.hpp"
#include "starcco/starris.hpp"

namespace starcco {

struct StepResult {
    std::vector<double> observation;
    Objective2 reward{};  // vector reward
    Objective2 tally{};   // per-step contribution to the episode's long-term objectives
    bool done{false};      // episode over
    bool terminal{false};  // absorbing end: no value beyond this step
};

/// Episodic environment with a 2-vector reward and a factored categorical action.
class MoEnvironment {
public:
    virtual ~MoEnvironment() = default;
    virtual std::size_t observation_size() const = 0;
    /// Number of categories of each action component.
    virtual const std::vector<std::size_t>& action_blocks() const = 0;
    /// Multiplier applied to each reward component before learning.
    virtual Objective2 reward_scale() const { return {1.0, 1.0}; }
    virtual std::vector<double> reset(std::uint64_t episode) = 0;
    virtual StepResult step(std::span<const int> action) = 0;
};

/// w_i = pmf(lambda, k_i) / sum_j pmf(lambda, k_j).
std::vector<double> poisson_weights(double lambda, std::span<const int> counts);

/// Draws per-point event counts and returns the normalized coverage/capacity weights.
ObjectiveWeights sample_traffic_weights(std::size_t n_points, double lambda_cov, double lambda_cap, Rng& rng);

/// Composite network configuration (the MDP state).
struct MoState {
    std::vector<StarRisState> ris;
    std::vector<int> share_index;              // per surface
    std::vector<std::vector<int>> phase_index; // per surface, K entries (reflection group first)
    double tx_power{0.0};                      // mW
    int power_index{-1};                       // -1 until the first power action
};

class StarRisEnv final : public MoEnvironment {
public:
    StarRisEnv(Scenario scenario, std::uint64_t seed);

    std::size_t observation_size() const override;
    const std::vector<std::size_t>& action_blocks() const override { return blocks_; }
    Objective2 reward_scale() const override { return {1.0, 1.0 / scenario_.env.radio.bandwidth}; }
    std::vector<double> reset(std::uint64_t episode) override;
    StepResult step(std::span<const int> action) override;

    const Scenario& scenario() const { return scenario_; }
    const GridMap& grid() const { return grid_; }
    const LinkTopology& topology() const { return topo_; }
    const MoState& state() const { return state_; }
    const ChannelRealization& channels() const { return channels_; }
    const ObjectiveWeights& weights() const { return weights_; }
    const NetworkMetrics& metrics() const { return metrics_; }
    Objective2 objectives() const { return {metrics_.coverage, metrics_.capacity}; }
    std::size_t time_step() const { return t_; }

    /// Amplitude-share, phase and power grids.
    double share_value(int index) const;
    double phase_value(int index) const;
    double power_value(int index) const;

    /// Action that re-selects the current configuration (power keeps its grid index,
    /// or the nearest grid entry when the power has never been chosen).
    std::vector<int> hold_action() const;
    std::vector<double> observation() const;

private:
    void apply(std::span<const int> action);
    void check_invariants() const;
    void evaluate();

    Scenario scenario_;
    std::uint64_t seed_;
    GridMap grid_;
    LinkTopology topo_;
    ChannelParams channel_params_;
    std::vector<std::size_t> blocks_;
    ChannelRealization channels_;
    ObjectiveWeights weights_;
    MoState state_;
    NetworkMetrics metrics_;
    std::size_t t_{0};
};

} // namespace starcco
