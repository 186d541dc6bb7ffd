#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "starcco/env.hpp"
#include "starcco/moppo.hpp"
#include "starcco/nn.hpp"
#include "starcco/pareto.hpp"

namespace starcco {

struct TrainConfig {
    std::size_t episodes{10000};
    std::size_t steps_per_episode{5000};  // 0 keeps the environment's own episode length
    std::size_t update_every{10};        // rollout window per actor
    std::size_t epochs{10};
    std::size_t minibatch{0};            // 0: whole batch
    std::size_t n_actors{1};
    std::size_t hidden{64};
    double clip_eps{0.2};
    double gamma{0.99};
    double lr_actor{1e-4};
    double lr_critic{3e-3};
    double varpi_initial{0.1};
    double varpi_step{0.001};
    double kl_beta{0.01};
    double value_coef{0.5};
    double entropy_coef{0.01};
    double max_grad_norm{0.5};
    bool normalize_advantages{true};
    std::size_t eval_episodes{3};
    std::size_t eval_preferences{11};    // AVUS sweep w = i / (n - 1)
    std::size_t eval_reruns{4};          // stochastic re-runs for single-policy strategies

    void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct Strategy {
    enum class Kind { Avus, Lfus, Fixed };
    Kind kind{Kind::Avus};
    Objective2 weight{0.5, 0.5};  // fixed weights, and the scalarization used for reporting
    std::string name{"AVUS"};

    static Strategy avus();
    static Strategy lfus();
    static Strategy fixed(const std::string& name, Objective2 w);
    /// AVUS, LFUS, BM1 (0.3,0.7), BM2 (0.6,0.4); NoRIS trains like AVUS.
    static Strategy by_name(const std::string& name);
};

struct CurveRow {
    std::size_t episode{0};
    std::string strategy;
    std::uint64_t seed{0};
    double cum_coverage{0.0};
    double cum_capacity{0.0};
    double scalarized_reward{0.0};
};

void write_curves_csv(std::ostream& os, const std::vector<CurveRow>& rows);
std::vector<CurveRow> read_curves_csv(std::istream& is);

struct TrainDiagnostics {
    std::size_t iterations{0};
    double final_varpi{0.0};
    double last_nu{0.5};
    std::size_t selected[3]{0, 0, 0};  // NCP, CLIP, KL
};

struct TrainResult {
    std::vector<CurveRow> curves;
    ParetoArchive archive;
    Objective2 final_point{};  // greedy evaluation (balanced preference for AVUS)
    Checkpoint checkpoint;
    TrainDiagnostics diagnostics;
    std::string config_hash;
};

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using EnvFactory = std::function<std::unique_ptr<MoEnvironment>(std::size_t actor)>;

/// Preference-conditioned (AVUS) or plain actor/critic pair with greedy and sampled evaluation.
class PolicyHandle {
public:
    PolicyHandle(const Mlp& actor, std::vector<std::size_t> blocks, bool conditioned);
    std::vector<int> act(std::span<const double> obs, const Preference& pref, bool greedy, Rng& rng) const;

private:
    const Mlp& actor_;
    std::vector<std::size_t> blocks_;
    bool conditioned_;
};

/// Mean over episodes of the summed per-step tallies.
Objective2 evaluate_policy(const PolicyHandle& policy, MoEnvironment& env, const Preference& pref,
                           std::size_t episodes, bool greedy, std::uint64_t first_episode, Rng& rng);

/// FNV-1a 64-bit digest, hex encoded.
std::string fnv1a_hex(const std::string& text);

TrainResult train(const Strategy& strategy, const EnvFactory& make_env, const TrainConfig& config,
                  std::uint64_t seed, const std::string& config_text = {});

/// First episode index used for evaluation, far from every training index.
inline constexpr std::uint64_t kEvalEpisodeBase = 1ULL << 40;

} // namespace starcco
