#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "starcco/channel.hpp"
#include "starcco/geometry.hpp"
#include "starcco/starris.hpp"

namespace starcco {

/// RSRP threshold (mW) of the desk network, where C0 = -30 dB and h_b = 7 m
/// keep every link well below the 0.23 mW operating threshold.
inline constexpr double kDeskRsrpThreshold = 3e-3;

struct EnvConfig {
    double z{0.1};                  // amplitude-share and power grid step
    std::size_t phase_levels{8};    // L
    double p_max{200.0};            // mW
    double p_initial{2.1};          // mW
    double p_floor_fraction{1e-3};  // power grid entry 0 maps to this fraction of P_max
    RadioConfig radio{};
    double lambda_cov{5.0};
    double lambda_cap{64.0};
    std::size_t episode_length{200};

    std::size_t share_levels() const;
    std::size_t power_levels() const;
    void validate() const;
};

/// Everything needed to build one STAR-RIS environment.
struct Scenario {
    std::string name{"custom"};
    double rs{3.0};
    double rg{1.0};
    double h_b{7.0};
    std::vector<RisPlacement> ris;
    ChannelParams channel{};
    bool reference_gain_from_frequency{false};
    ElementLayout elements{};
    EnvConfig env{};

    GridMap grid() const;
    ChannelParams effective_channel() const;
    void validate() const;
};

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);
Scenario load_scenario(const std::filesystem::path& path);

/// Named presets: "default" (operating values of the reference network),
/// "desk" (small calibrated network used by the experiment harness),
/// "mmwave" (desk network at 26 GHz, LOS only).
Scenario scenario_preset(const std::string& name);

/// Surface placements used by the desk network, as fractions of Rs.
std::vector<RisPlacement> desk_placements(double rs, std::size_t n_ris, double height, double width);

} // namespace starcco
