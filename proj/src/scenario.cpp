#include "starcco/scenario.hpp"

#include <cmath>
#include <fstream>

namespace starcco {

using nlohmann::json;

namespace {

// dB values rounded to 1e-9 so presets written as "3 dB" read back unchanged.
double db_value(double linear) { return std::round(linear_to_db(linear) * 1e9) / 1e9; }

} // namespace

std::size_t EnvConfig::share_levels() const {
    return static_cast<std::size_t>(std::llround((1.0 - 2.0 * z) / z)) + 1;
}

std::size_t EnvConfig::power_levels() const { return static_cast<std::size_t>(std::llround(1.0 / z)) + 1; }

void EnvConfig::validate() const {
    if (!(z > 0.0 && z < 0.5)) throw InvalidArgument("z must lie in (0, 0.5)");
    const double steps = 1.0 / z;
    if (std::abs(steps - std::round(steps)) > 1e-9) throw InvalidArgument("1/z must be an integer");
    if (phase_levels < 1) throw InvalidArgument("need at least one phase level");
    if (!(p_max > 0.0)) throw InvalidArgument("P_max must be positive");
    if (!(p_initial > 0.0 && p_initial <= p_max)) throw InvalidArgument("initial power must lie in (0, P_max]");
    if (!(p_floor_fraction > 0.0 && p_floor_fraction <= z))
        throw InvalidArgument("power floor fraction must lie in (0, z]");
    if (!(radio.rsrp_threshold > 0.0)) throw InvalidArgument("R_th must be positive");
    if (!(radio.noise_power > 0.0)) throw InvalidArgument("noise power must be positive");
    if (!(radio.bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
    if (!(lambda_cov > 0.0) || !(lambda_cap > 0.0)) throw InvalidArgument("Poisson means must be positive");
    if (episode_length < 1) throw InvalidArgument("episode length must be positive");
}

GridMap Scenario::grid() const { return build_grid(rs, rg, h_b, ris); }

ChannelParams Scenario::effective_channel() const {
    ChannelParams p = channel;
    if (reference_gain_from_frequency) p.reference_gain = free_space_reference_gain(p.carrier_frequency);
    return p;
}

void Scenario::validate() const {
    (void)grid();
    effective_channel().validate();
    if (!ris.empty()) elements.validate();
    env.validate();
}

namespace {

json link_json(const PerLink<double>& v) {
    return {{"bs_ris", v.bs_ris}, {"ris_point", v.ris_point}, {"bs_point", v.bs_point}};
}

PerLink<double> link_from(const json& j, const PerLink<double>& fallback) {
    PerLink<double> v = fallback;
    v.bs_ris = j.value("bs_ris", v.bs_ris);
    v.ris_point = j.value("ris_point", v.ris_point);
    v.bs_point = j.value("bs_point", v.bs_point);
    return v;
}

bool all_los(const PerLink<double>& a) {
    return std::isinf(a.bs_ris) && std::isinf(a.ris_point) && std::isinf(a.bs_point);
}

} // namespace

json to_json(const Scenario& s) {
    json ris = json::array();
    for (const auto& r : s.ris) ris.push_back({{"x", r.x}, {"y", r.y}, {"h_ns", r.height}, {"w_ns", r.width}});
    const bool los_only = all_los(s.channel.rician);
    PerLink<double> alpha_db{};
    if (!los_only) {
        alpha_db = {db_value(s.channel.rician.bs_ris), db_value(s.channel.rician.ris_point),
                    db_value(s.channel.rician.bs_point)};
    }
    json ch = {
        {"f_c", s.channel.carrier_frequency},
        {"C0_dB", db_value(s.channel.reference_gain)},
        {"C0_from_frequency", s.reference_gain_from_frequency},
        {"los_only", los_only},
        {"gamma", link_json(s.channel.path_loss_exponent)},
        {"M_H", s.elements.m_h},
        {"M_V", s.elements.m_v},
        {"K_H", s.elements.k_h},
        {"K_V", s.elements.k_v},
        {"K_Re", s.elements.k_re},
    };
    if (!los_only) ch["alpha_dB"] = link_json(alpha_db);
    json env = {
        {"z", s.env.z},
        {"L", s.env.phase_levels},
        {"P_max", s.env.p_max},
        {"P_initial", s.env.p_initial},
        {"P_floor_fraction", s.env.p_floor_fraction},
        {"R_th", s.env.radio.rsrp_threshold},
        {"noise", s.env.radio.noise_power},
        {"B", s.env.radio.bandwidth},
        {"lambda_cov", s.env.lambda_cov},
        {"lambda_cap", s.env.lambda_cap},
        {"T", s.env.episode_length},
    };
    return {{"name", s.name}, {"Rs", s.rs}, {"Rg", s.rg}, {"h_b", s.h_b}, {"ris", ris}, {"channel", ch}, {"env", env}};
}

Scenario scenario_from_json(const json& j) {
    Scenario s;
    if (j.contains("preset")) s = scenario_preset(j.at("preset").get<std::string>());
    s.name = j.value("name", s.name);
    s.rs = j.value("Rs", s.rs);
    s.rg = j.value("Rg", s.rg);
    s.h_b = j.value("h_b", s.h_b);
    if (j.contains("ris")) {
        s.ris.clear();
        for (const auto& r : j.at("ris"))
            s.ris.push_back({r.at("x").get<double>(), r.at("y").get<double>(), r.at("h_ns").get<double>(),
                             r.at("w_ns").get<double>()});
    }
    if (j.contains("channel")) {
        const auto& c = j.at("channel");
        s.channel.carrier_frequency = c.value("f_c", s.channel.carrier_frequency);
        if (c.contains("C0_dB")) s.channel.reference_gain = db_to_linear(c.at("C0_dB").get<double>());
        s.reference_gain_from_frequency = c.value("C0_from_frequency", s.reference_gain_from_frequency);
        if (c.contains("gamma")) s.channel.path_loss_exponent = link_from(c.at("gamma"), s.channel.path_loss_exponent);
        if (c.contains("alpha_dB")) {
            PerLink<double> db{linear_to_db(s.channel.rician.bs_ris), linear_to_db(s.channel.rician.ris_point),
                               linear_to_db(s.channel.rician.bs_point)};
            db = link_from(c.at("alpha_dB"), db);
            s.channel.rician = {db_to_linear(db.bs_ris), db_to_linear(db.ris_point), db_to_linear(db.bs_point)};
        }
        if (c.value("los_only", false)) {
            const double inf = ChannelParams::kLosOnly;
            s.channel.rician = {inf, inf, inf};
        }
        s.elements.m_h = c.value("M_H", s.elements.m_h);
        s.elements.m_v = c.value("M_V", s.elements.m_v);
        s.elements.k_h = c.value("K_H", s.elements.k_h);
        s.elements.k_v = c.value("K_V", s.elements.k_v);
        s.elements.k_re = c.value("K_Re", s.elements.k_total() / 2);
    }
    if (j.contains("env")) {
        const auto& e = j.at("env");
        s.env.z = e.value("z", s.env.z);
        s.env.phase_levels = e.value("L", s.env.phase_levels);
        s.env.p_max = e.value("P_max", s.env.p_max);
        s.env.p_initial = e.value("P_initial", s.env.p_initial);
        s.env.p_floor_fraction = e.value("P_floor_fraction", s.env.p_floor_fraction);
        s.env.radio.rsrp_threshold = e.value("R_th", s.env.radio.rsrp_threshold);
        s.env.radio.noise_power = e.value("noise", s.env.radio.noise_power);
        s.env.radio.bandwidth = e.value("B", s.env.radio.bandwidth);
        s.env.lambda_cov = e.value("lambda_cov", s.env.lambda_cov);
        s.env.lambda_cap = e.value("lambda_cap", s.env.lambda_cap);
        s.env.episode_length = e.value("T", s.env.episode_length);
    }
    s.validate();
    return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open scenario file " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidArgument("scenario file " + path.string() + ": " + e.what());
    }
    return scenario_from_json(j);
}

std::vector<RisPlacement> desk_placements(double rs, std::size_t n_ris, double height, double width) {
    static const double kFrac[][2] = {{0.55, 0.3}, {0.4, 0.75}, {0.7, 0.55}, {0.25, 0.5}};
    if (n_ris > std::size(kFrac)) throw InvalidArgument("desk layout supports at most 4 surfaces");
    std::vector<RisPlacement> out;
    for (std::size_t n = 0; n < n_ris; ++n) out.push_back({kFrac[n][0] * rs, kFrac[n][1] * rs, height, width});
    return out;
}

Scenario scenario_preset(const std::string& name) {
    Scenario s;
    s.channel.rician = {db_to_linear(3.0), db_to_linear(3.0), db_to_linear(3.0)};
    if (name == "default") {
        s.name = "default";
        s.rs = 4.0;
        s.ris = desk_placements(s.rs, 2, 0.5, 1.0);
        s.env.episode_length = 5000;
        return s;
    }
    if (name == "desk" || name == "mmwave") {
        s.name = name;
        s.rs = 3.0;
        s.ris = desk_placements(s.rs, 2, 0.5, 1.0);
        s.env.episode_length = 200;
        s.env.radio.rsrp_threshold = kDeskRsrpThreshold;
        if (name == "mmwave") {
            s.channel.carrier_frequency = 26e9;
            const double inf = ChannelParams::kLosOnly;
            s.channel.rician = {inf, inf, inf};
        }
        return s;
    }
    throw InvalidArgument("unknown scenario preset '" + name + "'");
}

} // namespace starcco
