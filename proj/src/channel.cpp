#include "starcco/channel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include <spdlog/spdlog.h>

namespace starcco {

void ElementLayout::validate() const {
    if (k_h == 0 || k_v == 0) throw InvalidArgument("element grid must be at least 1x1");
    if (k_re < 1 || k_re >= k_total())
        throw InvalidArgument("reflection group must leave at least one element in each mode");
    if (!(m_h > 0.0) || !(m_v > 0.0)) throw InvalidArgument("element dimensions must be positive");
}

void ChannelParams::validate() const {
    if (!(carrier_frequency > 0.0)) throw InvalidArgument("carrier frequency must be positive");
    if (!(reference_gain > 0.0)) throw InvalidArgument("reference gain must be positive");
    for (auto c : {LinkClass::BsRis, LinkClass::RisPoint, LinkClass::BsPoint}) {
        if (!(rician[c] >= 0.0)) throw InvalidArgument("rician factor must be non-negative");
        if (!(path_loss_exponent[c] > 0.0)) throw InvalidArgument("path loss exponent must be positive");
    }
}

double free_space_reference_gain(double carrier_frequency) {
    if (!(carrier_frequency > 0.0)) throw InvalidArgument("carrier frequency must be positive");
    const double amp = kSpeedOfLight / (4.0 * kPi * carrier_frequency);
    return amp * amp;
}

Vec3 wave_vector(double psi, double theta, double wavelength) {
    if (!(wavelength > 0.0)) throw InvalidArgument("wavelength must be positive");
    const double s = kTwoPi / wavelength;
    return {s * std::cos(theta) * std::cos(psi), s * std::cos(theta) * std::sin(psi), s * std::sin(theta)};
}

std::vector<cplx> array_response(double psi, double theta, std::span<const Vec3> positions,
                                 double wavelength) {
    const Vec3 b = wave_vector(psi, theta, wavelength);
    std::vector<cplx> out;
    out.reserve(positions.size());
    for (const auto& l : positions) out.push_back(std::polar(1.0, b.dot(l)));
    return out;
}

Angles los_angles(const Vec3& src, const Vec3& dst) {
    const Vec3 d = dst - src;
    const double d3 = d.norm();
    if (!(d3 > 0.0)) throw InvalidArgument("los_angles: source and destination coincide");
    Angles a;
    a.elevation = std::asin(std::clamp(-d.z / d3, -1.0, 1.0));
    const double d2 = d.norm_xy();
    if (d2 > 0.0) {
        const double psi = std::acos(std::clamp(d.x / d2, -1.0, 1.0));
        a.azimuth = d.y < 0.0 ? -psi : psi;
    }
    return a;
}

double path_loss(double distance, double exponent, double reference_gain) {
    static std::atomic<bool> warned{false};
    if (!(distance >= 1.0)) {
        if (!warned.exchange(true))
            spdlog::warn("path_loss: distance {} m below the 1 m reference, clamped", distance);
        distance = 1.0;
    }
    return reference_gain * std::pow(distance, -exponent);
}

namespace {

struct Mix {
    double los;
    double nlos;
};

Mix mixing(double alpha, double gain) {
    if (!(alpha >= 0.0)) throw InvalidArgument("rician factor must be non-negative");
    if (!(gain > 0.0)) throw InvalidArgument("path gain must be positive");
    const double root = std::sqrt(gain);
    if (std::isinf(alpha)) return {root, 0.0};
    return {root * std::sqrt(alpha / (1.0 + alpha)), root * std::sqrt(1.0 / (1.0 + alpha))};
}

} // namespace

std::vector<cplx> rician_sample(std::span<const cplx> los, double alpha, double gain, Rng& rng) {
    const Mix m = mixing(alpha, gain);
    std::vector<cplx> out;
    out.reserve(los.size());
    for (const auto& h : los) {
        cplx v = m.los * h;
        if (m.nlos > 0.0) v += m.nlos * complex_normal(rng);
        out.push_back(v);
    }
    return out;
}

cplx rician_sample(cplx los, double alpha, double gain, Rng& rng) {
    return rician_sample(std::span<const cplx>(&los, 1), alpha, gain, rng).front();
}

bool ChannelRealization::all_finite() const {
    auto fin = [](cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); };
    for (const auto& v : bs_ris)
        for (auto h : v)
            if (!fin(h)) return false;
    for (const auto& v : ris_point)
        for (auto h : v)
            if (!fin(h)) return false;
    for (auto h : bs_point)
        if (!fin(h)) return false;
    return true;
}

ChannelRealization draw_channels(const GridMap& grid, const ChannelParams& params,
                                 const ElementLayout& layout, std::uint64_t seed,
                                 std::uint64_t episode) {
    params.validate();
    const std::size_t n_ris = grid.n_ris();
    if (n_ris > 0) layout.validate();
    const double lambda = params.wavelength();
    const auto positions = element_positions(layout.k_h, layout.k_v, layout.m_h, layout.m_v);

    ChannelRealization ch;
    ch.n_ris = n_ris;
    ch.n_points = grid.n_points;
    ch.k = n_ris > 0 ? layout.k_total() : 0;

    {
        Rng rng = make_stream(seed, {kStreamChannel, episode, static_cast<std::uint64_t>(LinkClass::BsPoint)});
        ch.bs_point.reserve(2 * grid.n_points);
        for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t i = 0; i < grid.n_points; ++i) {
                const double d = (grid.sample_points[i] - grid.bs_positions[a]).norm();
                const cplx los = std::polar(1.0, -kTwoPi * d / lambda);
                const double gain = path_loss(d, params.path_loss_exponent.bs_point, params.reference_gain);
                ch.bs_point.push_back(rician_sample(los, params.rician.bs_point, gain, rng));
            }
        }
    }

    ch.bs_ris.resize(2 * n_ris);
    ch.ris_point.resize(n_ris * grid.n_points);
    for (std::size_t ns = 0; ns < n_ris; ++ns) {
        const Vec3 ref = grid.ris[ns].reference_point();
        Rng rng_br = make_stream(seed, {kStreamChannel, episode, static_cast<std::uint64_t>(LinkClass::BsRis), ns});
        for (std::size_t a = 0; a < 2; ++a) {
            const Vec3& bs = grid.bs_positions[a];
            const Angles ang = los_angles(ref, bs);
            const auto los = array_response(ang.azimuth, ang.elevation, positions, lambda);
            const double gain = path_loss((bs - ref).norm(), params.path_loss_exponent.bs_ris, params.reference_gain);
            ch.bs_ris[a * n_ris + ns] = rician_sample(los, params.rician.bs_ris, gain, rng_br);
        }
        Rng rng_rp = make_stream(seed, {kStreamChannel, episode, static_cast<std::uint64_t>(LinkClass::RisPoint), ns});
        for (std::size_t i = 0; i < grid.n_points; ++i) {
            const Vec3& p = grid.sample_points[i];
            const Angles ang = los_angles(ref, p);
            const auto los = array_response(ang.azimuth, ang.elevation, positions, lambda);
            const double gain = path_loss((p - ref).norm(), params.path_loss_exponent.ris_point, params.reference_gain);
            ch.ris_point[ns * grid.n_points + i] = rician_sample(los, params.rician.ris_point, gain, rng_rp);
        }
    }
    return ch;
}

} // namespace starcco
