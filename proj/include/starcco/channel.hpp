#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "starcco/common.hpp"
#include "starcco/geometry.hpp"
#include "starcco/random.hpp"

namespace starcco {

enum class LinkClass : int { BsRis = 0, RisPoint = 1, BsPoint = 2 };

/// Per-link-class triple, indexed by LinkClass.
template <class T>
struct PerLink {
    T bs_ris{};
    T ris_point{};
    T bs_point{};

    T& operator[](LinkClass c) {
        return c == LinkClass::BsRis ? bs_ris : (c == LinkClass::RisPoint ? ris_point : bs_point);
    }
    const T& operator[](LinkClass c) const {
        return c == LinkClass::BsRis ? bs_ris : (c == LinkClass::RisPoint ? ris_point : bs_point);
    }
};

/// Surface element layout shared by every STAR-RIS of a scenario. The first
/// k_re elements (row-major, see element_position) reflect, the rest transmit.
struct ElementLayout {
    std::size_t k_h{4};
    std::size_t k_v{4};
    std::size_t k_re{8};
    double m_h{0.025};
    double m_v{0.025};

    std::size_t k_total() const { return k_h * k_v; }
    std::size_t k_tr() const { return k_total() - k_re; }
    void validate() const;
};

struct ChannelParams {
    double carrier_frequency{3.5e9};  // Hz
    double reference_gain{1e-3};      // C0, linear power gain at d0 = 1 m
    PerLink<double> rician{2.0, 2.0, 2.0};        // alpha, linear; infinity means LOS only
    PerLink<double> path_loss_exponent{3.5, 2.8, 2.2};

    double wavelength() const { return kSpeedOfLight / carrier_frequency; }
    void validate() const;

    static constexpr double kLosOnly = std::numeric_limits<double>::infinity();
};

/// Free-space reference gain (c / (4 pi d0 f_c))^2 at d0 = 1 m.
double free_space_reference_gain(double carrier_frequency);

/// (2 pi / lambda) [cos th cos psi, cos th sin psi, sin th].
Vec3 wave_vector(double psi, double theta, double wavelength);

std::vector<cplx> array_response(double psi, double theta, std::span<const Vec3> positions,
                                 double wavelength);

struct Angles {
    double azimuth{0.0};    // psi
    double elevation{0.0};  // theta
};

/// Azimuth from the horizontal offset dst - src (sign from dy), elevation
/// arcsin((src.z - dst.z) / d3D). A purely vertical link has azimuth 0.
Angles los_angles(const Vec3& src, const Vec3& dst);

/// C0 * d^-gamma with d clamped to the 1 m reference distance.
double path_loss(double distance, double exponent, double reference_gain);

std::vector<cplx> rician_sample(std::span<const cplx> los, double alpha, double gain, Rng& rng);
cplx rician_sample(cplx los, double alpha, double gain, Rng& rng);

/// Complex gains of every link for one coherence interval (one episode).
struct ChannelRealization {
    std::size_t n_bs{2};
    std::size_t n_ris{0};
    std::size_t n_points{0};
    std::size_t k{0};
    std::vector<std::vector<cplx>> bs_ris;     // [a * n_ris + ns], length k
    std::vector<std::vector<cplx>> ris_point;  // [ns * n_points + i], length k
    std::vector<cplx> bs_point;                // [a * n_points + i]

    const std::vector<cplx>& h_bs_ris(std::size_t a, std::size_t ns) const { return bs_ris[a * n_ris + ns]; }
    const std::vector<cplx>& h_ris_point(std::size_t ns, std::size_t i) const {
        return ris_point[ns * n_points + i];
    }
    cplx h_bs_point(std::size_t a, std::size_t i) const { return bs_point[a * n_points + i]; }

    bool all_finite() const;
};

/// Draws all links. Each link class and surface uses its own sub-stream of
/// (seed, episode), so adding or removing a surface leaves the other draws
/// unchanged.
ChannelRealization draw_channels(const GridMap& grid, const ChannelParams& params,
                                 const ElementLayout& layout, std::uint64_t seed,
                                 std::uint64_t episode);

} // namespace starcco
