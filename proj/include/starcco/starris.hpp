#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "starcco/channel.hpp"
#include "starcco/common.hpp"
#include "starcco/geometry.hpp"

namespace starcco {

enum class RisMode { Reflect, Transmit };

/// Mode-splitting STAR-RIS configuration. Reflection elements come first.
struct StarRisState {
    std::size_t k_re{1};
    std::size_t k_tr{1};
    double beta_re{0.5};
    double beta_tr{0.5};
    std::vector<double> phi_re;
    std::vector<double> phi_tr;

    std::size_t k() const { return k_re + k_tr; }
    /// Throws InvalidArgument when an invariant fails.
    void validate() const;
    /// State with Tr energy share g = K_Tr beta_Tr and the remainder reflected.
    static StarRisState from_share(std::size_t k_re, std::size_t k_tr, double share,
                                   std::vector<double> phi_re, std::vector<double> phi_tr);
};

/// Diagonal of Phi for one mode group: sqrt(beta) exp(j phi_k).
std::vector<cplx> coefficient_diagonal(const StarRisState& state, RisMode mode);

struct ObjectiveWeights {
    std::vector<double> cov;
    std::vector<double> cap;

    void validate(std::size_t n_points) const;
    static ObjectiveWeights uniform(std::size_t n_points);
};

/// Per-surface indicators and per-point mode / blocking lookups derived once from a GridMap.
struct LinkTopology {
    std::size_t n_ris{0};
    std::size_t n_points{0};
    std::vector<LinkIndicators> indicators;  // [ns]
    std::vector<RisMode> mode;               // [ns * n_points + i]
    std::vector<unsigned char> direct_clear; // [(a * n_ris + ns) * n_points + i]

    std::size_t n_links() const { return n_ris == 0 ? 2 : 2 * n_ris; }
    RisMode mode_at(std::size_t ns, std::size_t i) const { return mode[ns * n_points + i]; }
    bool clear(std::size_t a, std::size_t ns, std::size_t i) const {
        return direct_clear[(a * n_ris + ns) * n_points + i] != 0;
    }
};

/// Points on the low-x side of a surface receive the transmitted beam.
RisMode mode_for(const Vec3& point, const RisPlacement& ris);

LinkTopology build_topology(const GridMap& grid);

/// Noise-free received amplitude of one (BS, surface, point) link.
/// `h_rp`, `h_br` and `coeff` cover only the elements of the active mode group.
cplx received_signal(std::span<const cplx> h_rp, std::span<const cplx> h_br, std::span<const cplx> coeff,
                     cplx h_direct, const LinkIndicators& ind, bool direct_clear, cplx x);

/// Link powers at point i in flat order a * n_ris + ns (or a alone without surfaces).
std::vector<double> link_powers(std::size_t i, const LinkTopology& topo, const ChannelRealization& ch,
                                std::span<const StarRisState> states, double tx_power);

struct RsrpResult {
    double power{0.0};
    std::size_t index{0};
};

/// Maximum link power and the first index attaining it.
RsrpResult rsrp(std::span<const double> powers);
double sinr(std::span<const double> powers, std::size_t serving, double noise_power);
double coverage(std::span<const double> rsrp_values, std::span<const double> weights, double threshold);
double capacity(std::span<const double> sinr_values, std::span<const double> weights, double bandwidth);

struct ServingPair {
    std::size_t bs{0};
    long ris{-1};  // -1 when no surface is deployed
};

struct NetworkMetrics {
    std::vector<double> rsrp;
    std::vector<ServingPair> best_server;
    std::vector<double> sinr;
    double coverage{0.0};
    double capacity{0.0};
};

struct RadioConfig {
    double rsrp_threshold{0.23};  // mW
    double noise_power{9e-12};    // mW
    double bandwidth{10e6};       // Hz
};

NetworkMetrics evaluate_network(const LinkTopology& topo, const ChannelRealization& ch,
                                std::span<const StarRisState> states, double tx_power,
                                const ObjectiveWeights& weights, const RadioConfig& radio);

/// Writes rows t,i,x,y,rsrp_dBW,serving_a,serving_ns,sinr_dB,covered_flag.
void write_metrics_csv(std::ostream& os, std::size_t t, const GridMap& grid, const NetworkMetrics& m,
                       double rsrp_threshold, bool header);

} // namespace starcco
