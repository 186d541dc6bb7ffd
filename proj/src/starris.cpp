#include "starcco/starris.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace starcco {

namespace {

constexpr double kEnergyTol = 1e-9;

void check_phases(const std::vector<double>& phi, std::size_t expected, const char* name) {
    if (phi.size() != expected)
        throw InvalidArgument(std::string(name) + " has " + std::to_string(phi.size()) + " phases, expected " +
                              std::to_string(expected));
    for (double p : phi)
        if (!(p >= 0.0 && p < kTwoPi)) throw InvalidArgument(std::string(name) + " phase outside [0, 2pi)");
}

void check_weights(const std::vector<double>& w, std::size_t n, const char* name) {
    if (w.size() != n) throw InvalidArgument(std::string(name) + " weight vector has wrong length");
    double s = 0.0;
    for (double v : w) {
        if (!(v >= 0.0)) throw InvalidArgument(std::string(name) + " weights must be non-negative");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) throw InvalidArgument(std::string(name) + " weights must sum to 1");
}

} // namespace

void StarRisState::validate() const {
    if (k_re < 1 || k_tr < 1) throw InvalidArgument("each mode group needs at least one element");
    if (!(beta_re > 0.0 && beta_re <= 1.0) || !(beta_tr > 0.0 && beta_tr <= 1.0))
        throw InvalidArgument("amplitudes must lie in (0, 1]");
    const double e = static_cast<double>(k_re) * beta_re + static_cast<double>(k_tr) * beta_tr;
    if (std::abs(e - 1.0) > kEnergyTol) throw InvalidArgument("energy split violates K_Re b_Re + K_Tr b_Tr = 1");
    check_phases(phi_re, k_re, "reflection");
    check_phases(phi_tr, k_tr, "transmission");
}

StarRisState StarRisState::from_share(std::size_t k_re, std::size_t k_tr, double share,
                                      std::vector<double> phi_re, std::vector<double> phi_tr) {
    if (!(share > 0.0 && share < 1.0)) throw InvalidArgument("energy share must lie in (0, 1)");
    StarRisState s;
    s.k_re = k_re;
    s.k_tr = k_tr;
    s.beta_tr = share / static_cast<double>(k_tr);
    s.beta_re = (1.0 - share) / static_cast<double>(k_re);
    s.phi_re = std::move(phi_re);
    s.phi_tr = std::move(phi_tr);
    s.validate();
    return s;
}

std::vector<cplx> coefficient_diagonal(const StarRisState& state, RisMode mode) {
    const bool re = mode == RisMode::Reflect;
    const double amp = std::sqrt(re ? state.beta_re : state.beta_tr);
    const auto& phi = re ? state.phi_re : state.phi_tr;
    std::vector<cplx> out;
    out.reserve(phi.size());
    for (double p : phi) out.push_back(std::polar(amp, p));
    return out;
}

void ObjectiveWeights::validate(std::size_t n_points) const {
    check_weights(cov, n_points, "coverage");
    check_weights(cap, n_points, "capacity");
}

ObjectiveWeights ObjectiveWeights::uniform(std::size_t n_points) {
    if (n_points == 0) throw InvalidArgument("need at least one point");
    const double w = 1.0 / static_cast<double>(n_points);
    return {std::vector<double>(n_points, w), std::vector<double>(n_points, w)};
}

RisMode mode_for(const Vec3& point, const RisPlacement& ris) {
    return point.x < ris.x ? RisMode::Transmit : RisMode::Reflect;
}

LinkTopology build_topology(const GridMap& grid) {
    LinkTopology t;
    t.n_ris = grid.n_ris();
    t.n_points = grid.n_points;
    for (const auto& r : grid.ris) t.indicators.push_back(indicators_for(r, grid));
    t.mode.reserve(t.n_ris * t.n_points);
    for (std::size_t ns = 0; ns < t.n_ris; ++ns)
        for (std::size_t i = 0; i < t.n_points; ++i) t.mode.push_back(mode_for(grid.sample_points[i], grid.ris[ns]));
    t.direct_clear.reserve(2 * t.n_ris * t.n_points);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t ns = 0; ns < t.n_ris; ++ns)
            for (std::size_t i = 0; i < t.n_points; ++i)
                t.direct_clear.push_back(
                    direct_path_clear(grid.bs_positions[a], grid.sample_points[i], grid.ris[ns]) ? 1 : 0);
    return t;
}

cplx received_signal(std::span<const cplx> h_rp, std::span<const cplx> h_br, std::span<const cplx> coeff,
                     cplx h_direct, const LinkIndicators& ind, bool direct_clear, cplx x) {
    if (ind.link != (ind.height || ind.width)) throw InvalidArgument("inconsistent link indicators");
    if (h_rp.size() != coeff.size() || h_br.size() != coeff.size())
        throw InvalidArgument("channel and coefficient lengths differ");
    cplx cascade{0.0, 0.0};
    for (std::size_t k = 0; k < coeff.size(); ++k) cascade += std::conj(h_rp[k]) * coeff[k] * h_br[k];
    if (!ind.link) return cascade * x;
    if (ind.height) return (cascade + h_direct) * x;
    return (cascade + (direct_clear ? 1.0 : 0.0) * h_direct) * x;
}

std::vector<double> link_powers(std::size_t i, const LinkTopology& topo, const ChannelRealization& ch,
                                std::span<const StarRisState> states, double tx_power) {
    if (states.size() != topo.n_ris) throw InvalidArgument("one state per surface required");
    const cplx x{std::sqrt(tx_power), 0.0};
    std::vector<double> out;
    out.reserve(topo.n_links());
    if (topo.n_ris == 0) {
        for (std::size_t a = 0; a < 2; ++a) out.push_back(std::norm(ch.h_bs_point(a, i) * x));
        return out;
    }
    for (std::size_t a = 0; a < 2; ++a) {
        for (std::size_t ns = 0; ns < topo.n_ris; ++ns) {
            const auto& st = states[ns];
            const RisMode mode = topo.mode_at(ns, i);
            const std::size_t off = mode == RisMode::Reflect ? 0 : st.k_re;
            const std::size_t len = mode == RisMode::Reflect ? st.k_re : st.k_tr;
            const auto coeff = coefficient_diagonal(st, mode);
            std::span<const cplx> rp(ch.h_ris_point(ns, i));
            std::span<const cplx> br(ch.h_bs_ris(a, ns));
            const cplx y = received_signal(rp.subspan(off, len), br.subspan(off, len), coeff, ch.h_bs_point(a, i),
                                           topo.indicators[ns], topo.clear(a, ns, i), x);
            out.push_back(std::norm(y));
        }
    }
    return out;
}

RsrpResult rsrp(std::span<const double> powers) {
    if (powers.empty()) throw InvalidArgument("rsrp needs at least one link");
    RsrpResult r{powers[0], 0};
    for (std::size_t j = 1; j < powers.size(); ++j)
        if (powers[j] > r.power) r = {powers[j], j};
    return r;
}

double sinr(std::span<const double> powers, std::size_t serving, double noise_power) {
    if (!(noise_power > 0.0)) throw InvalidArgument("noise power must be positive");
    if (serving >= powers.size()) throw InvalidArgument("serving index out of range");
    double interference = 0.0;
    for (std::size_t j = 0; j < powers.size(); ++j)
        if (j != serving) interference += powers[j];
    return powers[serving] / (interference + noise_power);
}

double coverage(std::span<const double> rsrp_values, std::span<const double> weights, double threshold) {
    if (rsrp_values.size() != weights.size()) throw InvalidArgument("coverage: length mismatch");
    double c = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i)
        if (rsrp_values[i] >= threshold) c += weights[i];
    return c;
}

double capacity(std::span<const double> sinr_values, std::span<const double> weights, double bandwidth) {
    if (sinr_values.size() != weights.size()) throw InvalidArgument("capacity: length mismatch");
    if (!(bandwidth > 0.0)) throw InvalidArgument("bandwidth must be positive");
    double c = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) c += weights[i] * bandwidth * std::log2(1.0 + sinr_values[i]);
    return c;
}

NetworkMetrics evaluate_network(const LinkTopology& topo, const ChannelRealization& ch,
                                std::span<const StarRisState> states, double tx_power,
                                const ObjectiveWeights& weights, const RadioConfig& radio) {
    NetworkMetrics m;
    m.rsrp.resize(topo.n_points);
    m.sinr.resize(topo.n_points);
    m.best_server.resize(topo.n_points);
    for (std::size_t i = 0; i < topo.n_points; ++i) {
        const auto p = link_powers(i, topo, ch, states, tx_power);
        const auto best = rsrp(p);
        m.rsrp[i] = best.power;
        m.sinr[i] = sinr(p, best.index, radio.noise_power);
        if (topo.n_ris == 0)
            m.best_server[i] = {best.index, -1};
        else
            m.best_server[i] = {best.index / topo.n_ris, static_cast<long>(best.index % topo.n_ris)};
    }
    m.coverage = coverage(m.rsrp, weights.cov, radio.rsrp_threshold);
    m.capacity = capacity(m.sinr, weights.cap, radio.bandwidth);
    return m;
}

void write_metrics_csv(std::ostream& os, std::size_t t, const GridMap& grid, const NetworkMetrics& m,
                       double rsrp_threshold, bool header) {
    if (header) os << "t,i,x,y,rsrp_dBW,serving_a,serving_ns,sinr_dB,covered_flag\n";
    char buf[256];
    for (std::size_t i = 0; i < m.rsrp.size(); ++i) {
        const auto& p = grid.sample_points[i];
        std::snprintf(buf, sizeof buf, "%zu,%zu,%.6g,%.6g,%.10g,%zu,%ld,%.10g,%d\n", t, i, p.x, p.y,
                      linear_to_db(m.rsrp[i]) - 30.0, m.best_server[i].bs, m.best_server[i].ris,
                      linear_to_db(m.sinr[i]), m.rsrp[i] >= rsrp_threshold ? 1 : 0);
        os << buf;
    }
}

} // namespace starcco
