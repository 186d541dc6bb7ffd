#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "starcco/starris.hpp"
#include "starcco/scenario.hpp"

using namespace starcco;

namespace {

std::vector<double> random_phases(Rng& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    std::vector<double> out(n);
    for (auto& p : out) p = u(rng);
    return out;
}

cplx random_cplx(Rng& rng) { return complex_normal(rng); }

} // namespace

TEST_CASE("coefficient diagonal") {
    StarRisState one{1, 1, 1.0, 1.0, {0.0}, {0.0}};
    const auto d = coefficient_diagonal(one, RisMode::Reflect);
    REQUIRE(d.size() == 1);
    CHECK(d[0] == cplx{1.0, 0.0});

    const auto s = StarRisState::from_share(2, 2, 0.5, {0.0, 1.0}, {2.0, 3.0});
    CHECK(s.beta_re == doctest::Approx(0.25));
    double trace_re = 0.0;
    for (auto c : coefficient_diagonal(s, RisMode::Reflect)) trace_re += std::norm(c);
    CHECK(trace_re == doctest::Approx(0.5));
}

TEST_CASE("energy identity holds for every share") {
    Rng rng = make_stream(1, {});
    for (double g = 0.1; g < 0.95; g += 0.1) {
        for (auto [kr, kt] : {std::pair<std::size_t, std::size_t>{1, 1}, {8, 8}, {3, 13}}) {
            const auto s = StarRisState::from_share(kr, kt, g, random_phases(rng, kr), random_phases(rng, kt));
            double tr = 0.0;
            for (auto c : coefficient_diagonal(s, RisMode::Reflect)) tr += std::norm(c);
            for (auto c : coefficient_diagonal(s, RisMode::Transmit)) tr += std::norm(c);
            CHECK(std::abs(tr - 1.0) < 1e-9);
        }
    }
}

TEST_CASE("invalid states are rejected") {
    CHECK_THROWS_AS(StarRisState::from_share(2, 2, 0.0, {0, 0}, {0, 0}), InvalidArgument);
    CHECK_THROWS_AS(StarRisState::from_share(2, 2, 1.0, {0, 0}, {0, 0}), InvalidArgument);
    StarRisState bad{2, 2, 0.3, 0.3, {0, 0}, {0, 0}};
    CHECK_THROWS_AS(bad.validate(), InvalidArgument);
    StarRisState phase{1, 1, 0.5, 0.5, {7.0}, {0.0}};
    CHECK_THROWS_AS(phase.validate(), InvalidArgument);
}

TEST_CASE("received signal cases") {
    const std::vector<cplx> hrp{{0.3, -0.4}}, hbr{{0.5, 0.2}}, coeff{{1.0, 0.0}};
    const cplx x{2.0, 0.0};
    const LinkIndicators none{false, false, false};
    const cplx cascade = x * std::conj(hrp[0]) * hbr[0];
    CHECK(std::abs(received_signal(hrp, hbr, coeff, {0.7, 0.1}, none, true, x) - cascade) < 1e-15);

    const LinkIndicators height{true, false, true};
    CHECK(std::abs(received_signal(hrp, hbr, coeff, {0.0, 0.0}, height, true, x) - cascade) < 1e-15);
    CHECK(std::abs(received_signal(hrp, hbr, coeff, {0.7, 0.1}, height, false, x) - (cascade + x * cplx{0.7, 0.1})) <
          1e-15);

    const LinkIndicators width{false, true, true};
    CHECK(std::abs(received_signal(hrp, hbr, coeff, {0.7, 0.1}, width, false, x) - cascade) < 1e-15);
    CHECK(std::abs(received_signal(hrp, hbr, coeff, {0.7, 0.1}, width, true, x) - (cascade + x * cplx{0.7, 0.1})) <
          1e-15);

    const LinkIndicators inconsistent{true, false, false};
    CHECK_THROWS_AS(received_signal(hrp, hbr, coeff, {}, inconsistent, true, x), InvalidArgument);
}

TEST_CASE("received signal term by term") {
    Rng rng = make_stream(2, {});
    for (int t = 0; t < 50; ++t) {
        const double beta = 0.1 + 0.4 * uniform01(rng);
        const auto phi = random_phases(rng, 2);
        std::vector<cplx> hrp{random_cplx(rng), random_cplx(rng)}, hbr{random_cplx(rng), random_cplx(rng)};
        std::vector<cplx> coeff{std::polar(std::sqrt(beta), phi[0]), std::polar(std::sqrt(beta), phi[1])};
        const cplx direct = random_cplx(rng), x{1.5, 0.0};
        cplx expect = direct;
        for (int k = 0; k < 2; ++k)
            expect += std::sqrt(beta) * std::exp(cplx{0.0, phi[k]}) * std::conj(hrp[k]) * hbr[k];
        const cplx got = received_signal(hrp, hbr, coeff, direct, {true, false, true}, true, x);
        CHECK(std::abs(got - x * expect) < 1e-12);
    }
}

TEST_CASE("rsrp picks the first maximum") {
    const std::vector<double> one{0.7};
    CHECK(rsrp(one).power == 0.7);
    const std::vector<double> p{0.1, 0.4, 0.3, 0.2};
    CHECK(rsrp(p).power == 0.4);
    CHECK(rsrp(p).index == 1);
    const std::vector<double> tie{0.4, 0.1, 0.4};
    CHECK(rsrp(tie).index == 0);
    CHECK_THROWS_AS(rsrp(std::vector<double>{}), InvalidArgument);
}

TEST_CASE("rsrp agrees with enumeration") {
    Rng rng = make_stream(3, {});
    for (std::size_t nris = 1; nris <= 4; ++nris) {
        for (int t = 0; t < 20; ++t) {
            std::vector<double> p(2 * nris);
            for (auto& v : p) v = uniform01(rng);
            std::size_t best_a = 0, best_ns = 0;
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t ns = 0; ns < nris; ++ns)
                    if (p[a * nris + ns] > p[best_a * nris + best_ns]) best_a = a, best_ns = ns;
            CHECK(rsrp(p).index == best_a * nris + best_ns);
        }
    }
}

TEST_CASE("sinr") {
    const std::vector<double> one{3.0};
    CHECK(sinr(one, 0, 2.0) == doctest::Approx(1.5));
    const std::vector<double> p{4, 1, 1};
    CHECK(sinr(p, 0, 2.0) == doctest::Approx(1.0));
    Rng rng = make_stream(4, {});
    for (int t = 0; t < 100; ++t) {
        std::vector<double> q(4);
        for (auto& v : q) v = uniform01(rng);
        const auto best = rsrp(q);
        CHECK(sinr(q, best.index, 0.1) <= best.power / 0.1);
    }
}

TEST_CASE("sinr is scale invariant as noise vanishes") {
    const std::vector<double> p{4e-3, 1e-3, 2e-3};
    std::vector<double> scaled;
    for (double v : p) scaled.push_back(7.0 * v);
    const double n = 1e-15;
    CHECK(sinr(p, 0, n) == doctest::Approx(sinr(scaled, 0, n)).epsilon(1e-9));
}

TEST_CASE("coverage") {
    const std::vector<double> w(4, 0.25);
    const std::vector<double> r{1.0, 2.0, 0.1, 3.0};
    CHECK(coverage(r, w, 0.5) == doctest::Approx(0.75));
    CHECK(coverage(r, w, 5.0) == 0.0);
    CHECK(coverage(r, w, 1.0) == doctest::Approx(0.75));

    Rng rng = make_stream(5, {});
    for (int t = 0; t < 50; ++t) {
        std::vector<double> ww(7), rr(7);
        double sum = 0.0;
        for (auto& v : ww) sum += (v = uniform01(rng));
        for (auto& v : ww) v /= sum;
        for (auto& v : rr) v = uniform01(rng);
        double expect = 0.0;
        for (int i = 0; i < 7; ++i) expect += rr[i] >= 0.5 ? ww[i] : 0.0;
        CHECK(coverage(rr, ww, 0.5) == doctest::Approx(expect));
    }
}

TEST_CASE("capacity") {
    CHECK(capacity(std::vector<double>{3.0}, std::vector<double>{1.0}, 1.0) == doctest::Approx(2.0));
    CHECK(capacity(std::vector<double>{0.0, 0.0}, std::vector<double>{0.5, 0.5}, 1e6) == 0.0);
    const std::vector<double> s{1.0, 3.0, 7.0}, w{0.2, 0.3, 0.5};
    CHECK(capacity(s, w, 2.0) == doctest::Approx(2.0 * (0.2 * 1.0 + 0.3 * 2.0 + 0.5 * 3.0)));
}

TEST_CASE("coverage is monotone in transmit power") {
    Scenario sc = scenario_preset("desk");
    const GridMap g = sc.grid();
    const auto topo = build_topology(g);
    const auto ch = draw_channels(g, sc.channel, sc.elements, 11, 0);
    Rng rng = make_stream(6, {});
    std::vector<StarRisState> st;
    for (std::size_t ns = 0; ns < g.n_ris(); ++ns)
        st.push_back(StarRisState::from_share(sc.elements.k_re, sc.elements.k_tr(), 0.5,
                                              random_phases(rng, sc.elements.k_re),
                                              random_phases(rng, sc.elements.k_tr())));
    const auto w = ObjectiveWeights::uniform(g.n_points);
    double prev = -1.0;
    for (double p = 0.2; p <= 200.0; p *= 1.5) {
        const auto m = evaluate_network(topo, ch, st, p, w, sc.env.radio);
        CHECK(m.coverage >= prev);
        prev = m.coverage;
    }
}

TEST_CASE("evaluate network matches a hand recomputation") {
    Scenario sc = scenario_preset("desk");
    const GridMap g = sc.grid();
    const auto topo = build_topology(g);
    const auto ch = draw_channels(g, sc.channel, sc.elements, 12, 0);
    Rng rng = make_stream(7, {});
    std::vector<StarRisState> st;
    for (std::size_t ns = 0; ns < g.n_ris(); ++ns)
        st.push_back(StarRisState::from_share(sc.elements.k_re, sc.elements.k_tr(), 0.3,
                                              random_phases(rng, sc.elements.k_re),
                                              random_phases(rng, sc.elements.k_tr())));
    const auto w = ObjectiveWeights::uniform(g.n_points);
    const double ptx = 100.0;
    const auto m = evaluate_network(topo, ch, st, ptx, w, sc.env.radio);
    const std::size_t kre = sc.elements.k_re;
    double cov = 0.0, cap = 0.0;
    for (std::size_t i = 0; i < g.n_points; ++i) {
        std::vector<double> powers;
        for (std::size_t a = 0; a < 2; ++a) {
            for (std::size_t ns = 0; ns < g.n_ris(); ++ns) {
                const bool re = g.sample_points[i].x >= g.ris[ns].x;
                const auto& hrp = ch.h_ris_point(ns, i);
                const auto& hbr = ch.h_bs_ris(a, ns);
                cplx y = 0.0;
                for (std::size_t k = 0; k < sc.elements.k_total(); ++k) {
                    if ((k < kre) != re) continue;
                    const double beta = re ? st[ns].beta_re : st[ns].beta_tr;
                    const double phi = re ? st[ns].phi_re[k] : st[ns].phi_tr[k - kre];
                    y += std::conj(hrp[k]) * std::polar(std::sqrt(beta), phi) * hbr[k];
                }
                y += ch.h_bs_point(a, i);  // desk surfaces sit below the height threshold
                powers.push_back(std::norm(y * std::sqrt(ptx)));
            }
        }
        std::size_t best = 0;
        for (std::size_t j = 1; j < powers.size(); ++j)
            if (powers[j] > powers[best]) best = j;
        double interf = 0.0;
        for (std::size_t j = 0; j < powers.size(); ++j)
            if (j != best) interf += powers[j];
        CHECK(m.rsrp[i] == doctest::Approx(powers[best]).epsilon(1e-12));
        if (powers[best] >= sc.env.radio.rsrp_threshold) cov += w.cov[i];
        cap += w.cap[i] * sc.env.radio.bandwidth * std::log2(1.0 + powers[best] / (interf + sc.env.radio.noise_power));
    }
    CHECK(m.coverage == doctest::Approx(cov).epsilon(1e-12));
    CHECK(m.capacity == doctest::Approx(cap).epsilon(1e-12));
}

TEST_CASE("metrics csv") {
    Scenario sc = scenario_preset("desk");
    sc.ris.clear();
    const GridMap g = sc.grid();
    const auto topo = build_topology(g);
    const auto ch = draw_channels(g, sc.channel, sc.elements, 1, 0);
    const auto m = evaluate_network(topo, ch, {}, 10.0, ObjectiveWeights::uniform(g.n_points), sc.env.radio);
    std::ostringstream os;
    write_metrics_csv(os, 0, g, m, sc.env.radio.rsrp_threshold, true);
    const std::string text = os.str();
    CHECK(text.rfind("t,i,x,y,rsrp_dBW,serving_a,serving_ns,sinr_dB,covered_flag\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + static_cast<long>(g.n_points));
    CHECK(text.find(",-1,") != std::string::npos);
}
