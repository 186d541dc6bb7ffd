#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "starcco/channel.hpp"
#include "starcco/scenario.hpp"

using namespace starcco;

namespace {

double mean_power(double alpha, double gain, std::size_t n, std::uint64_t seed) {
    Rng rng = make_stream(seed, {});
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::norm(rician_sample(cplx{0.6, 0.8}, alpha, gain, rng));
    return s / static_cast<double>(n);
}

} // namespace

TEST_CASE("wave vector axis cases") {
    const Vec3 a = wave_vector(0, 0, 1);
    CHECK(a.x == doctest::Approx(kTwoPi));
    CHECK(a.y == doctest::Approx(0.0));
    CHECK(a.z == doctest::Approx(0.0));
    const Vec3 b = wave_vector(kPi / 2, 0, 1);
    CHECK(b.x == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(b.y == doctest::Approx(kTwoPi));
}

TEST_CASE("wave vector matches scalar trig") {
    const double psi = kPi / 4, th = kPi / 6, lam = 0.0857;
    const Vec3 v = wave_vector(psi, th, lam);
    const double k = 2.0 * 3.141592653589793 / lam;
    CHECK(v.x == doctest::Approx(k * std::sqrt(3.0) / 2.0 * std::sqrt(0.5)));
    CHECK(v.y == doctest::Approx(k * std::sqrt(3.0) / 2.0 * std::sqrt(0.5)));
    CHECK(v.z == doctest::Approx(k * 0.5));
}

TEST_CASE("array response") {
    const std::vector<Vec3> origin{{0, 0, 0}};
    const auto one = array_response(0.3, 0.2, origin, 0.1);
    CHECK(one[0] == cplx{1.0, 0.0});

    const auto line = element_positions(4, 1, 0.025, 0.025);
    for (auto v : array_response(0, 0, line, 0.0857)) {
        CHECK(v.real() == doctest::Approx(1.0));
        CHECK(v.imag() == doctest::Approx(0.0));
    }
}

TEST_CASE("array response is unit modulus and conjugate symmetric in azimuth") {
    Rng rng = make_stream(5, {});
    std::uniform_real_distribution<double> ang(-kPi / 2, kPi / 2);
    const auto pos = element_positions(4, 1, 0.03, 0.03);  // y offsets only
    for (int t = 0; t < 50; ++t) {
        const double psi = ang(rng), th = ang(rng);
        const auto a = array_response(psi, th, pos, 0.0857);
        const auto b = array_response(-psi, th, pos, 0.0857);
        for (std::size_t k = 0; k < a.size(); ++k) {
            CHECK(std::abs(a[k]) == doctest::Approx(1.0));
            CHECK(std::abs(a[k] - std::conj(b[k])) < 1e-12);
        }
    }
}

TEST_CASE("los angles") {
    const Angles a = los_angles({0, 0, 1}, {1, 0, 0});
    CHECK(a.elevation == doctest::Approx(kPi / 4));
    CHECK(a.azimuth == doctest::Approx(0.0));
    CHECK(los_angles({0, 0, 0}, {1, 0, 0}).elevation == doctest::Approx(0.0));
    CHECK(los_angles({0, 0, 2}, {0, 1, 0}).azimuth == doctest::Approx(kPi / 2));
    CHECK_THROWS_AS(los_angles({1, 1, 1}, {1, 1, 1}), InvalidArgument);
}

TEST_CASE("los angles reconstruct the direction") {
    Rng rng = make_stream(6, {});
    std::uniform_real_distribution<double> u(-5, 5);
    for (int t = 0; t < 200; ++t) {
        const Vec3 s{u(rng), u(rng), u(rng)}, d{u(rng), u(rng), u(rng)};
        const Angles a = los_angles(s, d);
        CHECK(a.elevation >= -kPi / 2);
        CHECK(a.elevation <= kPi / 2);
        const Vec3 dir = d - s;
        const double n = dir.norm();
        CHECK(std::abs(std::cos(a.elevation) * std::cos(a.azimuth) - dir.x / n) < 1e-9);
        CHECK(std::abs(std::cos(a.elevation) * std::sin(a.azimuth) - dir.y / n) < 1e-9);
        CHECK(std::abs(-std::sin(a.elevation) - dir.z / n) < 1e-9);
    }
}

TEST_CASE("path loss") {
    CHECK(path_loss(1, 3.5, 1e-3) == doctest::Approx(1e-3));
    CHECK(path_loss(1, 2.2, 1e-3) == doctest::Approx(1e-3));
    CHECK(path_loss(10, 2, 1) == doctest::Approx(0.01));
    CHECK(path_loss(3.7, 2.8, 1) == doctest::Approx(std::exp(-2.8 * std::log(3.7))));
    CHECK(path_loss(0.5, 2.8, 1e-3) == doctest::Approx(1e-3));
}

TEST_CASE("rician limits") {
    Rng r1 = make_stream(9, {}), r2 = make_stream(9, {});
    const cplx los{0.6, 0.8};
    const cplx h = rician_sample(los, 1e12, 4.0, r1);
    CHECK(std::abs(h - 2.0 * los) / std::abs(2.0 * los) < 1e-5);

    const cplx nlos = rician_sample(los, 0.0, 4.0, r2);
    Rng r3 = make_stream(9, {});
    CHECK(nlos == 2.0 * complex_normal(r3));

    Rng r4 = make_stream(9, {});
    CHECK(rician_sample(los, ChannelParams::kLosOnly, 4.0, r4) == 2.0 * los);
}

TEST_CASE("rician power is normalized") {
    for (double alpha : {0.0, 2.0, 1e12}) {
        const double m = mean_power(alpha, 1.0, 100000, 42);
        CHECK(m >= 0.98);
        CHECK(m <= 1.02);
    }
    CHECK(mean_power(2.0, 0.01, 100000, 43) == doctest::Approx(0.01).epsilon(0.02));
}

TEST_CASE("channel draws are deterministic and per-surface independent") {
    Scenario s = scenario_preset("desk");
    const GridMap g = s.grid();
    const auto a = draw_channels(g, s.channel, s.elements, 7, 3);
    const auto b = draw_channels(g, s.channel, s.elements, 7, 3);
    CHECK(a.bs_point == b.bs_point);
    CHECK(a.bs_ris == b.bs_ris);
    CHECK(a.ris_point == b.ris_point);
    CHECK(a.all_finite());

    const auto c = draw_channels(g, s.channel, s.elements, 7, 4);
    CHECK(a.bs_point != c.bs_point);

    Scenario one = s;
    one.ris.resize(1);
    const auto d = draw_channels(one.grid(), s.channel, s.elements, 7, 3);
    CHECK(d.bs_point == a.bs_point);
    CHECK(d.h_bs_ris(1, 0) == a.h_bs_ris(1, 0));
    CHECK(d.h_ris_point(0, 5) == a.h_ris_point(0, 5));
}

TEST_CASE("free-space reference gain") {
    CHECK(free_space_reference_gain(3.5e9) == doctest::Approx(std::pow(kSpeedOfLight / (4 * kPi * 3.5e9), 2)));
    CHECK(free_space_reference_gain(26e9) < free_space_reference_gain(3.5e9));
}

TEST_CASE("parameter validation") {
    ChannelParams p;
    CHECK_NOTHROW(p.validate());
    p.reference_gain = 0;
    CHECK_THROWS_AS(p.validate(), InvalidArgument);
    ElementLayout l;
    CHECK_NOTHROW(l.validate());
    l.k_re = 0;
    CHECK_THROWS_AS(l.validate(), InvalidArgument);
}
