#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "support/weyl_oracle.hpp"
#include "udw/errors.hpp"
#include "udw/fock_oracle.hpp"
#include "udw/state_assembly.hpp"

using namespace udw;
using namespace udw::oracle;
using Catch::Matchers::WithinAbs;

namespace {

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

std::vector<cplx> random_amps(std::mt19937_64& rng, int m, double s) {
    std::normal_distribution<double> g(0.0, s);
    std::vector<cplx> v(m);
    for (auto& z : v) z = {g(rng), g(rng)};
    return v;
}

weyl::Functionals to_weyl(const std::vector<cplx>& a, const std::vector<cplx>& b, const std::vector<cplx>& al) {
    weyl::Functionals f{};
    cplx ca{}, cb{};
    for (std::size_t j = 0; j < a.size(); ++j) {
        f.I_A += std::norm(a[j]);
        f.I_B += std::norm(b[j]);
        f.Z += std::conj(a[j]) * b[j];
        ca += a[j] * std::conj(al[j]);
        cb += b[j] * std::conj(al[j]);
    }
    f.C_A = ca.imag();
    f.C_B = cb.imag();
    return f;
}

DetectorParams det(double lam, std::vector<double> x, double t) {
    DetectorParams d;
    d.coupling = lam;
    d.position = std::move(x);
    d.switch_time = t;
    d.smearing = SmearingProfile::gaussian(1.0);
    return d;
}

}  // namespace

TEST_CASE("single-mode vacuum expectation of exp(2Y)") {
    // |b| = 1: e^{2Y} is the unit displacement and <0|D(1)|0> = e^{-1/2}.
    const auto sys = OracleSystem::from_amplitudes({1.0}, std::nullopt, {}, 40);
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(41);
    v(0) = 1.0;
    sys.apply(sys.exp_y(0, 1, 0), 0, v);
    sys.apply(sys.exp_y(0, 1, 0), 0, v);
    CHECK_THAT(std::abs(v(0) - std::exp(-0.5)), WithinAbs(0.0, 1e-12));
}

TEST_CASE("vacuum displacement is the identity") {
    const auto sys = OracleSystem::from_amplitudes({0.3, cplx(0, 0.2)}, std::nullopt, {}, 10);
    for (int j = 0; j < 2; ++j)
        CHECK(max_abs(sys.displacement(j) - Eigen::MatrixXcd::Identity(11, 11)) < 1e-15);
    CHECK(sys.displacement_unitarity_error() < 1e-14);
}

TEST_CASE("disjoint mode support decouples the detectors") {
    const auto sys = OracleSystem::from_amplitudes({0.7, 0.0}, std::vector<cplx>{0.0, cplx(0.4, 0.5)}, {}, 30);
    const auto kf = grid_functionals(sys);
    CHECK(kf.theta == 0.0);
    CHECK(kf.omega == 0.0);
    const auto ab = oracle_evolve_pair(sys, Ordering::a_then_b);
    const auto ba = oracle_evolve_pair(sys, Ordering::b_then_a);
    CHECK(max_abs(ab.rho - ba.rho) < 1e-14);
}

TEST_CASE("coherent overlaps") {
    const std::vector<cplx> z{0.0}, one{1.0}, two{2.0};
    CHECK(std::abs(oracle_overlap(z, z, 20) - 1.0) < 1e-14);
    CHECK(std::abs(oracle_overlap(one, z, 40) - std::exp(-0.5)) < 1e-12);
    CHECK(std::abs(oracle_overlap(two, z, 40) - std::exp(-2.0)) < 1e-12);
    CHECK(std::abs(coherent_overlap_closed(one, z) - std::exp(-0.5)) < 1e-15);
    CHECK(std::abs(coherent_overlap_closed(two, z) - std::exp(-2.0)) < 1e-15);

    std::mt19937_64 rng(3);
    for (int i = 0; i < 50; ++i) {
        const auto b1 = random_amps(rng, 2, 0.7), b2 = random_amps(rng, 2, 0.7);
        CHECK(std::abs(oracle_overlap(b1, b2, 40) - coherent_overlap_closed(b1, b2)) < 1e-8);
    }
}

TEST_CASE("single evolution matches the closed form") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10; ++i) {
        const auto b = random_amps(rng, 2, 0.8), al = random_amps(rng, 2, 0.6);
        const auto sys = OracleSystem::from_amplitudes(b, std::nullopt, al, 40);
        const auto ev = oracle_evolve_single(sys);
        const auto kf = grid_functionals(sys);
        CHECK(max_abs(ev.rho - rho_single(kf)) < 1e-8);
        const auto w = to_weyl(b, b, al);
        CHECK(max_abs(ev.rho - weyl::rho_single(w)) < 1e-8);
        CHECK(ev.truncation_tail < 1e-10);
    }
}

TEST_CASE("pair evolution matches the closed form in both orderings") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 6; ++i) {
        const auto a = random_amps(rng, 2, 0.7), b = random_amps(rng, 2, 0.7), al = random_amps(rng, 2, 0.5);
        for (bool b_first : {false, true}) {
            const auto sys = OracleSystem::from_amplitudes(a, b, al, 40, 4096, b_first);
            const auto ev = oracle_evolve_pair(sys);
            CHECK(max_abs(ev.rho - rho_pair(grid_functionals(sys))) < 1e-8);
            CHECK(max_abs(ev.rho - weyl::rho_pair(to_weyl(a, b, al), b_first)) < 1e-8);
        }
    }
}

TEST_CASE("zero amplitudes leave the detectors in the ground state") {
    const auto sys = OracleSystem::from_amplitudes({0.0, 0.0}, std::vector<cplx>{0.0, 0.0}, {0.5, 0.2}, 10);
    const auto r2 = oracle_evolve_single(sys).rho;
    CHECK(std::abs(r2(0, 0) - 1.0) < 1e-14);
    CHECK(max_abs(r2) - 1.0 < 1e-14);
    const auto r4 = oracle_evolve_pair(sys).rho;
    Eigen::Matrix4cd g = Eigen::Matrix4cd::Zero();
    g(0, 0) = 1.0;
    CHECK(max_abs(r4 - g) < 1e-14);
}

TEST_CASE("vacuum input has no single-detector coherence") {
    const auto sys = OracleSystem::from_amplitudes({0.6, cplx(0.1, -0.4)}, std::nullopt, {}, 30);
    const auto r = oracle_evolve_single(sys).rho;
    CHECK(std::abs(r(0, 1)) < 1e-10);
}

TEST_CASE("ordering changes the state by at most 2|theta|") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 8; ++i) {
        const auto a = random_amps(rng, 2, 0.6), b = random_amps(rng, 2, 0.6), al = random_amps(rng, 2, 0.4);
        const auto sys = OracleSystem::from_amplitudes(a, b, al, 36);
        const double theta = grid_functionals(sys).theta;
        const auto d = max_abs(oracle_evolve_pair(sys, Ordering::a_then_b).rho -
                               oracle_evolve_pair(sys, Ordering::b_then_a).rho);
        CHECK(d <= 2.0 * std::abs(theta) + 1e-10);
    }
}

TEST_CASE("exchange relation on the truncated space") {
    std::mt19937_64 rng(14);
    const auto a = random_amps(rng, 3, 0.8), b = random_amps(rng, 3, 0.8);
    const auto sys = OracleSystem::from_amplitudes(a, b, {}, 40, std::size_t{1} << 20);
    CHECK(bch_residual(sys) < 1e-8);
}

TEST_CASE("budget and input validation") {
    CHECK_THROWS_AS(OracleSystem::from_amplitudes(std::vector<cplx>(5, 0.1), std::nullopt, {}, 9, 1000),
                    BudgetExceeded);
    CHECK_THROWS_AS(OracleSystem::from_amplitudes({}, std::nullopt, {}, 9), InvalidArgument);
    CHECK_THROWS_AS(OracleSystem::from_amplitudes({0.1}, std::vector<cplx>{0.1, 0.2}, {}, 9), InvalidArgument);
    CHECK_THROWS_AS(OracleSystem::from_amplitudes({0.1}, std::nullopt, {}, 0), InvalidArgument);
    ModeGrid g;
    CHECK_THROWS_AS(g.validate(), InvalidArgument);
    g.modes = {{{1.0, 0.0, 0.0}, -1.0}};
    CHECK_THROWS_AS(g.validate(), InvalidArgument);
    const auto single = OracleSystem::from_amplitudes({0.1}, std::nullopt, {}, 5);
    CHECK_THROWS_AS(oracle_evolve_pair(single), InvalidArgument);
    CHECK_THROWS_AS(bch_residual(single), InvalidArgument);
}

TEST_CASE("generators are anti-Hermitian") {
    const auto sys = OracleSystem::from_amplitudes({cplx(0.3, -0.8)}, std::vector<cplx>{cplx(-1.1, 0.2)}, {}, 15);
    for (int nu = 0; nu < 2; ++nu) {
        const auto y = sys.generator(nu, 0);
        CHECK(max_abs(y + y.adjoint()) == 0.0);
    }
}

TEST_CASE("error shrinks as the truncation grows") {
    const std::vector<cplx> b{cplx(1.2, 0.4)}, al{cplx(0.8, -0.5)};
    double prev = 1.0;
    for (int n : {6, 12, 24, 48}) {
        const auto sys = OracleSystem::from_amplitudes(b, std::nullopt, al, n);
        const double e = max_abs(oracle_evolve_single(sys).rho - rho_single(grid_functionals(sys)));
        CHECK(e < prev);
        prev = std::max(e, 1e-15);
    }
    CHECK(prev < 1e-10);
}

TEST_CASE("discretized field reproduces the vacuum correlator") {
    const auto a = det(1.0, {0, 0, 0}, 0.0), b = det(1.0, {2, 0, 0}, 1.0);
    const ModeGrid g = radial_mode_grid(3, 0.0, 5.0, 2, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, 0, 0}}, 2);
    ModeGrid gg = g;
    gg.budget = 1u << 30;
    const auto sys = discretize(a, b, CoherentAmplitude::vacuum(), 3, gg);
    cplx Z{};
    for (int j = 0; j < sys.modes(); ++j) Z += std::conj(sys.amplitudes_A()[j]) * sys.amplitudes_B()[j];
    CHECK(std::abs(oracle_vacuum_correlator(sys) + std::conj(Z) / 4.0) < 1e-12);
}

TEST_CASE("discretize checks the grid") {
    const auto a = det(1.0, {0, 0, 0}, 0.0);
    ModeGrid g;
    g.modes = {{{1.0, 0.0}, 1.0}};
    CHECK_THROWS_AS(discretize(a, std::nullopt, CoherentAmplitude::vacuum(), 3, g), InvalidArgument);
    CHECK_THROWS_AS(radial_mode_grid(4, 0, 1, 2, {{1, 0, 0, 0}}, 3), UnsupportedDimension);
    CHECK_THROWS_AS(radial_mode_grid(3, 1, 0.5, 2, {{1, 0, 0}}, 3), InvalidArgument);
}

TEST_CASE("B switched first is detected from the switch times") {
    const auto a = det(1.0, {0, 0, 0}, 1.0), b = det(1.0, {1, 0, 0}, 0.0);
    ModeGrid g;
    g.truncation = 8;
    g.modes = {{{0.5, 0.0, 0.0}, 1.0}};
    CHECK(discretize(a, b, CoherentAmplitude::vacuum(), 3, g).b_first());
    CHECK_FALSE(discretize(b, a, CoherentAmplitude::vacuum(), 3, g).b_first());
}
