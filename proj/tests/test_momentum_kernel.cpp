#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "support/dense.hpp"
#include "udw/errors.hpp"
#include "udw/momentum_kernel.hpp"
#include "udw/sampling.hpp"

using namespace udw;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

DetectorParams gaussian(DetectorLabel label, double lam, std::vector<double> x, double t, double sigma = 1.0) {
    DetectorParams d;
    d.label = label;
    d.coupling = lam;
    d.position = std::move(x);
    d.switch_time = t;
    d.smearing = SmearingProfile::gaussian(sigma);
    return d;
}

GaussianPacket packet(std::vector<double> k0, double s, double a0 = 1.0, double phase = 0.0) {
    GaussianPacket p;
    p.peak = a0;
    p.center = std::move(k0);
    p.spread = s;
    p.phase = phase;
    return p;
}

double dot3(double kx, double ky, double kz, const std::vector<double>& x) {
    return kx * x[0] + ky * x[1] + kz * x[2];
}

}  // namespace

TEST_CASE("fourier smearing of the shipped families") {
    const double norm3 = std::pow(2 * pi, -1.5);
    CHECK_THAT(fourier_smearing(SmearingProfile::pointlike(), 3, 7.3), WithinRel(norm3, 1e-15));
    CHECK_THAT(norm3, WithinAbs(0.0634936, 5e-8));
    CHECK_THAT(fourier_smearing(SmearingProfile::gaussian(1.0), 3, 0.0), WithinRel(norm3, 1e-15));
    CHECK_THAT(fourier_smearing(SmearingProfile::gaussian(0.7), 2, 1.5),
               WithinRel(std::exp(-0.5 * 0.49 * 2.25) / (2 * pi), 1e-15));
    CHECK_THAT(fourier_smearing(SmearingProfile::tophat(1.0), 1, 0.0), WithinRel(std::pow(2 * pi, -0.5), 1e-15));
}

TEST_CASE("tophat transform matches a direct real-space transform") {
    // F = 1/vol on the ball; integrate F e^{-ik.x} over the ball numerically.
    const auto g = udw::gauss_legendre(60, 0.0, 1.0);
    for (double R : {1.0, 0.6}) {
        for (double k : {0.05, 0.5, 2.0, 9.0}) {
            double s3 = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < g.nodes.size(); ++i) {
                const double r = R * g.nodes[i], w = R * g.weights[i];
                s3 += w * 4 * pi * r * r * std::sin(k * r) / (k * r);
                s2 += w * 2 * pi * r * std::cyl_bessel_j(0.0, k * r);
            }
            const double v3 = s3 / (4.0 / 3.0 * pi * R * R * R) * std::pow(2 * pi, -1.5);
            const double v2 = s2 / (pi * R * R) / (2 * pi);
            const double v1 = std::sin(k * R) / (k * R) * std::pow(2 * pi, -0.5);
            CHECK_THAT(fourier_smearing(SmearingProfile::tophat(R), 3, k), WithinAbs(v3, 1e-8));
            CHECK_THAT(fourier_smearing(SmearingProfile::tophat(R), 2, k), WithinAbs(v2, 1e-8));
            CHECK_THAT(fourier_smearing(SmearingProfile::tophat(R), 1, k), WithinAbs(v1, 1e-8));
        }
    }
}

TEST_CASE("beta definition") {
    DetectorParams d;
    d.coupling = 0.0;
    d.smearing = SmearingProfile::pointlike();
    const std::vector<double> k{0.6, 0.0, 0.8};
    CHECK(beta(d, k) == cplx(0.0, 0.0));
    d.coupling = 1.0;
    CHECK_THAT(std::abs(beta(d, k)), WithinAbs(0.0897936, 5e-8));
    // |beta|^2 = 2 lambda^2 eta^2 F^2 / |k| and the phase is -i e^{i(|k|t - k.x)}.
    auto g = gaussian(DetectorLabel::A, 0.7, {0.3, -1.0, 2.0}, 1.4);
    g.switch_weight = 1.9;
    const std::vector<double> q{0.4, -1.2, 0.5};
    const double kn = std::sqrt(0.16 + 1.44 + 0.25);
    const double F = fourier_smearing(g.smearing, 3, kn);
    const cplx b = beta(g, q);
    CHECK_THAT(std::norm(b), WithinRel(2 * 0.49 * 1.9 * 1.9 * F * F / kn, 1e-14));
    const cplx expected = cplx(0, -1) * std::polar(1.0, kn * 1.4 - (0.4 * 0.3 + 1.2 + 1.0)) * std::abs(b);
    CHECK(std::abs(b - expected) < 1e-15);
}

TEST_CASE("self overlap closed forms") {
    QuadratureConfig cfg;
    auto d = gaussian(DetectorLabel::A, 1.0, {0, 0, 0}, 0.0);
    const auto I = self_overlap(d, 3, cfg);
    CHECK_THAT(I.value, WithinRel(1.0 / (2 * pi * pi), 1e-10));
    CHECK_THAT(vacuum_overlap(I.value), WithinRel(std::exp(-1.0 / (4 * pi * pi)), 1e-10));
    // lambda^2 eta^2 / (2 pi^2 sigma^2) scaling in sigma and eta.
    d.smearing = SmearingProfile::gaussian(0.5);
    d.switch_weight = 3.0;
    CHECK_THAT(self_overlap(d, 3, cfg).value, WithinRel(9.0 / (2 * pi * pi * 0.25), 1e-10));
    // n = 2: 1/(2 sqrt(pi)) lambda^2 eta^2 / sigma.
    auto d2 = gaussian(DetectorLabel::A, 1.0, {0, 0}, 0.0);
    CHECK_THAT(self_overlap(d2, 2, cfg).value, WithinRel(0.5 / std::sqrt(pi), 1e-10));
    // n = 1 with an infrared cutoff kappa: E1(kappa^2) / pi.
    auto d1 = gaussian(DetectorLabel::A, 1.0, {0}, 0.0);
    QuadratureConfig ir = cfg;
    ir.ir_cutoff = 0.05;
    CHECK_THAT(self_overlap(d1, 1, ir).value, WithinRel(-std::expint(-0.0025) / pi, 1e-10));
    CHECK_THROWS_AS(self_overlap(d1, 1, cfg), DivergenceDetected);
    // Tophat in 3D: 9 / (4 pi^2 R^2) from the integral of j1(x)^2 / x.
    DetectorParams t;
    t.coupling = 1.0;
    t.smearing = SmearingProfile::tophat(1.0);
    CHECK_THAT(self_overlap(t, 3, cfg).value, WithinRel(9.0 / (4 * pi * pi), 1e-9));
    // Pointlike: UV divergent, Lambda^2 / (2 pi^2) with a cutoff.
    DetectorParams p;
    p.coupling = 1.0;
    CHECK_THROWS_AS(self_overlap(p, 3, cfg), DivergenceDetected);
    QuadratureConfig uv = cfg;
    uv.uv_cutoff = 3.0;
    CHECK_THAT(self_overlap(p, 3, uv).value, WithinRel(9.0 / (2 * pi * pi), 1e-10));
    p.coupling = 0.0;
    CHECK(self_overlap(p, 3, cfg).value == 0.0);
}

TEST_CASE("cross overlap special cases") {
    QuadratureConfig cfg;
    const auto a = gaussian(DetectorLabel::A, 1.3, {0.5, 0, 0}, 0.2);
    auto b = a;
    b.label = DetectorLabel::B;
    const auto Z = cross_overlap(a, b, 3, cfg);
    CHECK_THAT(Z.value.real(), WithinRel(self_overlap(a, 3, cfg).value, 1e-12));
    CHECK(std::abs(Z.value.imag()) < 1e-15);
    b.coupling = 0.0;
    CHECK(cross_overlap(a, b, 3, cfg).value == cplx(0.0));
}

TEST_CASE("cross overlap matches a dense 3D reference") {
    QuadratureConfig cfg;
    const auto a = gaussian(DetectorLabel::A, 1.0, {0, 0, 0}, 0.0);
    const auto b = gaussian(DetectorLabel::B, 1.0, {2.0 / std::sqrt(3.0), 2.0 / std::sqrt(3.0), -2.0 / std::sqrt(3.0)},
                            1.0);
    const auto Z = cross_overlap(a, b, 3, cfg);
    const cplx ref = dense::spherical(
        [&](double kx, double ky, double kz) {
            const double k = std::sqrt(kx * kx + ky * ky + kz * kz);
            const double amp = 4.0 / (2.0 * k) * std::pow(2 * pi, -3) * std::exp(-k * k);
            return amp * std::polar(1.0, k * 1.0 - dot3(kx, ky, kz, b.position));
        },
        9.0);
    CHECK(std::abs(Z.value - ref) < 1e-8);
    CHECK(std::abs(Z.value - cplx(0.0215988, 0.0151168)) < 1e-7);
}

TEST_CASE("coherent shift matches a dense 3D reference") {
    QuadratureConfig cfg;
    const auto d = gaussian(DetectorLabel::A, 1.0, {0, 0, 0}, 0.0);
    const auto alpha = CoherentAmplitude::packet(packet({1, 0, 0}, 0.5));
    const double C = coherent_shift(d, alpha, 3, cfg).value;
    auto reference = [&](const DetectorParams& det, const CoherentAmplitude& al) {
        // C = -2 lambda eta Re int (2k)^{-1/2} F alpha e^{-i(kt - k.x)}
        const cplx v = dense::spherical(
            [&](double kx, double ky, double kz) {
                const double k = std::sqrt(kx * kx + ky * ky + kz * kz);
                const std::vector<double> kv{kx, ky, kz};
                const double F = std::pow(2 * pi, -1.5) * std::exp(-0.5 * k * k * det.smearing.width * det.smearing.width);
                return F / std::sqrt(2.0 * k) * al.evaluate(kv) *
                       std::polar(1.0, -(k * det.switch_time - dot3(kx, ky, kz, det.position)));
            },
            5.0);
        return -2.0 * det.coupling * det.switch_weight * v.real();
    };
    CHECK_THAT(C, WithinAbs(reference(d, alpha), 1e-8));
    CHECK_THAT(C, WithinAbs(-0.0885279659, 1e-9));

    // A displaced, phased superposition against the same reference.
    auto moved = gaussian(DetectorLabel::A, 0.8, {0.4, -0.3, 1.0}, 0.7, 0.8);
    GaussianPacket p2 = packet({0, 0.6, -0.4}, 0.4, 0.7, 1.1);
    p2.offset = {1.0, 0.0, -0.5};
    const auto sup = CoherentAmplitude::superposition({packet({1, 0, 0}, 0.5, 1.0, 0.3), p2});
    CHECK_THAT(coherent_shift(moved, sup, 3, cfg).value, WithinAbs(reference(moved, sup), 1e-8));
}

TEST_CASE("coherent shift is linear in the amplitude") {
    QuadratureConfig cfg;
    const auto d = gaussian(DetectorLabel::A, 1.0, {0.3, 0, 0}, 0.4);
    CHECK(coherent_shift(d, CoherentAmplitude::vacuum(), 3, cfg).value == 0.0);
    const double c1 = coherent_shift(d, CoherentAmplitude::packet(packet({1, 0.2, 0}, 0.5, 1.0, 0.4)), 3, cfg).value;
    const double c2 = coherent_shift(d, CoherentAmplitude::packet(packet({1, 0.2, 0}, 0.5, 2.0, 0.4)), 3, cfg).value;
    CHECK_THAT(c2, WithinRel(2.0 * c1, 1e-12));
    const double c3 = coherent_shift(d, CoherentAmplitude::packet(packet({-0.5, 0, 1}, 0.3, 1.5)), 3, cfg).value;
    const auto sup = CoherentAmplitude::superposition({packet({1, 0.2, 0}, 0.5, 1.0, 0.4), packet({-0.5, 0, 1}, 0.3, 1.5)});
    CHECK_THAT(coherent_shift(d, sup, 3, cfg).value, WithinAbs(c1 + c3, 1e-12));
}

TEST_CASE("kernel functionals special cases") {
    QuadratureConfig cfg;
    auto a = gaussian(DetectorLabel::A, 0.0, {0, 0, 0}, 0.0);
    auto b = gaussian(DetectorLabel::B, 0.0, {1, 0, 0}, 1.0);
    const auto alpha = CoherentAmplitude::packet(packet({1, 0, 0}, 0.5));
    auto kf = kernel_functionals(a, b, alpha, 3, cfg);
    CHECK(kf.I_A == 0.0);
    CHECK(kf.I_B == 0.0);
    CHECK(kf.f_A == 1.0);
    CHECK(kf.f_B == 1.0);
    CHECK(kf.theta == 0.0);
    CHECK(kf.omega == 0.0);
    CHECK(kf.C_A == 0.0);
    CHECK(kf.C_B == 0.0);

    a.coupling = b.coupling = 1.5;
    b.position = a.position;
    b.switch_time = a.switch_time;
    kf = kernel_functionals(a, b, alpha, 3, cfg);
    CHECK(kf.coincident_times);
    CHECK(std::abs(kf.theta) < 1e-16);
    CHECK_THAT(kf.omega, WithinRel(-kf.I_A, 1e-12));
    CHECK_THAT(std::exp(-kf.omega) * kf.f_A * kf.f_B, WithinRel(1.0, 1e-12));

    const auto single = kernel_functionals(a, std::nullopt, alpha, 3, cfg);
    CHECK_FALSE(single.pair);
    CHECK(single.I_B == 0.0);
    CHECK(single.f_A == std::exp(-0.5 * single.I_A));
}

TEST_CASE("failing functionals are labelled") {
    QuadratureConfig cfg;
    DetectorParams p;
    p.coupling = 1.0;
    try {
        kernel_functionals(p, std::nullopt, CoherentAmplitude::vacuum(), 3, cfg);
        FAIL("expected DivergenceDetected");
    } catch (const DivergenceDetected& e) {
        CHECK(std::string(e.what()).rfind("I_A", 0) == 0);
    }
}

TEST_CASE("invalid inputs are rejected") {
    auto d = gaussian(DetectorLabel::A, 1.0, {0, 0, 0}, 0.0);
    d.switch_weight = 0.0;
    CHECK_THROWS_AS(d.validate(3), InvalidArgument);
    d.switch_weight = 1.0;
    CHECK_THROWS_AS(d.validate(2), InvalidArgument);
    d.smearing = SmearingProfile::gaussian(-1.0);
    CHECK_THROWS_AS(d.validate(3), InvalidArgument);
    CHECK_THROWS_AS(fourier_smearing(SmearingProfile::pointlike(), 4, 1.0), UnsupportedDimension);
    CoherentAmplitude bad = CoherentAmplitude::packet(packet({1, 0}, 0.5));
    CHECK_THROWS_AS(bad.validate(3), InvalidArgument);
    bad = CoherentAmplitude::packet(packet({1, 0, 0}, 0.0));
    CHECK_THROWS_AS(bad.validate(3), InvalidArgument);
}

namespace {

struct Draw {
    PairScenario s;
    KernelFunctionals kf;
};

// Seeded random pair scenarios shared by the property tests below.
const std::vector<Draw>& draws() {
    static const std::vector<Draw> out = [] {
        std::mt19937_64 rng(7);
        std::vector<Draw> v;
        for (int i = 0; i < 12; ++i) {
            auto s = random_pair_scenario(rng, 5.0);
            auto kf = kernel_functionals(s.a, s.b, s.alpha, s.n, s.cfg);
            v.push_back({std::move(s), kf});
        }
        return v;
    }();
    return out;
}

}  // namespace

TEST_CASE("alpha-locality: only C depends on the amplitude") {
    std::mt19937_64 rng(11);
    for (const auto& [s, kf] : draws()) {
        CAPTURE(s.n);
        const auto other = kernel_functionals(s.a, s.b, random_amplitude(rng, s.n), s.n, s.cfg);
        const auto vac = kernel_functionals(s.a, s.b, CoherentAmplitude::vacuum(), s.n, s.cfg);
        for (const auto* k : {&other, &vac}) {
            CHECK(k->I_A == kf.I_A);
            CHECK(k->I_B == kf.I_B);
            CHECK(k->theta == kf.theta);
            CHECK(k->omega == kf.omega);
            CHECK(k->f_A == kf.f_A);
            CHECK(k->f_B == kf.f_B);
        }
        CHECK(vac.C_A == 0.0);
        CHECK(vac.C_B == 0.0);
    }
}

TEST_CASE("Cauchy-Schwarz and exact vacuum overlaps") {
    for (const auto& [s, kf] : draws()) {
        CHECK(std::abs(kf.omega) <= std::sqrt(kf.I_A * kf.I_B) * (1 + 1e-12));
        CHECK(kf.f_A == vacuum_overlap(kf.I_A));
        CHECK(kf.f_B == vacuum_overlap(kf.I_B));
    }
}

TEST_CASE("exchanging the detectors flips theta only") {
    for (const auto& [s, kf] : draws()) {
        CAPTURE(s.n);
        DetectorParams a2 = s.b, b2 = s.a;
        a2.label = DetectorLabel::A;
        b2.label = DetectorLabel::B;
        const auto sw = kernel_functionals(a2, b2, s.alpha, s.n, s.cfg);
        const double tol = 1e-9 * (kf.I_A + kf.I_B) + 1e-14;
        CHECK_THAT(sw.theta, WithinAbs(-kf.theta, tol));
        CHECK_THAT(sw.omega, WithinAbs(kf.omega, tol));
        CHECK_THAT(sw.I_A, WithinAbs(kf.I_B, tol));
        CHECK_THAT(sw.I_B, WithinAbs(kf.I_A, tol));
        CHECK(sw.C_A == kf.C_B);
        CHECK(sw.C_B == kf.C_A);
    }
}

TEST_CASE("coupling scaling") {
    for (const auto& [s, kf] : draws()) {
        CAPTURE(s.n);
        DetectorParams a2 = s.a;
        a2.coupling *= 1.7;
        const auto sc = kernel_functionals(a2, s.b, s.alpha, s.n, s.cfg);
        const double zt = 1e-9 * std::sqrt(kf.I_A * kf.I_B) * 1.7 + 1e-14;
        CHECK_THAT(sc.I_A, WithinRel(1.7 * 1.7 * kf.I_A, 1e-9));
        CHECK_THAT(sc.I_B, WithinRel(kf.I_B, 1e-9));
        CHECK_THAT(sc.C_A, WithinAbs(1.7 * kf.C_A, 1e-9 * std::abs(kf.C_A) + 1e-13));
        CHECK_THAT(sc.omega, WithinAbs(1.7 * kf.omega, zt));
        CHECK_THAT(sc.theta, WithinAbs(1.7 * kf.theta, zt));
    }
}

TEST_CASE("translation covariance") {
    std::mt19937_64 rng(13);
    for (const auto& [s, kf] : draws()) {
        CAPTURE(s.n);
        std::vector<double> shift(s.n);
        for (auto& x : shift) x = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
        auto a2 = s.a, b2 = s.b;
        auto al = s.alpha;
        for (int i = 0; i < s.n; ++i) {
            a2.position[i] += shift[i];
            b2.position[i] += shift[i];
            for (auto& p : al.packets) {
                if (p.offset.empty()) p.offset.assign(s.n, 0.0);
                p.offset[i] += shift[i];
            }
        }
        const auto tr = kernel_functionals(a2, b2, al, s.n, s.cfg);
        const double tol = 1e-9 * (kf.I_A + kf.I_B) + 1e-14;
        CHECK_THAT(tr.I_A, WithinAbs(kf.I_A, tol));
        CHECK_THAT(tr.theta, WithinAbs(kf.theta, tol));
        CHECK_THAT(tr.omega, WithinAbs(kf.omega, tol));
        CHECK_THAT(tr.C_A, WithinAbs(kf.C_A, 1e-9 * (std::abs(kf.C_A) + 1e-4)));
        CHECK_THAT(tr.C_B, WithinAbs(kf.C_B, 1e-9 * (std::abs(kf.C_B) + 1e-4)));
    }
}

TEST_CASE("energy gaps never enter the functionals") {
    for (const auto& [s, kf] : draws()) {
        auto a2 = s.a, b2 = s.b;
        a2.gap += 3.3;
        b2.gap = 0.0;
        const auto g = kernel_functionals(a2, b2, s.alpha, s.n, s.cfg);
        CHECK(g.I_A == kf.I_A);
        CHECK(g.theta == kf.theta);
        CHECK(g.omega == kf.omega);
        CHECK(g.C_A == kf.C_A);
        CHECK(g.C_B == kf.C_B);
    }
}

TEST_CASE("halving rel_tol stays within the reported error") {
    for (const auto& [s, kf] : draws()) {
        CAPTURE(s.n);
        QuadratureConfig c1 = s.cfg, c2 = s.cfg;
        c1.rel_tol = 1e-7;
        c2.rel_tol = 5e-8;
        const auto k1 = kernel_functionals(s.a, s.b, s.alpha, s.n, c1);
        const auto k2 = kernel_functionals(s.a, s.b, s.alpha, s.n, c2);
        CHECK(std::abs(k2.I_A - k1.I_A) <= k1.error.I_A);
        CHECK(std::abs(k2.I_B - k1.I_B) <= k1.error.I_B);
        CHECK(std::abs(k2.omega - k1.omega) <= k1.error.Z);
        CHECK(std::abs(k2.theta - k1.theta) <= 0.5 * k1.error.Z);
        CHECK(std::abs(k2.C_A - k1.C_A) <= k1.error.C_A);
        CHECK(std::abs(k2.C_B - k1.C_B) <= k1.error.C_B);
    }
}

TEST_CASE("radial results agree with dense fixed-grid references") {
    // k = u^2 maps the half-line integrands to smooth ones; 2e5 trapezoid points on u in [0, 4].
    QuadratureConfig cfg;
    auto dense_u = [](auto f) { return dense::trapezoid(f, 0.0, 4.0, 200000); };
    const auto a = gaussian(DetectorLabel::A, 1.0, {0, 0, 0}, 0.0, 0.9);
    const auto b = gaussian(DetectorLabel::B, 1.0, {1.5, 0, 0}, 0.8, 1.2);
    const double na = std::pow(2 * pi, -1.5);
    const double I_ref = dense_u([&](double u) {
        const double k = u * u;
        return 2.0 * 4 * pi * k * na * na * std::exp(-k * k * 0.81) * 2 * u;
    });
    CHECK_THAT(self_overlap(a, 3, cfg).value, WithinRel(I_ref, 10 * cfg.rel_tol));
    const cplx Z_ref = dense_u([&](double u) {
        const double k = u * u;
        const double sinc = k == 0 ? 1.0 : std::sin(1.5 * k) / (1.5 * k);
        return cplx(2.0 * 4 * pi * k * na * na * std::exp(-0.5 * k * k * (0.81 + 1.44)) * sinc * 2 * u) *
               std::polar(1.0, 0.8 * k);
    });
    CHECK(std::abs(cross_overlap(a, b, 3, cfg).value - Z_ref) < 10 * cfg.rel_tol * std::abs(Z_ref));
}
