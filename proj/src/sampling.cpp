#include "udw/sampling.hpp"

#include <cmath>
#include <numbers>

namespace udw {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double log_uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::exp(uniform(rng, std::log(lo), std::log(hi)));
}

std::vector<double> random_vector(std::mt19937_64& rng, int n, double half_width) {
    std::vector<double> v(n);
    for (auto& x : v) x = uniform(rng, -half_width, half_width);
    return v;
}

}  // namespace

KernelFunctionals random_functionals(std::mt19937_64& rng, double max_I) {
    constexpr int modes = 4;
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<cplx> ba(modes), bb(modes), al(modes);
    for (int j = 0; j < modes; ++j) {
        ba[j] = {g(rng), g(rng)};
        bb[j] = {g(rng), g(rng)};
        al[j] = {3.0 * g(rng), 3.0 * g(rng)};
    }
    // Occasionally make B nearly parallel to A to probe the Cauchy-Schwarz edge.
    if (uniform(rng, 0.0, 1.0) < 0.2) {
        const cplx c = std::polar(1.0, uniform(rng, 0.0, 2.0 * std::numbers::pi));
        for (int j = 0; j < modes; ++j) bb[j] = c * ba[j] + 1e-3 * bb[j];
    }
    auto rescale = [&](std::vector<cplx>& v, double target) {
        double s = 0.0;
        for (auto z : v) s += std::norm(z);
        const double f = std::sqrt(target / s);
        for (auto& z : v) z *= f;
    };
    rescale(ba, log_uniform(rng, 1e-4, max_I));
    rescale(bb, log_uniform(rng, 1e-4, max_I));
    double IA = 0, IB = 0;
    cplx Z{}, ca{}, cb{};
    for (int j = 0; j < modes; ++j) {
        IA += std::norm(ba[j]);
        IB += std::norm(bb[j]);
        Z += std::conj(ba[j]) * bb[j];
        ca += ba[j] * std::conj(al[j]);
        cb += bb[j] * std::conj(al[j]);
    }
    return KernelFunctionals::pair_from(IA, IB, Z, ca.imag(), cb.imag());
}

CoherentAmplitude random_amplitude(std::mt19937_64& rng, int n) {
    const int count = 1 + static_cast<int>(std::uniform_int_distribution<int>(0, 2)(rng));
    std::vector<GaussianPacket> ps;
    for (int i = 0; i < count; ++i) {
        GaussianPacket p;
        p.peak = uniform(rng, 0.1, 3.0);
        p.center = random_vector(rng, n, 2.0);
        p.spread = uniform(rng, 0.2, 1.5);
        p.phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        p.offset = random_vector(rng, n, 3.0);
        ps.push_back(std::move(p));
    }
    if (count == 1) return CoherentAmplitude::packet(std::move(ps.front()));
    return CoherentAmplitude::superposition(std::move(ps));
}

PairScenario random_pair_scenario(std::mt19937_64& rng, double max_I) {
    PairScenario s;
    const double pick = uniform(rng, 0.0, 1.0);
    s.n = pick < 0.5 ? 3 : (pick < 0.8 ? 2 : 1);
    const bool pointlike = uniform(rng, 0.0, 1.0) < 0.1;
    if (pointlike) s.cfg.uv_cutoff = uniform(rng, 2.0, 10.0);
    if (s.n == 1) s.cfg.ir_cutoff = uniform(rng, 0.01, 0.1);

    auto make = [&](DetectorLabel label) {
        DetectorParams d;
        d.label = label;
        d.switch_weight = uniform(rng, 0.5, 2.0);
        d.gap = uniform(rng, 0.0, 5.0);
        d.position = random_vector(rng, s.n, 4.0);
        d.smearing = pointlike ? SmearingProfile::pointlike() : SmearingProfile::gaussian(uniform(rng, 0.3, 2.0));
        d.coupling = 1.0;
        const double unit = self_overlap(d, s.n, s.cfg).value;
        d.coupling = std::sqrt(log_uniform(rng, 1e-4, max_I) / unit);
        return d;
    };
    s.a = make(DetectorLabel::A);
    s.b = make(DetectorLabel::B);
    s.a.switch_time = 0.0;
    s.b.switch_time = uniform(rng, -3.0, 3.0);
    s.alpha = random_amplitude(rng, s.n);
    return s;
}

}  // namespace udw
