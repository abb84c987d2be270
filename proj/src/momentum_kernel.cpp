#include "udw/momentum_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "udw/errors.hpp"

namespace udw {

namespace {

constexpr double pi = std::numbers::pi;

void check_dimension(int n) {
    if (n < 1 || n > 3) throw UnsupportedDimension(n);
}

void check_vector(const std::vector<double>& v, int n, const char* what, bool allow_empty) {
    if (v.empty() && allow_empty) return;
    if (static_cast<int>(v.size()) != n)
        throw InvalidArgument(std::string(what) + " must have " + std::to_string(n) + " components");
    for (double x : v)
        if (!std::isfinite(x)) throw InvalidArgument(std::string(what) + " must be finite");
}

double norm_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

std::vector<double> coords(const std::vector<double>& v, int n) {
    return v.empty() ? std::vector<double>(n, 0.0) : v;
}

// Characteristic function of the uniform ball, normalised to 1 at u = 0.
double ball_transform(int n, double u) {
    switch (n) {
        case 1:
            return u < 1e-4 ? 1.0 - u * u / 6.0 : std::sin(u) / u;
        case 2:
            return u < 1e-8 ? 1.0 : 2.0 * std::cyl_bessel_j(1.0, u) / u;
        default: {
            if (u < 0.1) {
                const double u2 = u * u;
                return 1.0 - u2 / 10.0 + u2 * u2 / 280.0 - u2 * u2 * u2 / 15120.0 +
                       u2 * u2 * u2 * u2 / 1330560.0;
            }
            return 3.0 * (std::sin(u) - u * std::cos(u)) / (u * u * u);
        }
    }
}

double smearing_oscillation(const SmearingProfile& p) {
    return p.family == SmearingFamily::tophat ? p.width : 0.0;
}

double pair_scale(const SmearingProfile& a, const SmearingProfile& b) {
    const double sa = a.envelope_scale(), sb = b.envelope_scale();
    if (sa > 0 && sb > 0) return std::min(sa, sb);
    return std::max(sa, sb);
}

// Re-throws quadrature failures with the name of the functional prepended.
template <class F>
auto labelled(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const DivergenceDetected& e) {
        throw DivergenceDetected(std::string(name) + ": " + e.what(), e.region);
    } catch (const NonConvergence& e) {
        throw NonConvergence(std::string(name) + ": " + e.what(), e.achieved_error);
    }
}

}  // namespace

void SmearingProfile::validate() const {
    if (family == SmearingFamily::pointlike) return;
    if (!(width > 0.0) || !std::isfinite(width))
        throw InvalidArgument("smearing width must be positive and finite");
}

double SmearingProfile::envelope_scale() const {
    return family == SmearingFamily::pointlike ? 0.0 : 1.0 / width;
}

void DetectorParams::validate(int n) const {
    check_dimension(n);
    if (!std::isfinite(coupling)) throw InvalidArgument("coupling must be finite");
    if (!(switch_weight > 0.0) || !std::isfinite(switch_weight))
        throw InvalidArgument("switch_weight must be positive");
    if (!std::isfinite(switch_time) || !std::isfinite(gap))
        throw InvalidArgument("switch_time and gap must be finite");
    check_vector(position, n, "detector position", true);
    smearing.validate();
}

void GaussianPacket::validate(int n) const {
    check_dimension(n);
    if (!std::isfinite(peak) || !std::isfinite(phase)) throw InvalidArgument("packet peak and phase must be finite");
    if (!(spread > 0.0) || !std::isfinite(spread)) throw InvalidArgument("packet spread must be positive");
    check_vector(center, n, "packet center", true);
    check_vector(offset, n, "packet offset", true);
}

cplx GaussianPacket::evaluate(std::span<const double> k) const {
    double d2 = 0.0, kx = 0.0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const double c = center.empty() ? 0.0 : center[i];
        d2 += (k[i] - c) * (k[i] - c);
        if (!offset.empty()) kx += k[i] * offset[i];
    }
    return peak * std::exp(-d2 / (2.0 * spread * spread)) * std::polar(1.0, phase - kx);
}

void CoherentAmplitude::validate(int n) const {
    if (family == Family::vacuum) {
        if (!packets.empty()) throw InvalidArgument("vacuum amplitude carries no packets");
        return;
    }
    if (packets.empty()) throw InvalidArgument("coherent amplitude needs at least one packet");
    if (family == Family::gaussian_packet && packets.size() != 1)
        throw InvalidArgument("gaussian_packet family holds exactly one packet");
    for (const auto& p : packets) p.validate(n);
}

cplx CoherentAmplitude::evaluate(std::span<const double> k) const {
    cplx s{};
    if (is_vacuum()) return s;
    for (const auto& p : packets) s += p.evaluate(k);
    return s;
}

double vacuum_overlap(double I, bool* flushed) {
    double f = std::exp(-0.5 * I);
    if (f < 1e-300) {
        f = 0.0;
        if (flushed) *flushed = true;
    }
    return f;
}

KernelFunctionals KernelFunctionals::single(double I_A, double C_A) {
    KernelFunctionals kf;
    kf.I_A = I_A;
    kf.f_A = vacuum_overlap(I_A, &kf.f_flushed);
    kf.C_A = C_A;
    return kf;
}

KernelFunctionals KernelFunctionals::pair_from(double I_A, double I_B, cplx Z, double C_A, double C_B,
                                               bool b_first) {
    KernelFunctionals kf;
    kf.pair = true;
    kf.I_A = I_A;
    kf.I_B = I_B;
    kf.f_A = vacuum_overlap(I_A, &kf.f_flushed);
    kf.f_B = vacuum_overlap(I_B, &kf.f_flushed);
    kf.theta = -0.5 * Z.imag();
    kf.omega = -Z.real();
    kf.C_A = C_A;
    kf.C_B = C_B;
    kf.b_first = b_first;
    return kf;
}

double fourier_smearing(const SmearingProfile& profile, int n, double k) {
    check_dimension(n);
    if (!(k >= 0.0)) throw InvalidArgument("wavenumber must be non-negative");
    const double norm = std::pow(2.0 * pi, -0.5 * n);
    switch (profile.family) {
        case SmearingFamily::pointlike:
            return norm;
        case SmearingFamily::gaussian: {
            const double s = profile.width * k;
            return norm * std::exp(-0.5 * s * s);
        }
        case SmearingFamily::tophat:
            return norm * ball_transform(n, k * profile.width);
    }
    return norm;
}

cplx beta(const DetectorParams& det, std::span<const double> k_vec) {
    const int n = static_cast<int>(k_vec.size());
    const double k = norm_of(k_vec);
    if (!(k > 0.0)) throw InvalidArgument("beta requires |k| > 0");
    double kx = 0.0;
    if (!det.position.empty())
        for (int i = 0; i < n; ++i) kx += k_vec[i] * det.position[i];
    const double amp = 2.0 * det.coupling * det.switch_weight / std::sqrt(2.0 * k) *
                       fourier_smearing(det.smearing, n, k);
    return cplx(0.0, -1.0) * amp * std::polar(1.0, k * det.switch_time - kx);
}

namespace {

// I = 2 lambda^2 eta^2 S_n int k^{n-2} F^2 dk; the k^{n-1} measure and the
// 1/k of |beta|^2 are combined into one power.
RadialKernelSet self_kernel(const DetectorParams& det, int n) {
    const double pref = 2.0 * det.coupling * det.coupling * det.switch_weight * det.switch_weight * solid_angle(n);
    RadialKernelSet ks;
    ks.components = 1;
    ks.scale = det.smearing.envelope_scale();
    ks.oscillation = 2.0 * smearing_oscillation(det.smearing);
    ks.evaluate = [pref, n, sm = det.smearing](double k, std::span<cplx> out) {
        const double F = fourier_smearing(sm, n, k);
        out[0] = pref * std::pow(k, n - 2) * F * F;
    };
    return ks;
}

struct PairGeometry {
    double dt = 0.0;  // t_B - t_A
    double r = 0.0;   // |x_B - x_A|
};

PairGeometry geometry(const DetectorParams& a, const DetectorParams& b, int n) {
    const auto xa = coords(a.position, n), xb = coords(b.position, n);
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = xb[i] - xa[i];
    return {b.switch_time - a.switch_time, norm_of(d)};
}

// Components: I_A, I_B, Z on one partition.
RadialKernelSet joint_kernel(const DetectorParams& a, const DetectorParams& b, int n) {
    const double S = solid_angle(n);
    const double la = a.coupling * a.switch_weight, lb = b.coupling * b.switch_weight;
    const double pa = 2.0 * la * la * S, pb = 2.0 * lb * lb * S, pz = 2.0 * la * lb;
    const auto g = geometry(a, b, n);
    RadialKernelSet ks;
    ks.components = 3;
    ks.scale = pair_scale(a.smearing, b.smearing);
    ks.oscillation = std::abs(g.dt) + g.r +
                     2.0 * std::max(smearing_oscillation(a.smearing), smearing_oscillation(b.smearing));
    ks.evaluate = [=, sa = a.smearing, sb = b.smearing](double k, std::span<cplx> out) {
        const double Fa = fourier_smearing(sa, n, k), Fb = fourier_smearing(sb, n, k);
        const double kp = std::pow(k, n - 2);
        out[0] = pa * kp * Fa * Fa;
        out[1] = pb * kp * Fb * Fb;
        out[2] = pz * kp * Fa * Fb * plane_wave_angular(n, k * g.r) * std::polar(1.0, k * g.dt);
    };
    return ks;
}

// C = -2 lambda eta Re sum_p int dk k^{n-1} (2k)^{-1/2} F(k) e^{-ikt} a_p e^{i phi_p}
//       e^{-(k^2+k0^2)/(2 s^2)} * int dOmega exp(k s.w_p),  w_p = k0/s^2 + i(x - x0).
RadialKernelSet shift_kernel(const DetectorParams& det, const CoherentAmplitude& alpha, int n) {
    struct Term {
        cplx amp;
        std::vector<cplx> w;
        double k0sq;
        double inv2s2;
    };
    const auto x = coords(det.position, n);
    std::vector<Term> terms;
    RadialKernelSet ks;
    ks.components = 1;
    double osc = 0.0;
    double scale = det.smearing.envelope_scale();
    for (const auto& p : alpha.packets) {
        const auto k0 = coords(p.center, n), x0 = coords(p.offset, n);
        Term t;
        t.amp = p.peak * std::polar(1.0, p.phase);
        t.inv2s2 = 1.0 / (2.0 * p.spread * p.spread);
        t.k0sq = 0.0;
        std::vector<double> dx(n);
        for (int i = 0; i < n; ++i) {
            t.w.emplace_back(k0[i] / (p.spread * p.spread), x[i] - x0[i]);
            t.k0sq += k0[i] * k0[i];
            dx[i] = x[i] - x0[i];
        }
        osc = std::max(osc, norm_of(dx));
        const double kc = std::sqrt(t.k0sq);
        for (double m : {-4.0, 0.0, 4.0}) {
            const double bp = kc + m * p.spread;
            if (bp > 0.0) ks.breakpoints.push_back(bp);
        }
        if (scale == 0.0) scale = kc + p.spread;
        terms.push_back(std::move(t));
    }
    std::sort(ks.breakpoints.begin(), ks.breakpoints.end());
    ks.scale = scale;
    ks.oscillation = osc + std::abs(det.switch_time) + smearing_oscillation(det.smearing);
    const double pref = -2.0 * det.coupling * det.switch_weight;
    ks.evaluate = [=, sm = det.smearing, t0 = det.switch_time](double k, std::span<cplx> out) {
        const double radial = std::pow(k, n - 1) / std::sqrt(2.0 * k) * fourier_smearing(sm, n, k);
        cplx sum{};
        for (const Term& t : terms)
            sum += t.amp * angular_exp_integral(n, k, t.w, (k * k + t.k0sq) * t.inv2s2);
        out[0] = pref * (radial * sum * std::polar(1.0, -k * t0)).real();
    };
    return ks;
}

}  // namespace

Estimate self_overlap(const DetectorParams& det, int n, const QuadratureConfig& cfg) {
    det.validate(n);
    if (det.coupling == 0.0) return {};
    const auto r = integrate_radial(self_kernel(det, n), cfg).front();
    return {r.value.real(), r.error};
}

ComplexEstimate cross_overlap(const DetectorParams& a, const DetectorParams& b, int n, const QuadratureConfig& cfg) {
    a.validate(n);
    b.validate(n);
    if (a.coupling == 0.0 || b.coupling == 0.0) return {};
    const auto r = integrate_radial(joint_kernel(a, b, n), cfg);
    return {r[2].value, r[2].error};
}

Estimate coherent_shift(const DetectorParams& det, const CoherentAmplitude& alpha, int n, const QuadratureConfig& cfg) {
    det.validate(n);
    alpha.validate(n);
    if (det.coupling == 0.0 || alpha.is_vacuum()) return {};
    const auto r = integrate_radial(shift_kernel(det, alpha, n), cfg).front();
    return {r.value.real(), r.error};
}

KernelFunctionals kernel_functionals(const DetectorParams& a, const std::optional<DetectorParams>& b,
                                     const CoherentAmplitude& alpha, int n, const QuadratureConfig& cfg) {
    a.validate(n);
    alpha.validate(n);
    cfg.validate();
    if (!b) {
        const auto I = labelled("I_A", [&] { return self_overlap(a, n, cfg); });
        const auto C = labelled("C_A", [&] { return coherent_shift(a, alpha, n, cfg); });
        auto kf = KernelFunctionals::single(I.value, C.value);
        kf.error.I_A = I.error;
        kf.error.C_A = C.error;
        return kf;
    }
    b->validate(n);
    double IA = 0.0, IB = 0.0, eA = 0.0, eB = 0.0, eZ = 0.0;
    cplx Z{};
    if (a.coupling != 0.0 && b->coupling != 0.0) {
        const auto r = labelled("I_A/I_B/Z", [&] { return integrate_radial(joint_kernel(a, *b, n), cfg); });
        IA = r[0].value.real();
        IB = r[1].value.real();
        Z = r[2].value;
        eA = r[0].error;
        eB = r[1].error;
        eZ = r[2].error;
    } else {
        const auto ia = labelled("I_A", [&] { return self_overlap(a, n, cfg); });
        const auto ib = labelled("I_B", [&] { return self_overlap(*b, n, cfg); });
        IA = ia.value;
        IB = ib.value;
        eA = ia.error;
        eB = ib.error;
    }
    const auto CA = labelled("C_A", [&] { return coherent_shift(a, alpha, n, cfg); });
    const auto CB = labelled("C_B", [&] { return coherent_shift(*b, alpha, n, cfg); });
    auto kf = KernelFunctionals::pair_from(IA, IB, Z, CA.value, CB.value, b->switch_time < a.switch_time);
    kf.coincident_times = b->switch_time == a.switch_time;
    kf.error.I_A = eA;
    kf.error.I_B = eB;
    kf.error.Z = eZ;
    kf.error.C_A = CA.error;
    kf.error.C_B = CB.error;
    return kf;
}

}  // namespace udw
