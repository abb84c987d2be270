#include "udw/perturbative.hpp"

#include <cmath>

#include "udw/errors.hpp"
#include "udw/state_assembly.hpp"

namespace udw {

namespace {

std::vector<double> zeros(int n) { return std::vector<double>(n, 0.0); }

double envelope(const DetectorParams& a, const DetectorParams* b) {
    double s = a.smearing.envelope_scale();
    if (b) {
        const double sb = b->smearing.envelope_scale();
        s = (s > 0 && sb > 0) ? std::min(s, sb) : std::max(s, sb);
    }
    return s;
}

double tophat_radius(const SmearingProfile& p) { return p.family == SmearingFamily::tophat ? p.width : 0.0; }

// (lambda^2 eta^2 / 2) int d^n k F^2 / |k|
Estimate diagonal_term(const DetectorParams& d, int n, const QuadratureConfig& cfg) {
    if (d.coupling == 0.0) return {};
    const double le = d.coupling * d.switch_weight;
    const double pref = 0.5 * le * le;
    const auto x0 = zeros(n);
    auto ker = angular_reduce(n, x0, [pref, n, sm = d.smearing](double k) {
        const double F = fourier_smearing(sm, n, k);
        return cplx(pref * F * F / k);
    });
    ker.scale = envelope(d, nullptr);
    ker.oscillation = 2.0 * tophat_radius(d.smearing);
    const auto r = integrate_radial(ker, cfg);
    return {r.value.real(), r.error};
}

// pref * int d^n k F_A F_B e^{i k tau} e^{-i k.(x_A - x_B)} / |k|
ComplexEstimate cross_term(const DetectorParams& a, const DetectorParams& b, int n, double tau, double pref,
                           const QuadratureConfig& cfg) {
    std::vector<double> dx(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double xa = a.position.empty() ? 0.0 : a.position[i];
        const double xb = b.position.empty() ? 0.0 : b.position[i];
        dx[i] = xa - xb;
    }
    auto ker = angular_reduce(n, dx, [=, sa = a.smearing, sb = b.smearing](double k) {
        return pref * fourier_smearing(sa, n, k) * fourier_smearing(sb, n, k) / k * std::polar(1.0, k * tau);
    });
    ker.scale = envelope(a, &b);
    ker.oscillation += std::abs(tau) + 2.0 * std::max(tophat_radius(a.smearing), tophat_radius(b.smearing));
    const auto r = integrate_radial(ker, cfg);
    return {r.value, r.error};
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

PerturbativeCoefficients pert_coeffs(const DetectorParams& a, const std::optional<DetectorParams>& b,
                                     const CoherentAmplitude& alpha, int n, const QuadratureConfig& cfg) {
    a.validate(n);
    alpha.validate(n);
    cfg.validate();
    PerturbativeCoefficients c;
    c.phase_A = a.gap * a.switch_time;
    const auto laa = diagonal_term(a, n, cfg);
    c.L_AA = laa.value;
    c.error += laa.error;
    const auto ca = coherent_shift(a, alpha, n, cfg);
    c.Lbar_A = cplx(0.0, ca.value) * std::polar(1.0, c.phase_A);
    c.error += ca.error;
    if (!b) return c;

    b->validate(n);
    c.pair = true;
    c.phase_B = b->gap * b->switch_time;
    c.coincident_times = a.switch_time == b->switch_time;
    const auto lbb = diagonal_term(*b, n, cfg);
    c.L_BB = lbb.value;
    c.error += lbb.error;
    const auto cb = coherent_shift(*b, alpha, n, cfg);
    c.Lbar_B = cplx(0.0, cb.value) * std::polar(1.0, c.phase_B);
    c.error += cb.error;

    if (a.coupling != 0.0 && b->coupling != 0.0) {
        const double pref = 0.5 * a.coupling * a.switch_weight * b->coupling * b->switch_weight;
        const double tau = a.switch_time - b->switch_time;
        const auto lab = cross_term(a, *b, n, tau, pref, cfg);
        c.L_AB = lab.value * std::polar(1.0, c.phase_A - c.phase_B);
        c.error += lab.error;
        // The nested time integral picks the later detector on the left, which
        // for delta switching leaves e^{-i k |t_A - t_B|}.
        const auto m = tau <= 0.0 ? lab : cross_term(a, *b, n, -tau, pref, cfg);
        c.M = -m.value * std::polar(1.0, c.phase_A + c.phase_B);
        c.error += m.error;
    }
    return c;
}

cplx vacuum_correlator(const PerturbativeCoefficients& c) {
    return c.M * std::polar(1.0, -(c.phase_A + c.phase_B));
}

Eigen::Matrix2cd rho_single_pert(const PerturbativeCoefficients& c) {
    const double lbb = std::norm(c.Lbar_A);
    const cplx e = std::polar(1.0, c.phase_A);
    Eigen::Matrix2cd r;
    r(0, 0) = 1.0 - c.L_AA - lbb;
    r(0, 1) = std::conj(c.Lbar_A) * e;
    r(1, 0) = c.Lbar_A * std::conj(e);
    r(1, 1) = c.L_AA + lbb;
    return r;
}

Eigen::Matrix4cd rho_pair_pert(const PerturbativeCoefficients& c) {
    if (!c.pair) throw InvalidArgument("rho_pair_pert needs pair coefficients");
    const cplx ea = std::polar(1.0, c.phase_A), eb = std::polar(1.0, c.phase_B);
    const cplx lbar_ab = c.Lbar_A * std::conj(c.Lbar_B);
    const cplx mbar = c.Lbar_A * c.Lbar_B;
    const double laa = c.L_AA + std::norm(c.Lbar_A);
    const double lbb = c.L_BB + std::norm(c.Lbar_B);
    Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
    r(0, 0) = 1.0 - laa - lbb;
    r(1, 1) = lbb;
    r(2, 2) = laa;
    r(0, 1) = std::conj(c.Lbar_B) * eb;
    r(0, 2) = std::conj(c.Lbar_A) * ea;
    r(1, 0) = std::conj(r(0, 1));
    r(2, 0) = std::conj(r(0, 2));
    r(0, 3) = std::conj(c.M + mbar) * ea * eb;
    r(3, 0) = std::conj(r(0, 3));
    r(2, 1) = (c.L_AB + lbar_ab) * std::conj(ea) * eb;
    r(1, 2) = std::conj(r(2, 1));
    return r;
}

ScalingReport residual_scaling_check(const DetectorParams& a, const std::optional<DetectorParams>& b,
                                     const CoherentAmplitude& alpha, int n, const QuadratureConfig& cfg,
                                     const std::vector<double>& lambdas) {
    if (lambdas.size() < 3) throw InvalidArgument("residual scaling needs at least three coupling values");
    const double ratio = lambdas[1] / lambdas[0];
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (!(lambdas[i] > 0.0)) throw InvalidArgument("coupling values must be positive");
        if (i > 0 && std::abs(lambdas[i] / lambdas[i - 1] - ratio) > 1e-9 * std::abs(ratio))
            throw InvalidArgument("coupling values must form a geometric progression");
    }
    ScalingReport rep;
    rep.lambdas = lambdas;
    rep.informational = b && b->switch_time == a.switch_time;
    for (double lam : lambdas) {
        DetectorParams da = a;
        da.coupling = lam;
        std::optional<DetectorParams> db = b;
        if (db) db->coupling = lam;
        const auto kf = kernel_functionals(da, db, alpha, n, cfg);
        const auto pc = pert_coeffs(da, db, alpha, n, cfg);
        double res;
        double noise = 1e-15 + pc.error + kf.error.I_A + kf.error.I_B + kf.error.Z + kf.error.C_A + kf.error.C_B;
        if (db)
            res = max_abs(rho_pair(kf) - rho_pair_pert(pc));
        else
            res = max_abs(rho_single(kf) - rho_single_pert(pc));
        if (res < 100.0 * noise) rep.insufficient_decay = true;
        rep.residuals.push_back(res);
    }
    // Least squares on (log lambda, log residual).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(lambdas.size());
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        const double x = std::log(lambdas[i]);
        const double y = std::log(std::max(rep.residuals[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    rep.intercept = (sy - rep.slope * sx) / m;
    rep.passed = rep.slope >= 2.7;
    return rep;
}

}  // namespace udw
