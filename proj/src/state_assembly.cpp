#include "udw/state_assembly.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "udw/errors.hpp"

namespace udw {

namespace {

using lcplx = std::complex<long double>;

lcplx phase(long double x) { return {std::cos(x), std::sin(x)}; }

// f_A f_B e^{s omega}, evaluated from the exponents so that flushed f values
// cannot turn an O(1) product into 0 * inf.
long double ff_exp(const KernelFunctionals& kf, long double s) {
    return std::exp(s * static_cast<long double>(kf.omega) -
                    0.5L * (static_cast<long double>(kf.I_A) + static_cast<long double>(kf.I_B)));
}

cplx f2_ordered(int j, int k, int l, int m, const KernelFunctionals& kf) {
    const long double fA = kf.f_A, fB = kf.f_B;
    const long double th = kf.theta;
    const lcplx t2 = phase(2 * th), t2c = phase(-2 * th);
    const lcplx a2 = phase(2.0L * kf.C_A), a2c = phase(-2.0L * kf.C_A);
    const lcplx b2 = phase(2.0L * kf.C_B), b2c = phase(-2.0L * kf.C_B);
    const lcplx fp = ff_exp(kf, +1) * t2c;
    const lcplx fm = ff_exp(kf, -1) * t2;
    const long double J = j, K = k, L = l, M = m;

    lcplx s = 1.0L + J * L + K * M + J * K * L * M;
    s += L * fB * (K * M * t2c + t2) * b2c;
    s += M * fA * (1.0L + J * L) * a2c;
    s += J * fB * (t2c + K * M * t2) * b2;
    s += K * fA * (1.0L + J * L) * a2;
    s += J * K * fp * t2 * a2 * b2;
    s += M * L * std::conj(fp) * t2c * a2c * b2c;
    s += J * M * fm * t2c * a2c * b2;
    s += K * L * std::conj(fm) * t2 * a2 * b2c;
    s /= 16.0L;
    return {static_cast<double>(s.real()), static_cast<double>(s.imag())};
}

// Swap of the two tensor factors: index 2a + b -> 2b + a.
Eigen::Matrix4cd factor_swap() {
    Eigen::Matrix4cd P = Eigen::Matrix4cd::Zero();
    P(0, 0) = P(3, 3) = 1.0;
    P(1, 2) = P(2, 1) = 1.0;
    return P;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

int pair_index(int sign_B, int sign_A) { return 2 * (sign_A < 0 ? 1 : 0) + (sign_B < 0 ? 1 : 0); }

DensityCheck check_density(const Eigen::MatrixXcd& m) {
    DensityCheck c;
    c.hermiticity = max_abs(m - m.adjoint());
    c.trace_error = std::abs(m.trace() - cplx(1.0, 0.0));
    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    c.min_eigenvalue = es.eigenvalues().minCoeff();
    c.purity = (m * m).trace().real();
    return c;
}

KernelFunctionals swapped(const KernelFunctionals& kf) {
    KernelFunctionals s = kf;
    std::swap(s.I_A, s.I_B);
    std::swap(s.f_A, s.f_B);
    std::swap(s.C_A, s.C_B);
    std::swap(s.error.I_A, s.error.I_B);
    std::swap(s.error.C_A, s.error.C_B);
    s.theta = -kf.theta;
    s.b_first = !kf.b_first;
    return s;
}

DensityMatrix2 rho_single(const KernelFunctionals& kf) {
    const double f = kf.f_A;
    const double c = std::cos(2.0 * kf.C_A), s = std::sin(2.0 * kf.C_A);
    DensityMatrix2 r;
    r(0, 0) = 0.5 * (1.0 + f * c);
    r(0, 1) = cplx(0.0, -0.5 * f * s);
    r(1, 0) = cplx(0.0, 0.5 * f * s);
    r(1, 1) = 0.5 * (1.0 - f * c);
    return r;
}

cplx f2_element(int j, int k, int l, int m, const KernelFunctionals& kf) {
    if (!kf.pair) throw InvalidArgument("f2_element needs pair functionals");
    for (int s : {j, k, l, m})
        if (s != 1 && s != -1) throw InvalidArgument("f2 indices are signs +1 or -1");
    if (!kf.b_first) return f2_ordered(j, k, l, m, kf);
    // Relabelled pair: B plays the first detector, so the sign slots trade places.
    return f2_ordered(k, j, m, l, swapped(kf));
}

DensityMatrix4 rho_pair(const KernelFunctionals& kf) {
    if (!kf.pair) throw InvalidArgument("rho_pair needs pair functionals");
    DensityMatrix4 r;
    for (int j : {1, -1})
        for (int k : {1, -1})
            for (int l : {1, -1})
                for (int m : {1, -1}) r(pair_index(l, m), pair_index(j, k)) = f2_element(j, k, l, m, kf);
    const cplx tr = r.trace();
    const double dev = std::abs(tr - cplx(1.0, 0.0));
    if (!(dev <= 1e-9)) {
        std::ostringstream msg;
        msg << "pair density matrix trace deviates from 1 by " << dev;
        throw TraceViolation(msg.str(), dev);
    }
    return r;
}

Eigen::Matrix4cd partial_transpose_A(const Eigen::Matrix4cd& rho) {
    Eigen::Matrix4cd out;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int ap = 0; ap < 2; ++ap)
                for (int bp = 0; bp < 2; ++bp) out(2 * a + b, 2 * ap + bp) = rho(2 * ap + b, 2 * a + bp);
    return out;
}

Eigen::Matrix4cd q_matrix(double f_A, double f_B, double theta, double omega) {
    const cplx t = std::polar(1.0, 2.0 * theta);
    const bool zero = f_A == 0.0 || f_B == 0.0;
    const double lf = zero ? 0.0 : std::log(f_A) + std::log(f_B);
    const double fp = zero ? 0.0 : std::exp(lf + omega), fm = zero ? 0.0 : std::exp(lf - omega);
    Eigen::Matrix4cd q;
    q << 1.0, f_B / t, f_A, fp,
         t * f_B, 1.0, fm, f_A,
         f_A, fm, 1.0, t * f_B,
         fp, f_A, f_B / t, 1.0;
    return 0.25 * q;
}

Eigen::Matrix4cd w_matrix(double C_A, double C_B) {
    const cplx ea = std::polar(1.0, C_A), eb = std::polar(1.0, C_B);
    const cplx r0 = 1.0 / (ea * eb), r1 = eb / ea, r2 = ea / eb, r3 = ea * eb;
    Eigen::Matrix4cd w;
    w << r0, r0, r0, r0,
         r1, -r1, r1, -r1,
         r2, r2, -r2, -r2,
         r3, -r3, -r3, r3;
    return 0.5 * w;
}

Eigen::Matrix4cd v_matrix(double C_A, double C_B) {
    const cplx ea = std::polar(1.0, C_A), eb = std::polar(1.0, C_B);
    const cplx r0 = ea / eb, r1 = ea * eb, r2 = 1.0 / (ea * eb), r3 = eb / ea;
    Eigen::Matrix4cd v;
    v << r0, r0, r0, r0,
         r1, -r1, r1, -r1,
         r2, r2, -r2, -r2,
         r3, -r3, -r3, r3;
    return 0.5 * v;
}

FactorizationBundle build_factorization(const KernelFunctionals& kf) {
    if (!kf.pair) throw InvalidArgument("build_factorization needs pair functionals");
    const KernelFunctionals local = kf.b_first ? swapped(kf) : kf;
    FactorizationBundle fb;
    fb.W = w_matrix(local.C_A, local.C_B);
    fb.V = v_matrix(local.C_A, local.C_B);
    // The omega-form products are formed from exponents, matching rho_pair.
    fb.Q = q_matrix(local.f_A, local.f_B, local.theta, local.omega);
    fb.Q_pt = q_matrix(local.f_A, local.f_B, local.theta, -local.omega);
    {
        const double ffp = std::exp(local.omega - 0.5 * (local.I_A + local.I_B));
        const double ffm = std::exp(-local.omega - 0.5 * (local.I_A + local.I_B));
        fb.Q(0, 3) = fb.Q(3, 0) = fb.Q_pt(1, 2) = fb.Q_pt(2, 1) = 0.25 * ffp;
        fb.Q(1, 2) = fb.Q(2, 1) = fb.Q_pt(0, 3) = fb.Q_pt(3, 0) = 0.25 * ffm;
    }
    if (kf.b_first) {
        const Eigen::Matrix4cd P = factor_swap();
        fb.W = fb.W * P;
        fb.V = fb.V.conjugate() * P;
        fb.Q_pt = fb.Q_pt.conjugate().eval();
    }
    const DensityMatrix4 rho = rho_pair(kf);
    fb.residual = max_abs(rho - fb.W.adjoint() * fb.Q * fb.W);
    fb.residual_pt = max_abs(partial_transpose_A(rho) - fb.V.adjoint() * fb.Q_pt * fb.V);
    const double worst = std::max(fb.residual, fb.residual_pt);
    if (!(worst <= 1e-9)) {
        std::ostringstream msg;
        msg << "factorization reconstruction residual " << worst << " exceeds 1e-9";
        throw FactorizationMismatch(msg.str(), worst);
    }
    return fb;
}

}  // namespace udw
