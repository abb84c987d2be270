#include "udw/spectra.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "udw/errors.hpp"
#include "udw/state_assembly.hpp"

namespace udw {

namespace {

template <std::size_t N>
std::array<double, N> descending(std::array<double, N> a) {
    std::stable_sort(a.begin(), a.end(), std::greater<>());
    return a;
}

// f_A f_B e^{s omega} without forming e^{omega} on its own.
double ff_exp(const KernelFunctionals& kf, double s) {
    return std::exp(s * kf.omega - 0.5 * (kf.I_A + kf.I_B));
}

}  // namespace

std::array<double, 2> eig_single_closed(const KernelFunctionals& kf) {
    return {0.5 * (1.0 + kf.f_A), 0.5 * (1.0 - kf.f_A)};
}

std::array<double, 4> eig_pt_closed(const KernelFunctionals& kf) {
    if (!kf.pair) throw InvalidArgument("eig_pt_closed needs pair functionals");
    const double a = kf.f_A, b = kf.f_B;
    const double ep = ff_exp(kf, 1.0), em = ff_exp(kf, -1.0);
    const double c = ep + em;        // (e^w + e^-w) f_A f_B
    const double d = ep - em;        // (e^w - e^-w) f_A f_B
    const double c2t = std::cos(2.0 * kf.theta);
    // |f_A e^{i theta} -+ f_B e^{-i theta}|^2
    const double m_minus = a * a + b * b - 2.0 * a * b * c2t;
    const double m_plus = a * a + b * b + 2.0 * a * b * c2t;
    const double sm = std::sqrt(std::max(0.0, 4.0 * m_minus + d * d));
    const double sp = std::sqrt(std::max(0.0, 4.0 * m_plus + d * d));
    return {(2.0 - c + sm) / 8.0, (2.0 - c - sm) / 8.0, (2.0 + c + sp) / 8.0, (2.0 + c - sp) / 8.0};
}

std::vector<double> eig_hermitian(const Eigen::MatrixXcd& m) {
    if (m.rows() != m.cols()) throw InvalidArgument("eig_hermitian needs a square matrix");
    const double dev = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (!(dev <= 1e-10)) {
        std::ostringstream msg;
        msg << "matrix is not Hermitian (max |M - M^dagger| = " << dev << ")";
        throw NotHermitian(msg.str(), dev);
    }
    const Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    std::vector<double> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
    std::stable_sort(out.begin(), out.end(), std::greater<>());
    return out;
}

double negativity(std::span<const double> eig_pt) {
    double s = 0.0;
    for (double e : eig_pt) s += std::max(0.0, -e);
    return s;
}

double entropy(std::span<const double> eigs) {
    double s = 0.0;
    for (double e : eigs)
        if (e > 0.0) s -= e * std::log(e);
    return s;
}

std::pair<double, double> gamma_diagnostics(const KernelFunctionals& kf) {
    if (!kf.pair) throw InvalidArgument("gamma_diagnostics needs pair functionals");
    // 1 + a^2 b^2 - a^2 - b^2 = (1 - a^2)(1 - b^2) and
    // cosh w - cos 2t = 2 sinh^2(w/2) + 2 sin^2 t, written to avoid cancellation.
    const double base = std::expm1(-kf.I_A) * std::expm1(-kf.I_B);
    const double sh = std::sinh(0.5 * kf.omega), st = std::sin(kf.theta);
    const double ab = std::exp(-0.5 * (kf.I_A + kf.I_B));
    const double cross = 2.0 * (2.0 * sh * sh + 2.0 * st * st) * ab;
    double cross_safe = cross;
    if (!std::isfinite(cross)) {
        // sinh^2(w/2) overflows only when |w| is huge; fold the exponent in.
        cross_safe = std::exp(std::abs(kf.omega) - 0.5 * (kf.I_A + kf.I_B)) + 4.0 * st * st * ab;
    }
    return {base - cross_safe, base + cross_safe};
}

double physicality_bound(const KernelFunctionals& kf) {
    return std::max(ff_exp(kf, 1.0), ff_exp(kf, -1.0));
}

SpectralReport spectral_report(const KernelFunctionals& kf) {
    SpectralReport r;
    r.pair = kf.pair;
    r.f_flushed = kf.f_flushed;
    r.eig_single = eig_single_closed(kf);
    if (!kf.pair) {
        r.entropy_single = entropy(r.eig_single);
        const auto num = eig_hermitian(rho_single(kf));
        r.residual_closed_vs_numeric =
            std::max(std::abs(num[0] - r.eig_single[0]), std::abs(num[1] - r.eig_single[1]));
        return r;
    }
    const DensityMatrix4 rho = rho_pair(kf);
    Eigen::Matrix2cd rho_a;
    for (int a = 0; a < 2; ++a)
        for (int ap = 0; ap < 2; ++ap) rho_a(a, ap) = rho(2 * a, 2 * ap) + rho(2 * a + 1, 2 * ap + 1);
    r.entropy_single = entropy(eig_hermitian(rho_a));

    const auto num_pair = eig_hermitian(rho);
    const auto num_pt = eig_hermitian(partial_transpose_A(rho));
    r.eig_pt = descending(eig_pt_closed(kf));
    std::copy(num_pair.begin(), num_pair.end(), r.eig_pair.begin());
    double res = 0.0;
    for (int i = 0; i < 4; ++i) {
        res = std::max(res, std::abs(num_pt[i] - r.eig_pt[i]));
        // The spectrum is invariant under omega -> -omega, so the same closed
        // form describes rho_AB itself.
        res = std::max(res, std::abs(num_pair[i] - r.eig_pt[i]));
    }
    r.residual_closed_vs_numeric = res;
    r.negativity = negativity(r.eig_pt);
    const auto g = gamma_diagnostics(kf);
    r.gamma_minus = g.first;
    r.gamma_plus = g.second;
    r.physicality = physicality_bound(kf);
    return r;
}

}  // namespace udw
