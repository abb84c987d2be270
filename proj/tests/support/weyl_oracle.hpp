#pragma once

// Density matrices from the Weyl relations alone. Each ordered product of
// exp(c Y_nu) is merged by BCH (the commutator [Y_A, Y_B] = i theta is a
// c-number) into one displacement, whose coherent-state expectation is
// exp(-|g|^2/2 + 2i Im(g conj(alpha))) summed over modes. Nothing here
// touches the closed-form bracket.

#include <array>
#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace weyl {

using cplx = std::complex<double>;

struct Functionals {
    double I_A = 0.0, I_B = 0.0;
    cplx Z{};  // sum conj(b_A) b_B
    double C_A = 0.0, C_B = 0.0;
};

struct Factor {
    int nu;    // 0 for A, 1 for B
    double c;  // coefficient of Y_nu
};

// <alpha| prod_i exp(c_i Y_{nu_i}) |alpha>, leftmost factor first.
inline cplx expectation(const Functionals& f, const std::vector<Factor>& product) {
    const double theta = -0.5 * f.Z.imag();
    double a = 0.0, b = 0.0;
    cplx phase_exponent{};
    // Fold from the right: exp(cY) exp(aY_A + bY_B) = exp(cY + aY_A + bY_B) exp(c [Y, aY_A + bY_B] / 2).
    for (auto it = product.rbegin(); it != product.rend(); ++it) {
        const cplx comm = it->nu == 0 ? cplx(0.0, b * theta) : cplx(0.0, -a * theta);
        phase_exponent += 0.5 * it->c * comm;
        (it->nu == 0 ? a : b) += it->c;
    }
    const double g2 = (a * a * f.I_A + b * b * f.I_B + 2.0 * a * b * f.Z.real()) / 4.0;
    const double im = (a * f.C_A + b * f.C_B) / 2.0;
    return std::exp(phase_exponent + cplx(-0.5 * g2, 2.0 * im));
}

// A alone: U = P_+ (x) e^{Y} + P_- (x) e^{-Y}.
inline Eigen::Matrix2cd rho_single(const Functionals& f) {
    Eigen::Matrix2cd r = Eigen::Matrix2cd::Zero();
    for (int s : {1, -1})
        for (int sp : {1, -1}) {
            const cplx e = expectation(f, {{0, double(-sp)}, {0, double(s)}});
            const Eigen::Vector2cd v(1.0, double(s)), w(1.0, double(sp));
            r += 0.25 * e * v * w.adjoint();
        }
    return r;
}

// Pair with index 2a + b; b_first applies A's factor last.
inline Eigen::Matrix4cd rho_pair(const Functionals& f, bool b_first = false) {
    Eigen::Matrix4cd r = Eigen::Matrix4cd::Zero();
    for (int sa : {1, -1})
        for (int sb : {1, -1})
            for (int pa : {1, -1})
                for (int pb : {1, -1}) {
                    // <phi_p| phi_s> with phi_s = e^{s_second Y_second} e^{s_first Y_first} alpha.
                    std::vector<Factor> prod;
                    if (!b_first)
                        prod = {{0, double(-pa)}, {1, double(-pb)}, {1, double(sb)}, {0, double(sa)}};
                    else
                        prod = {{1, double(-pb)}, {0, double(-pa)}, {0, double(sa)}, {1, double(sb)}};
                    const cplx e = expectation(f, prod);
                    Eigen::Vector4cd v, w;
                    for (int a = 0; a < 2; ++a)
                        for (int b = 0; b < 2; ++b) {
                            v(2 * a + b) = (a ? double(sa) : 1.0) * (b ? double(sb) : 1.0);
                            w(2 * a + b) = (a ? double(pa) : 1.0) * (b ? double(pb) : 1.0);
                        }
                    r += (1.0 / 16.0) * e * v * w.adjoint();
                }
    return r;
}

}  // namespace weyl
