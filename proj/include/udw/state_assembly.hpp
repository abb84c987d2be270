#pragma once

#include <Eigen/Dense>

#include "udw/momentum_kernel.hpp"

namespace udw {

// Tilde bases. Single detector: {g, e}. Pair: {gg, ge, eg, ee} with the A
// index slowest, so index = 2a + b (a, b = 0 for ground, 1 for excited).
using DensityMatrix2 = Eigen::Matrix2cd;
using DensityMatrix4 = Eigen::Matrix4cd;

// f2 uses sign labels: j and l for B, k and m for A (+1 ground, -1 excited).
// Column (j, k), row (l, m).
int pair_index(int sign_B, int sign_A);

struct DensityCheck {
    double hermiticity = 0.0;  // max |M - M^dagger|
    double trace_error = 0.0;  // |tr M - 1|
    double min_eigenvalue = 0.0;
    double purity = 0.0;       // tr M^2
};

DensityCheck check_density(const Eigen::MatrixXcd& m);

DensityMatrix2 rho_single(const KernelFunctionals& kf);

cplx f2_element(int j, int k, int l, int m, const KernelFunctionals& kf);

DensityMatrix4 rho_pair(const KernelFunctionals& kf);

Eigen::Matrix4cd partial_transpose_A(const Eigen::Matrix4cd& rho);

struct FactorizationBundle {
    Eigen::Matrix4cd W, Q, V, Q_pt;
    double residual = 0.0;     // max |rho - W^dagger Q W|
    double residual_pt = 0.0;  // max |rho^tA - V^dagger Q_pt V|
};

// When B is switched first the bundle is built for the relabelled pair and
// carried back by the factor swap, so W -> W P, V -> conj(V) P and Q_pt is
// conjugated.
FactorizationBundle build_factorization(const KernelFunctionals& kf);

// Q in the omega form; Q_pt is the same expression with omega -> -omega.
Eigen::Matrix4cd q_matrix(double f_A, double f_B, double theta, double omega);
Eigen::Matrix4cd w_matrix(double C_A, double C_B);
Eigen::Matrix4cd v_matrix(double C_A, double C_B);

// The functionals seen from the other detector: A <-> B, theta -> -theta.
KernelFunctionals swapped(const KernelFunctionals& kf);

}  // namespace udw
