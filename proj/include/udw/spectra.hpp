#pragma once

#include <array>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "udw/momentum_kernel.hpp"

namespace udw {

struct SpectralReport {
    bool pair = false;
    std::array<double, 2> eig_single{};
    std::array<double, 4> eig_pair{};  // numeric, descending
    std::array<double, 4> eig_pt{};    // closed form, descending
    double negativity = 0.0;
    double entropy_single = 0.0;
    double gamma_minus = 0.0;
    double gamma_plus = 0.0;
    double physicality = 0.0;  // max over signs of exp(+-omega) f_A f_B
    double residual_closed_vs_numeric = 0.0;
    bool f_flushed = false;
};

std::array<double, 2> eig_single_closed(const KernelFunctionals& kf);

// E1..E4 in the order (2 - c + sqrt D-), (2 - c - sqrt D-), (2 + c + sqrt D+), (2 + c - sqrt D+), all over 8.
std::array<double, 4> eig_pt_closed(const KernelFunctionals& kf);

// Descending eigenvalues of a Hermitian matrix.
std::vector<double> eig_hermitian(const Eigen::MatrixXcd& m);

double negativity(std::span<const double> eig_pt);

// Von Neumann entropy in nats, -sum e ln e.
double entropy(std::span<const double> eigs);

// (Gamma_-, Gamma_+).
std::pair<double, double> gamma_diagnostics(const KernelFunctionals& kf);

double physicality_bound(const KernelFunctionals& kf);

SpectralReport spectral_report(const KernelFunctionals& kf);

}  // namespace udw
