#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "udw/momentum_kernel.hpp"

namespace udw {

// Second-order coefficients for delta switching. Phases e^{i Omega t} are
// carried inside M, L_AB and Lbar as in the energy-basis expressions.
struct PerturbativeCoefficients {
    bool pair = false;
    double L_AA = 0.0, L_BB = 0.0;
    cplx L_AB{}, M{};
    cplx Lbar_A{}, Lbar_B{};
    double phase_A = 0.0, phase_B = 0.0;  // Omega_nu t_nu
    bool coincident_times = false;
    double error = 0.0;  // summed quadrature error of the integrals
};

PerturbativeCoefficients pert_coeffs(const DetectorParams& a, const std::optional<DetectorParams>& b,
                                     const CoherentAmplitude& alpha, int n, const QuadratureConfig& cfg);

// <0|Y_B Y_A|0> recovered from M.
cplx vacuum_correlator(const PerturbativeCoefficients& c);

Eigen::Matrix2cd rho_single_pert(const PerturbativeCoefficients& c);
Eigen::Matrix4cd rho_pair_pert(const PerturbativeCoefficients& c);

struct ScalingReport {
    std::vector<double> lambdas;
    std::vector<double> residuals;  // max elementwise |rho_exact - rho_pert|
    double slope = 0.0;
    double intercept = 0.0;
    bool insufficient_decay = false;  // residuals at quadrature-noise level
    bool informational = false;       // coincident switch times
    bool passed = false;              // slope >= 2.7
};

// Sets every coupling to each lambda in turn (switch weights unchanged) and
// fits log residual against log lambda.
ScalingReport residual_scaling_check(const DetectorParams& a, const std::optional<DetectorParams>& b,
                                     const CoherentAmplitude& alpha, int n, const QuadratureConfig& cfg,
                                     const std::vector<double>& lambdas);

}  // namespace udw
