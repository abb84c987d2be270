#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace udw {

using cplx = std::complex<double>;

struct QuadratureConfig {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    int max_subdivisions = 20000;
    // Wavenumber at which the half-line is split into inward (IR) and outward (UV)
    // dyadic shells. Zero means: take the kernel's own scale hint, else 1.
    double radial_map_scale = 0.0;
    std::optional<double> ir_cutoff;
    std::optional<double> uv_cutoff;

    void validate() const;
};

struct RadialKernel {
    std::function<cplx(double)> evaluate;
    double scale = 0.0;        // where the integrand lives, in 1/length (0 = unknown)
    double oscillation = 0.0;  // largest angular frequency in k of the oscillating factors
    std::vector<double> breakpoints;  // features the partition must resolve (e.g. packet peaks)
};

// Several integrands refined on one shared partition of the radial axis.
struct RadialKernelSet {
    std::size_t components = 0;
    std::function<void(double, std::span<cplx>)> evaluate;
    double scale = 0.0;
    double oscillation = 0.0;
    std::vector<double> breakpoints;
};

struct QuadratureResult {
    cplx value{};
    double error = 0.0;
    long evaluations = 0;
    int intervals = 0;
};

QuadratureResult integrate_radial(const RadialKernel& kernel, const QuadratureConfig& cfg);
std::vector<QuadratureResult> integrate_radial(const RadialKernelSet& kernels,
                                               const QuadratureConfig& cfg);

double solid_angle(int n);

// Angular integral of exp(i k.dx) over directions of k at fixed |k|, as a
// function of k*|dx|: 4pi sin(x)/x, 2pi J0(x), 2cos(x) for n = 3, 2, 1.
double plane_wave_angular(int n, double kr);

// exp(-shift) * integral over unit directions s of exp(k s.w), for complex w.
// The shift is folded into the exponent so large arguments do not overflow.
cplx angular_exp_integral(int n, double k, std::span<const cplx> w, double shift = 0.0);

// Radial kernel k -> k^{n-1} * A_n(k|dx|) * profile(k).
RadialKernel angular_reduce(int n, std::span<const double> displacement,
                            std::function<cplx(double)> radial_profile_product);

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// m-point Gauss-Legendre rule on [a, b].
GaussRule gauss_legendre(int m, double a = -1.0, double b = 1.0);

}  // namespace udw
