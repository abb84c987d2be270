#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "udw/momentum_kernel.hpp"

namespace udw::oracle {

struct Mode {
    std::vector<double> k;
    double weight = 0.0;
};

struct ModeGrid {
    std::vector<Mode> modes;
    int truncation = 20;           // max occupation per mode
    std::size_t budget = 4096;     // cap on (N+1)^M

    void validate() const;
};

// Radial Gauss-Legendre nodes on [k_lo, k_hi] times a fixed set of unit
// directions; each weight is w_r k^{n-1} S_n / (number of directions).
ModeGrid radial_mode_grid(int n, double k_lo, double k_hi, int radial_nodes,
                          const std::vector<std::vector<double>>& directions, int truncation);

// Truncated field of M modes. Each detector enters through its per-mode
// amplitudes b_j = beta(k_j) sqrt(w_j); Y = sum_j (b_j/2) a_j^dagger - h.c.
class OracleSystem {
public:
    static OracleSystem from_amplitudes(std::vector<cplx> b_A, std::optional<std::vector<cplx>> b_B,
                                        std::vector<cplx> alpha, int truncation, std::size_t budget = 4096,
                                        bool b_first = false);

    int modes() const { return static_cast<int>(b_A_.size()); }
    int truncation() const { return n_; }
    std::size_t dimension() const { return dim_; }
    bool has_B() const { return b_B_.has_value(); }
    bool b_first() const { return b_first_; }
    const std::vector<cplx>& amplitudes_A() const { return b_A_; }
    const std::vector<cplx>& amplitudes_B() const { return *b_B_; }
    const std::vector<cplx>& amplitudes_alpha() const { return alpha_; }

    // exp(s Y_nu) on mode j, s = +1 or -1; nu = 0 for A, 1 for B.
    const Eigen::MatrixXcd& exp_y(int nu, int s, int j) const;
    // Truncated generator Y_nu restricted to mode j.
    Eigen::MatrixXcd generator(int nu, int j) const;
    const Eigen::MatrixXcd& displacement(int j) const { return disp_[j]; }

    // max_j ||D_j^dagger D_j - I|| restricted to the lower half of the levels.
    double displacement_unitarity_error() const;

    // Applies a single-mode operator to the full tensor-product vector.
    void apply(const Eigen::MatrixXcd& u, int j, Eigen::VectorXcd& psi) const;
    // D_alpha |0>.
    Eigen::VectorXcd initial_state() const;
    // Largest norm carried by the top occupation level of any mode.
    double top_level_weight(const Eigen::VectorXcd& psi) const;

private:
    std::vector<cplx> b_A_;
    std::optional<std::vector<cplx>> b_B_;
    std::vector<cplx> alpha_;
    int n_ = 0;
    std::size_t dim_ = 1;
    bool b_first_ = false;
    std::vector<Eigen::MatrixXcd> exp_[2][2];  // [nu][s>0]
    std::vector<Eigen::MatrixXcd> disp_;
};

OracleSystem discretize(const DetectorParams& a, const std::optional<DetectorParams>& b,
                        const CoherentAmplitude& alpha, int n, const ModeGrid& grid);

// <beta_2 | beta_1> for per-mode coherent amplitudes, by truncated-basis inner products.
cplx oracle_overlap(std::span<const cplx> b1, std::span<const cplx> b2, int truncation);

// exp[-1/2 sum(|b1|^2 + |b2|^2 - 2 b1 conj(b2))]
cplx coherent_overlap_closed(std::span<const cplx> b1, std::span<const cplx> b2);

struct Evolved2 {
    Eigen::Matrix2cd rho;
    double truncation_tail = 0.0;
};

struct Evolved4 {
    Eigen::Matrix4cd rho;
    double truncation_tail = 0.0;
};

enum class Ordering { by_switch_time, a_then_b, b_then_a };

Evolved2 oracle_evolve_single(const OracleSystem& sys);
Evolved4 oracle_evolve_pair(const OracleSystem& sys, Ordering order = Ordering::by_switch_time);

// The closed-form functionals on the discrete grid: I = sum|b|^2,
// Z = sum conj(b_A) b_B, C = Im sum b conj(alpha).
KernelFunctionals grid_functionals(const OracleSystem& sys);

// <0|Y_B Y_A|0> from the truncated matrices.
cplx oracle_vacuum_correlator(const OracleSystem& sys);

// max over modes of |e^{Y_A}e^{Y_B} - e^{i theta_j} e^{Y_B}e^{Y_A}| on the lower
// half of the levels, with theta_j the per-mode share of the grid theta.
double bch_residual(const OracleSystem& sys);

}  // namespace udw::oracle
