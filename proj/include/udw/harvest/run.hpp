#pragma once

#include <optional>
#include <string>
#include <vector>

#include "udw/harvest/scenario.hpp"
#include "udw/spectra.hpp"

namespace udw::harvest {

// First-order error bars on the derived columns, from shifting each
// functional by its own quadrature error.
struct DerivedErrors {
    double f_A = 0.0, f_B = 0.0, theta = 0.0, omega = 0.0;
    std::array<double, 4> eig{};
    std::array<double, 4> eig_pt{};
    double negativity = 0.0, entropy = 0.0, gamma_minus = 0.0, gamma_plus = 0.0;
};

struct ResultRow {
    std::string scenario_id;
    int n = 3;
    bool pair = false;
    bool vacuum = true;
    KernelFunctionals kf;
    SpectralReport spec;
    DerivedErrors derived;
    std::optional<double> resid_pert;    // max |rho_exact - rho_pert| at this coupling
    std::optional<double> resid_oracle;  // max |rho_oracle - rho_closed| on the oracle grid
    double oracle_tail = 0.0;
    double err_estimate = 0.0;  // summed quadrature error of the functionals
    std::vector<std::string> notes;
};

// Evaluates one scenario point. Module errors come back as ComputeError.
ResultRow run_point(const Scenario& s, bool with_oracle);

// One row per sweep value, in sweep order, ids "<id>/<i>". Points run on up
// to `jobs` threads. A scenario without a sweep yields its single point.
std::vector<ResultRow> run_sweep(const Scenario& s, int jobs, bool with_oracle);

}  // namespace udw::harvest
