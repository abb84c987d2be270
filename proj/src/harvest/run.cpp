#include "udw/harvest/run.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include "udw/fock_oracle.hpp"
#include "udw/perturbative.hpp"
#include "udw/state_assembly.hpp"

namespace udw::harvest {

namespace {

double max_abs(const Eigen::MatrixXcd& m) {
    return m.cwiseAbs().maxCoeff();
}

// Quantities that carry propagated errors, flattened for differencing.
std::vector<double> derived_vector(const KernelFunctionals& kf) {
    const auto rep = spectral_report(kf);
    std::vector<double> v{kf.f_A, kf.f_B, kf.theta, kf.omega};
    if (kf.pair) {
        v.insert(v.end(), rep.eig_pair.begin(), rep.eig_pair.end());
        v.insert(v.end(), rep.eig_pt.begin(), rep.eig_pt.end());
    } else {
        v.insert(v.end(), rep.eig_single.begin(), rep.eig_single.end());
        v.insert(v.end(), 6, 0.0);
    }
    v.insert(v.end(), {rep.negativity, rep.entropy_single, rep.gamma_minus, rep.gamma_plus});
    return v;
}

DerivedErrors propagate(const KernelFunctionals& kf) {
    const auto base = derived_vector(kf);
    std::vector<double> acc(base.size(), 0.0);
    auto add = [&](const KernelFunctionals& shifted) {
        const auto v = derived_vector(shifted);
        for (std::size_t i = 0; i < v.size(); ++i) acc[i] += std::abs(v[i] - base[i]);
    };
    const auto& e = kf.error;
    if (!kf.pair) {
        if (e.I_A > 0) add(KernelFunctionals::single(kf.I_A + e.I_A, kf.C_A));
        if (e.C_A > 0) add(KernelFunctionals::single(kf.I_A, kf.C_A + e.C_A));
    } else {
        const cplx Z(-kf.omega, -2.0 * kf.theta);
        auto make = [&](double ia, double ib, cplx z, double ca, double cb) {
            auto out = KernelFunctionals::pair_from(ia, ib, z, ca, cb, kf.b_first);
            out.coincident_times = kf.coincident_times;
            return out;
        };
        if (e.I_A > 0) add(make(kf.I_A + e.I_A, kf.I_B, Z, kf.C_A, kf.C_B));
        if (e.I_B > 0) add(make(kf.I_A, kf.I_B + e.I_B, Z, kf.C_A, kf.C_B));
        if (e.Z > 0) {
            add(make(kf.I_A, kf.I_B, Z + cplx(e.Z, 0.0), kf.C_A, kf.C_B));
            add(make(kf.I_A, kf.I_B, Z + cplx(0.0, e.Z), kf.C_A, kf.C_B));
        }
        if (e.C_A > 0) add(make(kf.I_A, kf.I_B, Z, kf.C_A + e.C_A, kf.C_B));
        if (e.C_B > 0) add(make(kf.I_A, kf.I_B, Z, kf.C_A, kf.C_B + e.C_B));
    }
    DerivedErrors d;
    d.f_A = acc[0];
    d.f_B = acc[1];
    d.theta = acc[2];
    d.omega = acc[3];
    std::copy(acc.begin() + 4, acc.begin() + 8, d.eig.begin());
    std::copy(acc.begin() + 8, acc.begin() + 12, d.eig_pt.begin());
    d.negativity = acc[12];
    d.entropy = acc[13];
    d.gamma_minus = acc[14];
    d.gamma_plus = acc[15];
    return d;
}

void validate(const Scenario& s) {
    try {
        if (s.detectors.empty() || s.detectors.size() > 2) throw InvalidArgument("need one or two detectors");
        for (const auto& d : s.detectors) d.validate(s.n);
        s.amplitude.validate(s.n);
        s.quadrature.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(s.id, 0, e.what());
    }
}

}  // namespace

ResultRow run_point(const Scenario& s, bool with_oracle) {
    validate(s);
    if (with_oracle && !s.oracle) throw ConfigError("oracle", 0, "scenario has no oracle block");
    ResultRow row;
    row.scenario_id = s.id;
    row.n = s.n;
    row.pair = s.is_pair();
    row.vacuum = s.amplitude.is_vacuum();
    row.notes = s.warnings;
    const DetectorParams& a = s.detectors[0];
    std::optional<DetectorParams> b;
    if (row.pair) b = s.detectors[1];
    try {
        row.kf = kernel_functionals(a, b, s.amplitude, s.n, s.quadrature);
        row.spec = spectral_report(row.kf);
        row.derived = propagate(row.kf);
        const auto& e = row.kf.error;
        row.err_estimate = e.I_A + e.I_B + e.Z + e.C_A + e.C_B;
        if (row.kf.f_flushed) row.notes.push_back("vacuum overlap underflowed and was flushed to zero");

        if (s.perturbative) {
            const auto pc = pert_coeffs(a, b, s.amplitude, s.n, s.quadrature);
            row.resid_pert = row.pair ? max_abs(rho_pair(row.kf) - rho_pair_pert(pc))
                                      : max_abs(rho_single(row.kf) - rho_single_pert(pc));
            if (pc.coincident_times) row.notes.push_back("perturbative residual is informational at coincident times");
        }

        if (with_oracle) {
            const auto sys = oracle::discretize(a, b, s.amplitude, s.n, *s.oracle);
            const auto grid = oracle::grid_functionals(sys);
            if (row.pair) {
                const auto ev = oracle::oracle_evolve_pair(sys);
                row.resid_oracle = max_abs(ev.rho - rho_pair(grid));
                row.oracle_tail = ev.truncation_tail;
            } else {
                const auto ev = oracle::oracle_evolve_single(sys);
                row.resid_oracle = max_abs(ev.rho - rho_single(grid));
                row.oracle_tail = ev.truncation_tail;
            }
            if (row.oracle_tail > 1e-8)
                row.notes.push_back("oracle truncation tail " + std::to_string(row.oracle_tail) +
                                    "; raise oracle.truncation");
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& err) {
        throw ComputeError(s.id, err.what());
    }
    return row;
}

std::vector<ResultRow> run_sweep(const Scenario& s, int jobs, bool with_oracle) {
    if (!s.sweep) return {run_point(s, with_oracle)};
    const auto& values = s.sweep->values;
    const std::size_t count = values.size();
    std::vector<std::optional<ResultRow>> rows(count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                Scenario point = s;
                point.sweep.reset();
                point.id = s.id + "/" + std::to_string(i);
                set_parameter(point, s.sweep->path, values[i]);
                rows[i] = run_point(point, with_oracle);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const int threads = std::clamp(jobs, 1, static_cast<int>(count));
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    // The earliest failing point is reported, independent of scheduling.
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    std::vector<ResultRow> out;
    out.reserve(count);
    for (auto& r : rows) out.push_back(std::move(*r));
    return out;
}

}  // namespace udw::harvest
