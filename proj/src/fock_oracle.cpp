#include "udw/fock_oracle.hpp"

#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "udw/errors.hpp"

namespace udw::oracle {

namespace {

Eigen::MatrixXcd annihilation(int n) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (int m = 1; m <= n; ++m) a(m - 1, m) = std::sqrt(static_cast<double>(m));
    return a;
}

// exp(b a^dagger - conj(b) a) on levels 0..n; Eigen uses scaling and squaring
// with a degree-13 Pade approximant, accurate to unit roundoff.
Eigen::MatrixXcd displacement_matrix(cplx b, int n) {
    const Eigen::MatrixXcd a = annihilation(n);
    const Eigen::MatrixXcd g = b * a.adjoint() - std::conj(b) * a;
    return g.exp();
}

std::size_t checked_dimension(int modes, int n, std::size_t budget) {
    std::size_t dim = 1;
    for (int j = 0; j < modes; ++j) {
        if (dim > budget / static_cast<std::size_t>(n + 1)) {
            std::ostringstream msg;
            msg << "truncated field dimension (" << n + 1 << ")^" << modes << " exceeds budget " << budget;
            throw BudgetExceeded(msg.str(), 0, budget);
        }
        dim *= static_cast<std::size_t>(n + 1);
    }
    return dim;
}

double half_block_error(const Eigen::MatrixXcd& m) {
    const int h = static_cast<int>(m.rows()) / 2 + 1;
    return m.topLeftCorner(h, h).cwiseAbs().maxCoeff();
}

}  // namespace

void ModeGrid::validate() const {
    if (modes.empty()) throw InvalidArgument("mode grid is empty");
    if (truncation < 1) throw InvalidArgument("truncation must be at least 1");
    const std::size_t n = modes.front().k.size();
    for (const auto& m : modes) {
        if (!(m.weight > 0.0)) throw InvalidArgument("mode weights must be positive");
        if (m.k.size() != n) throw InvalidArgument("mode wavevectors must share one dimension");
    }
    checked_dimension(static_cast<int>(modes.size()), truncation, budget);
}

ModeGrid radial_mode_grid(int n, double k_lo, double k_hi, int radial_nodes,
                          const std::vector<std::vector<double>>& directions, int truncation) {
    if (n < 1 || n > 3) throw UnsupportedDimension(n);
    if (!(k_lo >= 0.0 && k_hi > k_lo)) throw InvalidArgument("radial range must satisfy 0 <= k_lo < k_hi");
    if (directions.empty()) throw InvalidArgument("at least one direction is needed");
    const auto rule = gauss_legendre(radial_nodes, k_lo, k_hi);
    ModeGrid grid;
    grid.truncation = truncation;
    const double share = solid_angle(n) / static_cast<double>(directions.size());
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double k = rule.nodes[i];
        for (const auto& d : directions) {
            if (static_cast<int>(d.size()) != n) throw InvalidArgument("direction length does not match dimension");
            double norm = 0.0;
            for (double x : d) norm += x * x;
            norm = std::sqrt(norm);
            Mode m;
            for (double x : d) m.k.push_back(k * x / norm);
            m.weight = rule.weights[i] * std::pow(k, n - 1) * share;
            grid.modes.push_back(std::move(m));
        }
    }
    return grid;
}

OracleSystem OracleSystem::from_amplitudes(std::vector<cplx> b_A, std::optional<std::vector<cplx>> b_B,
                                           std::vector<cplx> alpha, int truncation, std::size_t budget,
                                           bool b_first) {
    if (truncation < 1) throw InvalidArgument("truncation must be at least 1");
    if (b_A.empty()) throw InvalidArgument("oracle needs at least one mode");
    if (b_B && b_B->size() != b_A.size()) throw InvalidArgument("amplitude lists differ in length");
    if (alpha.empty()) alpha.assign(b_A.size(), cplx{});
    if (alpha.size() != b_A.size()) throw InvalidArgument("amplitude lists differ in length");
    OracleSystem s;
    s.n_ = truncation;
    s.dim_ = checked_dimension(static_cast<int>(b_A.size()), truncation, budget);
    s.b_A_ = std::move(b_A);
    s.b_B_ = std::move(b_B);
    s.alpha_ = std::move(alpha);
    s.b_first_ = b_first;
    const int m = s.modes();
    for (int nu = 0; nu < (s.b_B_ ? 2 : 1); ++nu) {
        const auto& amps = nu == 0 ? s.b_A_ : *s.b_B_;
        for (int j = 0; j < m; ++j) {
            // e^{sY} is the displacement by s b / 2.
            s.exp_[nu][1].push_back(displacement_matrix(0.5 * amps[j], truncation));
            s.exp_[nu][0].push_back(displacement_matrix(-0.5 * amps[j], truncation));
        }
    }
    for (int j = 0; j < m; ++j) s.disp_.push_back(displacement_matrix(s.alpha_[j], truncation));
    return s;
}

const Eigen::MatrixXcd& OracleSystem::exp_y(int nu, int s, int j) const {
    if (nu == 1 && !b_B_) throw InvalidArgument("system has no detector B");
    return exp_[nu][s > 0 ? 1 : 0].at(j);
}

Eigen::MatrixXcd OracleSystem::generator(int nu, int j) const {
    if (nu == 1 && !b_B_) throw InvalidArgument("system has no detector B");
    const cplx b = (nu == 0 ? b_A_ : *b_B_).at(j);
    const Eigen::MatrixXcd a = annihilation(n_);
    return 0.5 * (b * a.adjoint() - std::conj(b) * a);
}

double OracleSystem::displacement_unitarity_error() const {
    double e = 0.0;
    for (const auto& d : disp_) {
        const Eigen::MatrixXcd r = d.adjoint() * d - Eigen::MatrixXcd::Identity(d.rows(), d.cols());
        e = std::max(e, half_block_error(r));
    }
    return e;
}

void OracleSystem::apply(const Eigen::MatrixXcd& u, int j, Eigen::VectorXcd& psi) const {
    const int levels = n_ + 1;
    std::size_t inner = 1;
    for (int i = j + 1; i < modes(); ++i) inner *= static_cast<std::size_t>(levels);
    const std::size_t block = inner * static_cast<std::size_t>(levels);
    const Eigen::MatrixXcd ut = u.transpose();
    for (std::size_t o = 0; o < dim_; o += block) {
        Eigen::Map<Eigen::MatrixXcd> x(psi.data() + o, static_cast<Eigen::Index>(inner), levels);
        x = (x * ut).eval();
    }
}

Eigen::VectorXcd OracleSystem::initial_state() const {
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(dim_));
    psi(0) = 1.0;
    for (int j = 0; j < modes(); ++j) apply(disp_[j], j, psi);
    return psi;
}

double OracleSystem::top_level_weight(const Eigen::VectorXcd& psi) const {
    const int levels = n_ + 1;
    double worst = 0.0;
    for (int j = 0; j < modes(); ++j) {
        std::size_t inner = 1;
        for (int i = j + 1; i < modes(); ++i) inner *= static_cast<std::size_t>(levels);
        const std::size_t block = inner * static_cast<std::size_t>(levels);
        double w = 0.0;
        for (std::size_t o = 0; o < dim_; o += block)
            for (std::size_t i = 0; i < inner; ++i) w += std::norm(psi(o + static_cast<std::size_t>(n_) * inner + i));
        worst = std::max(worst, std::sqrt(w));
    }
    return worst;
}

OracleSystem discretize(const DetectorParams& a, const std::optional<DetectorParams>& b,
                        const CoherentAmplitude& alpha, int n, const ModeGrid& grid) {
    grid.validate();
    a.validate(n);
    if (b) b->validate(n);
    alpha.validate(n);
    std::vector<cplx> ba, bb, al;
    for (const auto& m : grid.modes) {
        if (static_cast<int>(m.k.size()) != n) throw InvalidArgument("mode wavevector length does not match dimension");
        const double sw = std::sqrt(m.weight);
        ba.push_back(beta(a, m.k) * sw);
        if (b) bb.push_back(beta(*b, m.k) * sw);
        al.push_back(alpha.evaluate(m.k) * sw);
    }
    std::optional<std::vector<cplx>> obb;
    if (b) obb = std::move(bb);
    return OracleSystem::from_amplitudes(std::move(ba), std::move(obb), std::move(al), grid.truncation, grid.budget,
                                         b && b->switch_time < a.switch_time);
}

cplx oracle_overlap(std::span<const cplx> b1, std::span<const cplx> b2, int truncation) {
    if (b1.size() != b2.size()) throw InvalidArgument("amplitude lists differ in length");
    cplx prod = 1.0;
    for (std::size_t j = 0; j < b1.size(); ++j) {
        const Eigen::VectorXcd v1 = displacement_matrix(b1[j], truncation).col(0);
        const Eigen::VectorXcd v2 = displacement_matrix(b2[j], truncation).col(0);
        prod *= v2.dot(v1);
    }
    return prod;
}

cplx coherent_overlap_closed(std::span<const cplx> b1, std::span<const cplx> b2) {
    if (b1.size() != b2.size()) throw InvalidArgument("amplitude lists differ in length");
    cplx s{};
    for (std::size_t j = 0; j < b1.size(); ++j) s += std::norm(b1[j]) + std::norm(b2[j]) - 2.0 * b1[j] * std::conj(b2[j]);
    return std::exp(-0.5 * s);
}

namespace {

Eigen::VectorXcd apply_exp(const OracleSystem& sys, int nu, int s, Eigen::VectorXcd psi) {
    for (int j = 0; j < sys.modes(); ++j) sys.apply(sys.exp_y(nu, s, j), j, psi);
    return psi;
}

}  // namespace

Evolved2 oracle_evolve_single(const OracleSystem& sys) {
    const Eigen::VectorXcd psi0 = sys.initial_state();
    const Eigen::VectorXcd plus = apply_exp(sys, 0, +1, psi0);
    const Eigen::VectorXcd minus = apply_exp(sys, 0, -1, psi0);
    // exp(mu (x) Y) sends |g~>|psi> to |g~> cosh Y psi + |e~> sinh Y psi.
    const Eigen::VectorXcd phi[2] = {0.5 * (plus + minus), 0.5 * (plus - minus)};
    Evolved2 out;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) out.rho(r, c) = phi[c].dot(phi[r]);
    out.truncation_tail = std::max({sys.top_level_weight(psi0), sys.top_level_weight(plus), sys.top_level_weight(minus)});
    return out;
}

Evolved4 oracle_evolve_pair(const OracleSystem& sys, Ordering order) {
    if (!sys.has_B()) throw InvalidArgument("pair evolution needs detector B");
    bool a_first = true;
    if (order == Ordering::b_then_a || (order == Ordering::by_switch_time && sys.b_first())) a_first = false;
    const int first = a_first ? 0 : 1, second = a_first ? 1 : 0;
    const Eigen::VectorXcd psi0 = sys.initial_state();
    double tail = sys.top_level_weight(psi0);
    // v[s1][s2] = e^{s2 Y_second} e^{s1 Y_first} psi0, index 0 for +, 1 for -.
    Eigen::VectorXcd v[2][2];
    for (int s1 = 0; s1 < 2; ++s1) {
        const Eigen::VectorXcd w = apply_exp(sys, first, s1 == 0 ? +1 : -1, psi0);
        tail = std::max(tail, sys.top_level_weight(w));
        for (int s2 = 0; s2 < 2; ++s2) {
            v[s1][s2] = apply_exp(sys, second, s2 == 0 ? +1 : -1, w);
            tail = std::max(tail, sys.top_level_weight(v[s1][s2]));
        }
    }
    // Field vector attached to basis index 2a + b (a: A excited, b: B excited).
    Eigen::VectorXcd phi[4];
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double sa = a == 0 ? 1.0 : -1.0, sb = b == 0 ? 1.0 : -1.0;
            Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(sys.dimension()));
            for (int s1 = 0; s1 < 2; ++s1) {
                for (int s2 = 0; s2 < 2; ++s2) {
                    const int sgn_a = a_first ? s1 : s2, sgn_b = a_first ? s2 : s1;
                    const double c = (sgn_a == 0 ? 1.0 : sa) * (sgn_b == 0 ? 1.0 : sb);
                    acc += c * v[s1][s2];
                }
            }
            phi[2 * a + b] = 0.25 * acc;
        }
    }
    Evolved4 out;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) out.rho(r, c) = phi[c].dot(phi[r]);
    out.truncation_tail = tail;
    return out;
}

KernelFunctionals grid_functionals(const OracleSystem& sys) {
    const auto& ba = sys.amplitudes_A();
    const auto& al = sys.amplitudes_alpha();
    double IA = 0.0, CA = 0.0;
    cplx ca{};
    for (std::size_t j = 0; j < ba.size(); ++j) {
        IA += std::norm(ba[j]);
        ca += ba[j] * std::conj(al[j]);
    }
    CA = ca.imag();
    if (!sys.has_B()) return KernelFunctionals::single(IA, CA);
    const auto& bb = sys.amplitudes_B();
    double IB = 0.0;
    cplx Z{}, cb{};
    for (std::size_t j = 0; j < bb.size(); ++j) {
        IB += std::norm(bb[j]);
        Z += std::conj(ba[j]) * bb[j];
        cb += bb[j] * std::conj(al[j]);
    }
    return KernelFunctionals::pair_from(IA, IB, Z, CA, cb.imag(), sys.b_first());
}

cplx oracle_vacuum_correlator(const OracleSystem& sys) {
    if (!sys.has_B()) throw InvalidArgument("correlator needs detector B");
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(sys.dimension()));
    vac(0) = 1.0;
    Eigen::VectorXcd ya = Eigen::VectorXcd::Zero(vac.size()), yb = Eigen::VectorXcd::Zero(vac.size());
    for (int j = 0; j < sys.modes(); ++j) {
        Eigen::VectorXcd t = vac;
        sys.apply(sys.generator(0, j), j, t);
        ya += t;
        t = vac;
        sys.apply(sys.generator(1, j), j, t);
        yb += t;
    }
    // <0|Y_B = (Y_B^dagger |0>)^dagger = -(Y_B |0>)^dagger
    return -yb.dot(ya);
}

double bch_residual(const OracleSystem& sys) {
    if (!sys.has_B()) throw InvalidArgument("BCH check needs detector B");
    double worst = 0.0;
    for (int j = 0; j < sys.modes(); ++j) {
        const cplx ba = sys.amplitudes_A()[j], bb = sys.amplitudes_B()[j];
        const double theta_j = 0.5 * (ba * std::conj(bb)).imag();
        const Eigen::MatrixXcd lhs = sys.exp_y(0, 1, j) * sys.exp_y(1, 1, j);
        const Eigen::MatrixXcd rhs = std::polar(1.0, theta_j) * (sys.exp_y(1, 1, j) * sys.exp_y(0, 1, j));
        worst = std::max(worst, half_block_error(lhs - rhs));
    }
    return worst;
}

}  // namespace udw::oracle
