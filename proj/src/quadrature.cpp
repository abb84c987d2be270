#include "udw/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "udw/errors.hpp"

namespace udw {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double epmach = std::numeric_limits<double>::epsilon();
constexpr double uflow = std::numeric_limits<double>::min();

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
constexpr double xgk[11] = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};
constexpr double wgk[11] = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077600525452338, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
constexpr double wg[5] = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

// Shell bookkeeping.
constexpr int max_ir_shells = 400;
constexpr int max_uv_shells = 200;
constexpr int divergence_run = 30;       // consecutive non-decaying shells
constexpr double decay_ratio = 0.9;
constexpr double tail_fraction = 1e-4;   // tail estimate must be below this fraction of the target
constexpr int max_pieces_per_shell = 256;
constexpr int max_pieces_core = 4096;

struct Segment {
    double a = 0, b = 0;
    std::vector<cplx> value;
    std::vector<double> err;
    std::vector<double> absval;
    bool refinable = true;
};

class Rule {
public:
    explicit Rule(const RadialKernelSet& k) : ker_(k), nc_(k.components), f_(21 * nc_) {}

    void apply(Segment& s) {
        const double centr = 0.5 * (s.a + s.b);
        const double hlgth = 0.5 * (s.b - s.a);
        // node order: 0 centre, then pairs (c - h x_j, c + h x_j) for j = 0..9
        eval(0, centr);
        for (int j = 0; j < 10; ++j) {
            const double absc = hlgth * xgk[j];
            eval(1 + 2 * j, centr - absc);
            eval(2 + 2 * j, centr + absc);
        }
        s.value.assign(nc_, cplx{});
        s.err.assign(nc_, 0.0);
        s.absval.assign(nc_, 0.0);
        for (std::size_t c = 0; c < nc_; ++c) {
            for (int part = 0; part < 2; ++part) {
                auto fv = [&](int idx) {
                    const cplx z = f_[idx * nc_ + c];
                    return part == 0 ? z.real() : z.imag();
                };
                const double fc = fv(0);
                double resg = 0.0;
                double resk = wgk[10] * fc;
                double resabs = std::abs(resk);
                for (int j = 0; j < 10; ++j) {
                    const double f1 = fv(1 + 2 * j), f2 = fv(2 + 2 * j);
                    resk += wgk[j] * (f1 + f2);
                    resabs += wgk[j] * (std::abs(f1) + std::abs(f2));
                    if (j % 2 == 1) resg += wg[j / 2] * (f1 + f2);
                }
                const double reskh = 0.5 * resk;
                double resasc = wgk[10] * std::abs(fc - reskh);
                for (int j = 0; j < 10; ++j)
                    resasc += wgk[j] * (std::abs(fv(1 + 2 * j) - reskh) + std::abs(fv(2 + 2 * j) - reskh));
                const double result = resk * hlgth;
                resabs *= std::abs(hlgth);
                resasc *= std::abs(hlgth);
                double abserr = std::abs((resk - resg) * hlgth);
                if (resasc != 0.0 && abserr != 0.0)
                    abserr = resasc * std::min(1.0, std::pow(200.0 * abserr / resasc, 1.5));
                if (resabs > uflow / (50.0 * epmach)) abserr = std::max(epmach * 50.0 * resabs, abserr);
                if (part == 0)
                    s.value[c].real(result);
                else
                    s.value[c].imag(result);
                s.err[c] += abserr;
                s.absval[c] += resabs;
            }
        }
    }

    long evaluations() const { return evals_; }

private:
    void eval(int idx, double k) {
        std::span<cplx> out(f_.data() + idx * nc_, nc_);
        ker_.evaluate(k, out);
        ++evals_;
        for (const cplx& z : out) {
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
                std::ostringstream msg;
                msg << "integrand is not finite at k = " << k;
                throw InvalidArgument(msg.str());
            }
        }
    }

    const RadialKernelSet& ker_;
    std::size_t nc_;
    std::vector<cplx> f_;
    long evals_ = 0;
};

// Breakpoints at multiples of the half period pi/nu inside (a, b), capped,
// merged with the kernel's own feature points.
std::vector<double> split_points(double a, double b, double nu, int cap, const std::vector<double>& extra) {
    std::vector<double> pts{a};
    for (double x : extra)
        if (x > a && x < b) pts.push_back(x);
    if (nu > 0.0) {
        const double half = pi / nu;
        const double count = (b - a) / half;
        if (count > cap) {
            for (int i = 1; i < cap; ++i) pts.push_back(a + (b - a) * i / cap);
        } else if (count > 1.0) {
            double m = std::floor(a / half) + 1.0;
            for (double x = m * half; x < b; x = (++m) * half)
                if (x > a * (1 + 1e-12) && x < b * (1 - 1e-12)) pts.push_back(x);
        }
    }
    pts.push_back(b);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
}

class Integrator {
public:
    Integrator(const RadialKernelSet& ker, const QuadratureConfig& cfg)
        : ker_(ker), cfg_(cfg), nc_(ker.components), rule_(ker),
          total_(nc_), abs_total_(nc_), tail_err_(nc_, 0.0) {}

    std::vector<QuadratureResult> run() {
        const double a = cfg_.ir_cutoff.value_or(0.0);
        const double b = cfg_.uv_cutoff.value_or(std::numeric_limits<double>::infinity());
        double p = cfg_.radial_map_scale > 0 ? cfg_.radial_map_scale : (ker_.scale > 0 ? ker_.scale : 1.0);
        p = std::max(p, a);
        if (std::isfinite(b)) p = std::min(p, b);
        if (a == 0.0 && p == 0.0) p = 1.0;

        if (std::isfinite(b)) {
            if (p < b) add_region(p, b, max_pieces_core);
        } else {
            shells(p, +1);
        }
        if (a == 0.0) {
            shells(p, -1);
        } else if (a < p) {
            add_region(a, p, max_pieces_core);
        }
        refine();
        return collect();
    }

private:
    void add_region(double lo, double hi, int cap) {
        const auto pts = split_points(lo, hi, ker_.oscillation, cap, ker_.breakpoints);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) push(pts[i], pts[i + 1]);
    }

    // Returns per-component sum of |f| over the new pieces.
    std::vector<double> add_shell(double lo, double hi) {
        std::vector<double> shell_abs(nc_, 0.0);
        const auto pts = split_points(lo, hi, ker_.oscillation, max_pieces_per_shell, ker_.breakpoints);
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const Segment& s = push(pts[i], pts[i + 1]);
            for (std::size_t c = 0; c < nc_; ++c) shell_abs[c] += s.absval[c];
        }
        return shell_abs;
    }

    const Segment& push(double lo, double hi) {
        Segment s;
        s.a = lo;
        s.b = hi;
        rule_.apply(s);
        for (std::size_t c = 0; c < nc_; ++c) {
            total_[c] += s.value[c];
            abs_total_[c] += s.absval[c];
        }
        segs_.push_back(std::move(s));
        return segs_.back();
    }

    double target(std::size_t c) const {
        return std::max({cfg_.abs_tol, cfg_.rel_tol * std::abs(total_[c]), 64.0 * epmach * abs_total_[c]});
    }

    // dir = +1 walks outward [p 2^j, p 2^{j+1}], dir = -1 inward [p 2^{-j-1}, p 2^{-j}].
    void shells(double p, int dir) {
        const int cap = dir > 0 ? max_uv_shells : max_ir_shells;
        std::vector<double> prev(nc_, -1.0);
        int nondecay = 0;
        // The walk may not stop before it has passed every feature point.
        double must_reach = p;
        for (double x : ker_.breakpoints) {
            if (!(x > 0.0)) continue;
            if (dir > 0 && x > must_reach) must_reach = x;
            if (dir < 0 && x < must_reach) must_reach = x;
        }
        double edge = p;
        for (int j = 0; j < cap; ++j) {
            const double lo = dir > 0 ? edge : edge * 0.5;
            const double hi = dir > 0 ? edge * 2.0 : edge;
            edge = dir > 0 ? hi : lo;
            const auto cur = add_shell(lo, hi);
            bool done = true;
            bool growing = false;
            std::vector<double> tails(nc_, 0.0);
            for (std::size_t c = 0; c < nc_; ++c) {
                if (cur[c] == 0.0) continue;
                if (prev[c] < 0.0) {
                    done = false;
                    continue;
                }
                const double r = prev[c] > 0.0 ? cur[c] / prev[c] : std::numeric_limits<double>::infinity();
                if (r >= decay_ratio) {
                    done = false;
                    growing = true;
                    continue;
                }
                tails[c] = cur[c] * r / (1.0 - r);
                if (tails[c] > tail_fraction * target(c)) done = false;
            }
            prev = cur;
            nondecay = growing ? nondecay + 1 : 0;
            if (dir > 0 ? edge < must_reach : edge > must_reach) {
                done = false;
                nondecay = 0;
            }
            if (done) {
                for (std::size_t c = 0; c < nc_; ++c) tail_err_[c] += tails[c];
                return;
            }
            if (nondecay >= divergence_run) break;
        }
        std::ostringstream msg;
        if (dir > 0) {
            msg << "radial integral does not converge as k -> infinity (shell sums stop decaying near k = "
                << edge << "); set uv_cutoff or use a smearing with decaying transform";
            throw DivergenceDetected(msg.str(), DivergenceDetected::Region::ultraviolet);
        }
        msg << "radial integral does not converge as k -> 0 (shell sums stop decaying near k = " << edge
            << "); set ir_cutoff or use an IR-safe profile";
        throw DivergenceDetected(msg.str(), DivergenceDetected::Region::infrared);
    }

    std::vector<double> errors() const {
        std::vector<double> e(tail_err_);
        for (const Segment& s : segs_)
            for (std::size_t c = 0; c < nc_; ++c) e[c] += s.err[c];
        return e;
    }

    void refine() {
        std::vector<double> scale(nc_);
        for (std::size_t c = 0; c < nc_; ++c) scale[c] = target(c);
        auto priority = [&](const Segment& s) {
            double pr = 0.0;
            for (std::size_t c = 0; c < nc_; ++c) pr = std::max(pr, s.err[c] / scale[c]);
            return pr;
        };
        using Entry = std::pair<double, std::size_t>;
        std::priority_queue<Entry> heap;
        for (std::size_t i = 0; i < segs_.size(); ++i) heap.emplace(priority(segs_[i]), i);

        std::vector<double> err = errors();
        auto converged = [&] {
            for (std::size_t c = 0; c < nc_; ++c)
                if (err[c] > target(c)) return false;
            return true;
        };
        while (!converged()) {
            if (heap.empty() || static_cast<int>(segs_.size()) >= cfg_.max_subdivisions) {
                double worst = 0.0;
                for (std::size_t c = 0; c < nc_; ++c) worst = std::max(worst, err[c]);
                std::ostringstream msg;
                msg << "adaptive quadrature did not reach tolerance after " << segs_.size()
                    << " subintervals (achieved error " << worst << ")";
                throw NonConvergence(msg.str(), worst);
            }
            const std::size_t i = heap.top().second;
            heap.pop();
            Segment& s = segs_[i];
            const double mid = 0.5 * (s.a + s.b);
            if (!(mid > s.a && mid < s.b) || (s.b - s.a) < 1e3 * epmach * s.b) {
                s.refinable = false;
                continue;
            }
            Segment left, right;
            left.a = s.a;
            left.b = mid;
            right.a = mid;
            right.b = s.b;
            rule_.apply(left);
            rule_.apply(right);
            for (std::size_t c = 0; c < nc_; ++c) {
                total_[c] += left.value[c] + right.value[c] - s.value[c];
                abs_total_[c] += left.absval[c] + right.absval[c] - s.absval[c];
                err[c] += left.err[c] + right.err[c] - s.err[c];
            }
            segs_[i] = std::move(left);
            segs_.push_back(std::move(right));
            heap.emplace(priority(segs_[i]), i);
            heap.emplace(priority(segs_.back()), segs_.size() - 1);
        }
    }

    std::vector<QuadratureResult> collect() {
        // Sum in order of position so the result depends only on the partition.
        std::vector<std::size_t> order(segs_.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return segs_[x].a < segs_[y].a; });
        std::vector<QuadratureResult> out(nc_);
        for (std::size_t c = 0; c < nc_; ++c) {
            cplx v{};
            double e = tail_err_[c];
            for (std::size_t i : order) {
                v += segs_[i].value[c];
                e += segs_[i].err[c];
            }
            out[c].value = v;
            out[c].error = e;
            out[c].evaluations = rule_.evaluations();
            out[c].intervals = static_cast<int>(segs_.size());
        }
        return out;
    }

    const RadialKernelSet& ker_;
    const QuadratureConfig& cfg_;
    std::size_t nc_;
    Rule rule_;
    std::vector<Segment> segs_;
    std::vector<cplx> total_;
    std::vector<double> abs_total_;
    std::vector<double> tail_err_;
};

}  // namespace

void QuadratureConfig::validate() const {
    if (!(rel_tol > 0.0)) throw InvalidArgument("rel_tol must be positive");
    if (!(abs_tol > 0.0)) throw InvalidArgument("abs_tol must be positive");
    if (max_subdivisions < 1) throw InvalidArgument("max_subdivisions must be at least 1");
    if (!(radial_map_scale >= 0.0) || !std::isfinite(radial_map_scale))
        throw InvalidArgument("radial_map_scale must be finite and non-negative");
    if (ir_cutoff && !(*ir_cutoff >= 0.0)) throw InvalidArgument("ir_cutoff must be non-negative");
    if (uv_cutoff && !(*uv_cutoff > 0.0 && std::isfinite(*uv_cutoff)))
        throw InvalidArgument("uv_cutoff must be positive and finite");
    if (ir_cutoff && uv_cutoff && !(*ir_cutoff < *uv_cutoff))
        throw InvalidArgument("ir_cutoff must be below uv_cutoff");
}

std::vector<QuadratureResult> integrate_radial(const RadialKernelSet& kernels, const QuadratureConfig& cfg) {
    cfg.validate();
    if (kernels.components == 0 || !kernels.evaluate) throw InvalidArgument("empty kernel set");
    Integrator integ(kernels, cfg);
    return integ.run();
}

QuadratureResult integrate_radial(const RadialKernel& kernel, const QuadratureConfig& cfg) {
    if (!kernel.evaluate) throw InvalidArgument("empty kernel");
    RadialKernelSet set;
    set.components = 1;
    set.scale = kernel.scale;
    set.oscillation = kernel.oscillation;
    set.breakpoints = kernel.breakpoints;
    set.evaluate = [&kernel](double k, std::span<cplx> out) { out[0] = kernel.evaluate(k); };
    return integrate_radial(set, cfg).front();
}

double solid_angle(int n) {
    switch (n) {
        case 1: return 2.0;
        case 2: return 2.0 * pi;
        case 3: return 4.0 * pi;
        default: throw UnsupportedDimension(n);
    }
}

double plane_wave_angular(int n, double kr) {
    switch (n) {
        case 1: return 2.0 * std::cos(kr);
        case 2: return 2.0 * pi * std::cyl_bessel_j(0.0, std::abs(kr));
        case 3: {
            const double x = std::abs(kr);
            if (x < 1e-4) {
                const double x2 = x * x;
                return 4.0 * pi * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
            }
            return 4.0 * pi * std::sin(x) / x;
        }
        default: throw UnsupportedDimension(n);
    }
}

cplx angular_exp_integral(int n, double k, std::span<const cplx> w, double shift) {
    if (n < 1 || n > 3) throw UnsupportedDimension(n);
    if (static_cast<int>(w.size()) != n) throw InvalidArgument("vector length does not match dimension");
    if (n == 1) return std::exp(k * w[0] - shift) + std::exp(-k * w[0] - shift);
    if (n == 3) {
        const cplx z = k * std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
        if (std::abs(z) < 1e-3) {
            const cplx z2 = z * z;
            return 4.0 * pi * std::exp(-shift) * (1.0 + z2 / 6.0 + z2 * z2 / 120.0);
        }
        return 4.0 * pi * (std::exp(z - shift) - std::exp(-z - shift)) / (2.0 * z);
    }
    // n == 2
    if (w[0].real() == 0.0 && w[1].real() == 0.0) {
        const double r = std::hypot(w[0].imag(), w[1].imag());
        return plane_wave_angular(2, k * r) * std::exp(-shift);
    }
    // Periodic trapezoid in the polar angle; converges geometrically once the
    // node count exceeds the argument size.
    const double size = k * std::sqrt(std::norm(w[0]) + std::norm(w[1]));
    const int m = 2 * (20 + static_cast<int>(std::ceil(size)));
    cplx sum{};
    for (int i = 0; i < m; ++i) {
        const double phi = 2.0 * pi * i / m;
        sum += std::exp(k * (w[0] * std::cos(phi) + w[1] * std::sin(phi)) - shift);
    }
    return sum * (2.0 * pi / m);
}

RadialKernel angular_reduce(int n, std::span<const double> displacement,
                            std::function<cplx(double)> radial_profile_product) {
    if (n < 1 || n > 3) throw UnsupportedDimension(n);
    if (static_cast<int>(displacement.size()) != n) throw InvalidArgument("displacement length does not match dimension");
    double r2 = 0.0;
    for (double d : displacement) r2 += d * d;
    const double r = std::sqrt(r2);
    RadialKernel ker;
    ker.oscillation = r;
    ker.evaluate = [n, r, prof = std::move(radial_profile_product)](double k) {
        return std::pow(k, n - 1) * plane_wave_angular(n, k * r) * prof(k);
    };
    return ker;
}

GaussRule gauss_legendre(int m, double a, double b) {
    if (m < 1) throw InvalidArgument("Gauss-Legendre order must be positive");
    GaussRule rule;
    rule.nodes.resize(m);
    rule.weights.resize(m);
    for (int i = 0; i < m; ++i) {
        double x = std::cos(pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= m; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            if (m == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = m * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int j = 2; j <= m; ++j) {
            const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
            p0 = p1;
            p1 = p2;
        }
        if (m == 1) p0 = 1.0, p1 = x;
        dp = m * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[m - 1 - i] = 0.5 * (b - a) * x + 0.5 * (b + a);
        rule.weights[m - 1 - i] = 0.5 * (b - a) * w;
    }
    return rule;
}

}  // namespace udw
