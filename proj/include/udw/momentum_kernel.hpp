#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "udw/quadrature.hpp"

namespace udw {

enum class SmearingFamily { pointlike, gaussian, tophat };

// Real, isotropic spatial profile normalised to unit integral.
struct SmearingProfile {
    SmearingFamily family = SmearingFamily::pointlike;
    double width = 0.0;  // sigma for gaussian, radius for tophat

    static SmearingProfile pointlike() { return {}; }
    static SmearingProfile gaussian(double sigma) { return {SmearingFamily::gaussian, sigma}; }
    static SmearingProfile tophat(double radius) { return {SmearingFamily::tophat, radius}; }

    void validate() const;
    // Wavenumber beyond which the transform has decayed (0 for pointlike).
    double envelope_scale() const;
};

enum class DetectorLabel { A, B };

struct DetectorParams {
    DetectorLabel label = DetectorLabel::A;
    double coupling = 0.0;       // lambda
    double switch_weight = 1.0;  // eta
    double switch_time = 0.0;    // t
    double gap = 0.0;            // Omega; never enters tilde-basis quantities
    std::vector<double> position;
    SmearingProfile smearing;

    void validate(int n) const;
};

// alpha(k) = peak * e^{i phase} * exp(-|k - center|^2 / (2 spread^2)) * e^{-i k.offset}
// The offset is the packet's position-space centre; empty means the origin.
struct GaussianPacket {
    double peak = 1.0;
    std::vector<double> center;
    double spread = 1.0;
    double phase = 0.0;
    std::vector<double> offset;

    void validate(int n) const;
    cplx evaluate(std::span<const double> k) const;
};

struct CoherentAmplitude {
    enum class Family { vacuum, gaussian_packet, superposition };
    Family family = Family::vacuum;
    std::vector<GaussianPacket> packets;

    static CoherentAmplitude vacuum() { return {}; }
    static CoherentAmplitude packet(GaussianPacket p) { return {Family::gaussian_packet, {std::move(p)}}; }
    static CoherentAmplitude superposition(std::vector<GaussianPacket> ps) {
        return {Family::superposition, std::move(ps)};
    }

    bool is_vacuum() const { return family == Family::vacuum || packets.empty(); }
    void validate(int n) const;
    cplx evaluate(std::span<const double> k) const;
};

struct Estimate {
    double value = 0.0;
    double error = 0.0;
};

struct ComplexEstimate {
    cplx value{};
    double error = 0.0;
};

struct KernelFunctionals {
    bool pair = false;
    double I_A = 0.0, I_B = 0.0;
    double f_A = 1.0, f_B = 1.0;
    double theta = 0.0, omega = 0.0;
    double C_A = 0.0, C_B = 0.0;

    // B is switched before A; assembly then applies the A-after-B product.
    bool b_first = false;
    bool coincident_times = false;
    bool f_flushed = false;  // some f fell below 1e-300 and was set to 0

    struct {
        double I_A = 0.0, I_B = 0.0, Z = 0.0, C_A = 0.0, C_B = 0.0;
    } error;

    static KernelFunctionals single(double I_A, double C_A);
    // Z is the cross overlap integral of conj(beta_A) beta_B.
    static KernelFunctionals pair_from(double I_A, double I_B, cplx Z, double C_A, double C_B,
                                       bool b_first = false);
};

// exp(-I/2) with the underflow flush applied.
double vacuum_overlap(double I, bool* flushed = nullptr);

double fourier_smearing(const SmearingProfile& profile, int n, double k);

cplx beta(const DetectorParams& det, std::span<const double> k_vec);

Estimate self_overlap(const DetectorParams& det, int n, const QuadratureConfig& cfg);
ComplexEstimate cross_overlap(const DetectorParams& a, const DetectorParams& b, int n,
                              const QuadratureConfig& cfg);
Estimate coherent_shift(const DetectorParams& det, const CoherentAmplitude& alpha, int n,
                        const QuadratureConfig& cfg);

KernelFunctionals kernel_functionals(const DetectorParams& a, const std::optional<DetectorParams>& b,
                                     const CoherentAmplitude& alpha, int n, const QuadratureConfig& cfg);

}  // namespace udw
