#pragma once

#include <random>

#include "udw/momentum_kernel.hpp"

namespace udw {

struct PairScenario {
    int n = 3;
    DetectorParams a, b;
    CoherentAmplitude alpha;
    QuadratureConfig cfg;
};

// Functionals of two finite-mode coherent displacements with random
// amplitudes; physical by construction (Cauchy-Schwarz holds exactly).
// I_A and I_B are spread log-uniformly over [1e-4, max_I].
KernelFunctionals random_functionals(std::mt19937_64& rng, double max_I = 50.0);

// A random coherent amplitude with 1 to 3 packets (never vacuum).
CoherentAmplitude random_amplitude(std::mt19937_64& rng, int n);

// A random detector pair in n in {1, 2, 3} with couplings tuned so that each
// I_nu is log-uniform in [1e-4, max_I]. Smearings are gaussian, or pointlike
// with a UV cutoff; n = 1 always carries an IR cutoff.
PairScenario random_pair_scenario(std::mt19937_64& rng, double max_I = 50.0);

}  // namespace udw
