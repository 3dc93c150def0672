#pragma once

// Independent numerical oracles used only by the test suites. These follow
// different computational routes than the library code they check.

#include <cmath>
#include <complex>

#include "fekete/numerics.hpp"
#include "fekete/special.hpp"
#include "fekete/surface.hpp"

namespace fekete::oracles {

// Torus Green function by screened lattice summation: short-range E_1 images
// plus a Gaussian-damped Fourier tail. Zero-mean by construction; shares no
// code path with the theta-series evaluation in the library.
inline double ewald_torus_green(const ModelSurface& torus, Complex u) {
    const Complex tau = torus.tau();
    const double A = tau.imag();
    double lmin = 1e300;
    for (int m = -1; m <= 1; ++m)
        for (int n = -1; n <= 1; ++n)
            if (m != 0 || n != 0)
                lmin = std::min(lmin, std::abs(static_cast<double>(m) + static_cast<double>(n) * tau));
    const double eta2 = 9.0 / (lmin * lmin);

    const Complex uc = torus.shortest_representative(u);
    KahanSum s;
    for (int m = -3; m <= 3; ++m)
        for (int n = -3; n <= 3; ++n) {
            const Complex w = uc + static_cast<double>(m) + static_cast<double>(n) * tau;
            const double arg = eta2 * std::norm(w);
            if (arg > 50.0) continue;
            s.add(-0.5 * expint_e1(arg));
        }

    const auto ab = torus.lattice_coords(uc);
    for (int m = -48; m <= 48; ++m)
        for (int n = -48; n <= 48; ++n) {
            if (m == 0 && n == 0) continue;
            const Complex w = static_cast<double>(n) - static_cast<double>(m) * std::conj(tau);
            const double k2 = 4.0 * kPi * kPi * std::norm(w) / (A * A);
            const double damp = std::exp(-k2 / (4.0 * eta2));
            if (damp < 1e-18) continue;
            s.add(-(kTwoPi / A) * damp * std::cos(kTwoPi * (m * ab[0] + n * ab[1])) / k2);
        }

    s.add(kPi / (2.0 * A * eta2));
    return s.value();
}

} // namespace fekete::oracles
