#pragma once

// Closed-form Green kernels G(x, y) of the model surfaces, normalized to
// zero area-form mean: integral of G(x, .) against the area form vanishes
// and dd^c G(x, .) = delta_x - omega.
//
//   sphere: G = log sin(Theta/2) + c0           (Theta = central angle)
//   torus:  G = log|theta1(x - y; tau)| - pi Im(x-y)^2 / Im(tau) + c0(tau)
//
// c0 is produced by quadrature of the kernel with its singular part
// subtracted analytically, cached per (surface, resolution).

#include <optional>

#include "fekete/surface.hpp"

namespace fekete {

struct VerifyGreenReport {
    double mean_residual = 0.0;      // |integral of G(x,.) against omega|
    double laplacian_residual = 0.0; // max |dd^c G + omega| in omega units, off the pole
    double lipschitz_bound = 0.0;    // max sampled difference quotient of G - log dist
};

class GreenKernel {
public:
    explicit GreenKernel(const ModelSurface& surface, int constant_resolution = 512);

    const ModelSurface& surface() const { return surface_; }
    double normalization() const { return c0_; }
    int constant_resolution() const { return constant_resolution_; }

    // G(x, y); throws std::domain_error on coincident points. Collision
    // semantics (-inf) belong to the energy level, not the kernel.
    double operator()(const SurfacePoint& x, const SurfacePoint& y) const;

    // G(x, y) - log dist(x, y), extended continuously to the diagonal.
    double smooth_remainder(const SurfacePoint& x, const SurfacePoint& y) const;
    double smooth_remainder_diagonal() const;

    // Fourier coefficient of G on the torus w.r.t. exp(2 pi i (m a + n b)),
    // (a, b) the lattice coordinates. Vanishes at (0, 0).
    double torus_fourier_coefficient(int m, int n) const;

    // Screened singular template T_x with analytically known mean and
    // Laplacian; G - T_x is smooth, which is what makes grid verification
    // of the kernel contract possible at tight tolerances.
    double screened_template(const SurfacePoint& x, const SurfacePoint& y) const;
    double screened_template_mean() const;
    // dd^c T_x density in omega units (away from the pole it is smooth).
    double screened_template_ddc(const SurfacePoint& x, const SurfacePoint& y) const;

    VerifyGreenReport verify(const SurfacePoint& x, int resolution,
                             double pole_guard = 1e-9) const;

private:
    ModelSurface surface_;
    int constant_resolution_;
    double c0_ = 0.0;
    double eta2_ = 0.0; // torus screening scale

    double kernel_core(const SurfacePoint& x, const SurfacePoint& y) const;
};

// The mean-enforcing constant c0 on its own; base-point overload feeds the
// translation-invariance checks.
double green_normalization(const ModelSurface& surface, int resolution);
double green_normalization(const ModelSurface& surface, int resolution,
                           const SurfacePoint& base);

} // namespace fekete
