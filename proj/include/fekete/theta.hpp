#pragma once

// Genus-one theta machinery: the Riemann theta section and its lattice-
// periodic norm, the Abel-Jacobi map of the torus, and the shift aligning
// the theta divisor with the vanishing locus of section determinants. The
// shift is calibrated numerically by root matching against determinants and
// cached in the context.

#include "fekete/potentials.hpp"

namespace fekete {

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ThetaContext {
    ModelSurface surface = ModelSurface::torus(Complex(0.0, 1.0));
    SurfacePoint basepoint;    // reference point of the Abel-Jacobi map
    SurfacePoint bundle_point; // degree-one bundle is the class of this point
    Complex riemann_shift{0.0, 0.0};
    bool calibrated = false;

    Complex tau() const { return surface.tau(); }
};

ThetaContext make_theta_context(const ModelSurface& torus,
                                const SurfacePoint& basepoint = SurfacePoint{});

// Entire theta evaluation and its lattice-periodic norm.
Complex theta_value(const ThetaContext& ctx, Complex z);
double theta_norm(const ThetaContext& ctx, Complex z);

// Abel-Jacobi image of a point (difference to the basepoint, mod lattice)
// and of a tuple (coordinate sum, mod lattice).
Complex abel_jacobi(const ThetaContext& ctx, const SurfacePoint& p);
Complex abel_jacobi_sum(const ThetaContext& ctx, const std::vector<SurfacePoint>& pts);

// Distance on the Jacobian torus (for mod-lattice comparisons).
double jacobian_distance(const ThetaContext& ctx, Complex a, Complex b);

// Calibrates the shift z_star from the vanishing of degree-n section
// determinants and caches it in the context; returns z_star. Throws
// CalibrationError if probe configurations disagree.
Complex riemann_constant(ThetaContext& ctx, int n, std::uint64_t seed = 2024);

// Theta-norm squared of a configuration: the theta section evaluated at the
// bundle class minus the Abel-Jacobi sum minus the calibrated shift.
double theta_section_norm_sq(const ThetaContext& ctx, const std::vector<SurfacePoint>& pts);

} // namespace fekete
