#pragma once

// Mean-normalized potentials of measures, the weighted energy functional,
// the discrete pair energies over point configurations, and circle sweeps
// (balayage of a point mass onto a small metric circle).

#include "fekete/green.hpp"

namespace fekete {

// Ordered tuple of surface points constrained to a region.
struct Configuration {
    std::vector<SurfacePoint> points;
    Region region = Region::full();

    int size() const { return static_cast<int>(points.size()); }
    void validate(const ModelSurface& surface) const {
        for (const auto& p : points)
            if (!region.contains(surface, p))
                throw std::invalid_argument("Configuration: point outside the region");
    }
};

enum class PotentialNormalization { MeanZero, MaxZero };

struct Potential {
    GridPtr grid;
    Eigen::ArrayXd values;
    PotentialNormalization normalization = PotentialNormalization::MeanZero;
};

// U_nu at a single point; -inf sentinel when nu has an atom at x.
ExtReal potential_of_measure(const GreenKernel& kernel, const Measure& nu,
                             const SurfacePoint& x);

// U_nu on a whole grid. Grid densities on the torus go through the spectral
// route (analytic Fourier coefficients of G); everything else is summed
// directly. MeanZero comes out of the kernel normalization; MaxZero shifts
// the field so its maximum is exactly zero.
Potential potential_field(const GreenKernel& kernel, const Measure& nu, GridPtr grid,
                          PotentialNormalization norm = PotentialNormalization::MeanZero);

// Green bilinear pairing of two grid densities on a shared grid.
double density_pairing(const GreenKernel& kernel, const Measure& a, const Measure& b);

// I_phi(nu) = -int U_nu dnu + 2 int phi dnu; +inf sentinel on atomic nu.
ExtReal energy_I(const GreenKernel& kernel, const Measure& nu, const WeightField& phi);

// Discrete pair energy: average of G over ordered pairs, -inf on collisions.
ExtReal discrete_energy(const GreenKernel& kernel, const Configuration& config);

// J = -E_m + 2 int phi ddelta_p  and  K = -(m/(m-1)) E_m + 2 int phi ddelta_p.
ExtReal functional_J(const GreenKernel& kernel, const Configuration& config,
                     const WeightField& phi);
ExtReal functional_Km(const GreenKernel& kernel, const Configuration& config,
                      const WeightField& phi);

double mean_weight(const ModelSurface& surface, const WeightField& phi,
                   const Configuration& config);

// Unit mass swept from a point onto the boundary circle of B(p, r).
struct CircleSweep {
    SurfacePoint center;
    double radius = 0.0; // metric radius
    std::vector<SurfacePoint> nodes;
    Eigen::ArrayXd weights; // sum 1

    Measure as_measure() const {
        return Measure::atoms(nodes, weights);
    }
};

// Nodes of the metric circle of radius r around p, chart-uniform in angle.
std::vector<SurfacePoint> circle_points(const ModelSurface& surface, const SurfacePoint& p,
                                        double r, int count);

CircleSweep sweep_to_circle(const GreenKernel& kernel, const SurfacePoint& p, double r,
                            int circle_nodes = 256);

// Potential of a sweep at a point off its support.
double sweep_potential(const GreenKernel& kernel, const CircleSweep& sweep,
                       const SurfacePoint& x);

// Self and cross Green pairings of sweeps. The self pairing regularizes the
// diagonal with the exact uniform-circle rule, so uniform densities come out
// exact up to the smooth remainder quadrature.
double sweep_self_energy(const GreenKernel& kernel, const CircleSweep& sweep);
double sweep_cross_energy(const GreenKernel& kernel, const CircleSweep& a,
                          const CircleSweep& b);

} // namespace fekete
