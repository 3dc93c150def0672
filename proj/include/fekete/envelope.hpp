#pragma once

// Extremal functions: the largest area-form-subharmonic function dominated
// by the weight on K, solved as a discrete complementarity problem by
// projected SOR. The equilibrium measure is the curvature of the solution,
// and the minimal weighted energy comes with it.

#include "fekete/potentials.hpp"

namespace fekete {

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct EnvelopeSolution {
    GridPtr grid;
    Eigen::ArrayXd U;                             // envelope on the quadrature grid
    Eigen::Array<bool, Eigen::Dynamic, 1> contact; // {U = phi} within K
    Measure nu;                                   // equilibrium measure (grid density)
    double min_energy = 0.0;                      // I_phi(nu)
    int sweeps = 0;
    double final_update = 0.0;
};

struct EnvelopeOptions {
    double tol = 1e-8;
    int max_sweeps = 100000;
    double relaxation = 1.8;
};

EnvelopeSolution extremal_function(const GreenKernel& kernel, const WeightedSet& ws,
                                   int resolution, const EnvelopeOptions& opts = {});

// I_phi of the solved equilibrium measure, via the envelope itself (the
// mean-normalized potential of nu is U shifted to zero mean).
double min_energy_of(const GreenKernel& kernel, const EnvelopeSolution& sol,
                     const WeightedSet& ws);

struct SolminReport {
    double contact_residual = 0.0; // on supp(nu)
    double global_residual = 0.0;  // everywhere
};

// Checks the equilibrium identities with the potential of nu recomputed
// through the Green pairing, independent of the solver's own field.
SolminReport verify_solmin(const GreenKernel& kernel, const EnvelopeSolution& sol,
                           const WeightedSet& ws);

// Region with all disc radii pushed outward by delta (a metric-neighborhood
// enlargement for the region kinds in use).
Region dilate_region(const Region& region, double delta);

} // namespace fekete
