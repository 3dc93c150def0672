#pragma once

// Bases of the holomorphic sections of the n-th bundle power: monomials on
// the sphere, theta functions with rational characteristics on the torus.
// Pointwise evaluations carry the metric weight so matrix entries stay O(1)
// at any n; determinants are taken in log scale through column-pivoted QR.

#include "fekete/envelope.hpp"
#include "fekete/theta.hpp"

namespace fekete {

struct SectionBasis {
    ModelSurface surface = ModelSurface::sphere();
    int n = 0;         // tensor power
    int dimension = 0; // n + 1 on the sphere, n on the torus
    bool orthonormal = false;
    int resolution = 0; // quadrature used for the Gram factor
    // Acting basis = transform * raw basis; identity when not orthonormalized.
    Eigen::MatrixXcd transform;
    double log_abs_det_transform = 0.0;
};

class ConditioningError : public std::runtime_error {
public:
    ConditioningError(const std::string& what, double cond)
        : std::runtime_error(what), condition_(cond) {}
    double condition() const { return condition_; }

private:
    double condition_;
};

SectionBasis build_basis(const ModelSurface& surface, int n, bool orthonormalize,
                         int resolution = 512);

// Metric-weighted values of the raw basis at a point (before the transform).
Eigen::VectorXcd weighted_raw_values(const SectionBasis& basis, const SurfacePoint& x);

// Weighted values of the acting basis: transform * raw.
Eigen::VectorXcd weighted_section_values(const SectionBasis& basis, const SurfacePoint& x);

// Gram matrix of the acting basis w.r.t. L^2(omega, zero weight) by grid
// quadrature; orthonormalized bases return the identity up to quadrature.
Eigen::MatrixXcd reference_gram(const SectionBasis& basis, int resolution);

// log of |det S(x_1..x_N)|_h e^{-n sum phi(x_l)}; -inf sentinel on repeated
// points or numerically singular evaluation matrices.
ExtReal log_det_norm(const SectionBasis& basis, const Configuration& config,
                     const WeightField& phi);

struct DetEvaluation {
    ExtReal log_abs_det;       // log |det|_h with the weight folded in
    double green_sum = 0.0;    // sum of G over ordered pairs
    double theta_factor = 0.0; // 2 log theta_norm at the configuration class
};

DetEvaluation det_norm(const SectionBasis& basis, const GreenKernel& kernel,
                       const ThetaContext* ctx, const Configuration& config,
                       const WeightField& phi);

struct BosonizationReport {
    std::vector<double> log_ratios; // per configuration; excluded entries NaN
    std::vector<int> excluded;      // near-divisor configurations
    double spread = 0.0;            // max - min over included
    double center = 0.0;            // mean over included (measured log Z_n)
};

// Constancy of 2 log|det|_h - sum G - 2 log theta_norm across configurations.
BosonizationReport bosonization_check(const SectionBasis& basis, const GreenKernel& kernel,
                                      const ThetaContext* ctx,
                                      const std::vector<Configuration>& configs);

struct FeketeOptions {
    int restarts = 4;
    std::uint64_t seed = 1;
    double initial_step = 0.1;
    double min_step = 1e-6;
    int max_rounds = 60;
};

struct FeketeResult {
    Configuration config;
    double log_value = 0.0;              // maximized log det norm
    double stationarity_residual = 0.0;  // best improvement seen by the final polish
    int restarts_used = 0;
};

// Multistart coordinate ascent of the weighted determinant over K^N.
FeketeResult fekete_configuration(const SectionBasis& basis, const GreenKernel& kernel,
                                  const WeightedSet& ws, const FeketeOptions& opts = {});

struct TransferReport {
    double max_rel_gap = 0.0;     // between the two sup norms
    double max_attain_dist = 0.0; // distance from the argmax to the contact set
};

// For random sections, the sup of |s| e^{-n phi} over K equals the sup of
// |s| e^{-n U} over the whole surface, U the envelope of the weighted set.
TransferReport sup_norm_transfer_check(const SectionBasis& basis,
                                       const WeightedSet& ws, const EnvelopeSolution& sol,
                                       int samples, std::uint64_t seed = 11);

} // namespace fekete
