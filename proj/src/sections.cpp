#include "fekete/sections.hpp"

#include <random>

#include "fekete/special.hpp"

namespace fekete {

namespace {

Eigen::VectorXcd raw_values_sphere(int n, const SurfacePoint& x) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n + 1);
    if (x.at_infinity) {
        v[n] = 1.0;
        return v;
    }
    const double f = std::exp(-0.5 * n * std::log1p(std::norm(x.z)));
    Complex acc(f, 0.0);
    for (int j = 0; j <= n; ++j) {
        v[j] = acc;
        acc *= x.z;
    }
    return v;
}

Eigen::VectorXcd raw_values_torus(int n, Complex tau, const SurfacePoint& x) {
    Eigen::VectorXcd v(n);
    for (int j = 0; j < n; ++j)
        v[j] = theta_char_weighted(static_cast<double>(j) / n, x.z, n, tau);
    return v;
}

// Pulls a candidate back into the region along the radial direction of the
// violated disc; identity when already inside.
SurfacePoint project_into_region(const ModelSurface& surface, const Region& region,
                                 const SurfacePoint& x) {
    if (region.contains(surface, x)) return x;
    if (region.kind == Region::Kind::UnionOfDiscs) {
        // move to the boundary of the nearest disc
        double best = 1e300;
        SurfacePoint out = x;
        for (std::size_t i = 0; i < region.centers.size(); ++i) {
            const double d = surface.distance(region.centers[i], x);
            const double gap = d - region.radii[i];
            if (gap < best) {
                best = gap;
                if (surface.is_torus()) {
                    const Complex dir =
                        surface.shortest_representative(x.z - region.centers[i].z);
                    const double chart_r = region.radii[i] * std::sqrt(surface.tau().imag());
                    out = surface.point(region.centers[i].z +
                                        dir * (chart_r / std::abs(dir)) * 0.999);
                } else {
                    const auto ring =
                        circle_points(surface, region.centers[i], region.radii[i] * 0.999, 64);
                    double dd = 1e300;
                    for (const auto& q : ring) {
                        const double dq = surface.distance(q, x);
                        if (dq < dd) {
                            dd = dq;
                            out = q;
                        }
                    }
                }
            }
        }
        return out;
    }
    // complement of discs: push out of the disc that swallowed the point
    for (std::size_t i = 0; i < region.centers.size(); ++i) {
        if (surface.distance(region.centers[i], x) < region.radii[i]) {
            if (surface.is_torus()) {
                Complex dir = surface.shortest_representative(x.z - region.centers[i].z);
                if (std::abs(dir) < 1e-12) dir = Complex(1.0, 0.0);
                const double chart_r = region.radii[i] * std::sqrt(surface.tau().imag());
                return surface.point(region.centers[i].z + dir * (chart_r / std::abs(dir)) * 1.001);
            }
            const auto ring =
                circle_points(surface, region.centers[i], region.radii[i] * 1.001, 64);
            double dd = 1e300;
            SurfacePoint out = x;
            for (const auto& q : ring) {
                const double dq = surface.distance(q, x);
                if (dq < dd) {
                    dd = dq;
                    out = q;
                }
            }
            return out;
        }
    }
    return x;
}

SurfacePoint random_point_in_region(const ModelSurface& surface, const Region& region,
                                    std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int attempt = 0; attempt < 4096; ++attempt) {
        SurfacePoint p;
        if (surface.is_torus()) {
            const Complex tau = surface.tau();
            p = surface.point(Complex(u01(rng) + u01(rng) * tau.real(), u01(rng) * tau.imag()));
        } else {
            const double zc = 2.0 * u01(rng) - 1.0;
            const double ph = kTwoPi * u01(rng);
            const double r = std::tan(0.5 * std::acos(zc));
            p = SurfacePoint{Complex(r * std::cos(ph), r * std::sin(ph)), false};
        }
        if (region.contains(surface, p)) return p;
    }
    throw std::runtime_error("random_point_in_region: region too small to sample");
}

// Neighbor proposals of a point at a chart step size.
std::vector<SurfacePoint> stencil_moves(const ModelSurface& surface, const SurfacePoint& x,
                                        double step) {
    static const std::array<Complex, 8> dirs = {
        Complex(1, 0),  Complex(-1, 0), Complex(0, 1),  Complex(0, -1),
        Complex(1, 1),  Complex(1, -1), Complex(-1, 1), Complex(-1, -1)};
    std::vector<SurfacePoint> out;
    out.reserve(8);
    if (surface.is_torus() || (!x.at_infinity && std::abs(x.z) <= 1.0)) {
        for (const auto& d : dirs) {
            if (surface.is_torus())
                out.push_back(surface.point(x.z + step * d));
            else
                out.push_back(SurfacePoint{x.z + step * d, false});
        }
    } else {
        // northern chart: move in the reciprocal coordinate
        const Complex w = x.at_infinity ? Complex(0, 0) : 1.0 / x.z;
        for (const auto& d : dirs) {
            const Complex wn = w + step * d;
            if (std::abs(wn) < 1e-12)
                out.push_back(SurfacePoint{Complex(0, 0), true});
            else
                out.push_back(SurfacePoint{1.0 / wn, false});
        }
    }
    return out;
}

} // namespace

SectionBasis build_basis(const ModelSurface& surface, int n, bool orthonormalize,
                         int resolution) {
    if (surface.is_torus() && n < 1)
        throw std::invalid_argument("build_basis: torus needs n >= 1");
    if (surface.is_sphere() && n < 0)
        throw std::invalid_argument("build_basis: sphere needs n >= 0");

    SectionBasis basis;
    basis.surface = surface;
    basis.n = n;
    basis.dimension = surface.is_sphere() ? n + 1 : n;
    basis.resolution = resolution;
    basis.transform = Eigen::MatrixXcd::Identity(basis.dimension, basis.dimension);
    basis.log_abs_det_transform = 0.0;
    if (!orthonormalize) return basis;

    const auto grid = make_grid(surface, resolution);
    const int N = basis.dimension;
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(N, N);
    for (int k = 0; k < grid->size(); ++k) {
        const Eigen::VectorXcd v = weighted_raw_values(basis, grid->nodes[k]);
        gram.noalias() += grid->weights[k] * (v * v.adjoint());
    }
    Eigen::LLT<Eigen::MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success) {
        const double cond =
            gram.diagonal().real().maxCoeff() / std::max(1e-300, gram.diagonal().real().minCoeff());
        throw ConditioningError("build_basis: Gram factorization failed", cond);
    }
    Eigen::MatrixXcd L = llt.matrixL();
    basis.transform = L.triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXcd::Identity(N, N));
    basis.orthonormal = true;
    double logdet = 0.0;
    for (int j = 0; j < N; ++j) logdet -= std::log(L(j, j).real());
    basis.log_abs_det_transform = logdet;
    return basis;
}

Eigen::VectorXcd weighted_raw_values(const SectionBasis& basis, const SurfacePoint& x) {
    if (basis.surface.is_sphere()) return raw_values_sphere(basis.n, x);
    return raw_values_torus(basis.n, basis.surface.tau(), x);
}

Eigen::VectorXcd weighted_section_values(const SectionBasis& basis, const SurfacePoint& x) {
    return basis.transform * weighted_raw_values(basis, x);
}

Eigen::MatrixXcd reference_gram(const SectionBasis& basis, int resolution) {
    const auto grid = make_grid(basis.surface, resolution);
    const int N = basis.dimension;
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(N, N);
    for (int k = 0; k < grid->size(); ++k) {
        const Eigen::VectorXcd v = weighted_section_values(basis, grid->nodes[k]);
        gram.noalias() += grid->weights[k] * (v * v.adjoint());
    }
    return gram;
}

ExtReal log_det_norm(const SectionBasis& basis, const Configuration& config,
                     const WeightField& phi) {
    const int N = basis.dimension;
    if (config.size() != N)
        throw std::invalid_argument("log_det_norm: configuration size must match the dimension");
    const auto& surface = basis.surface;
    for (int j = 0; j < N; ++j)
        for (int k = j + 1; k < N; ++k)
            if (surface.distance(config.points[j], config.points[k]) < kCollisionTol)
                return ExtReal::neg_inf();

    Eigen::MatrixXcd M(N, N);
    for (int l = 0; l < N; ++l) M.row(l) = weighted_section_values(basis, config.points[l]);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(M);
    if (qr.rank() < N) return ExtReal::neg_inf();
    double logdet = qr.logAbsDeterminant();

    KahanSum wsum;
    for (const auto& p : config.points) wsum.add(phi(surface, p));
    logdet -= static_cast<double>(basis.n) * wsum.value();
    if (!std::isfinite(logdet)) return ExtReal::neg_inf();
    return ExtReal(logdet);
}

DetEvaluation det_norm(const SectionBasis& basis, const GreenKernel& kernel,
                       const ThetaContext* ctx, const Configuration& config,
                       const WeightField& phi) {
    DetEvaluation ev;
    ev.log_abs_det = log_det_norm(basis, config, phi);
    KahanSum g;
    bool collided = false;
    for (int j = 0; j < config.size(); ++j)
        for (int k = j + 1; k < config.size(); ++k) {
            if (kernel.surface().distance(config.points[j], config.points[k]) < kCollisionTol) {
                collided = true;
            } else {
                g.add(kernel(config.points[j], config.points[k]));
            }
        }
    ev.green_sum = collided ? -1e300 : 2.0 * g.value();
    if (ctx != nullptr) {
        const double nsq = theta_section_norm_sq(*ctx, config.points);
        ev.theta_factor = std::log(std::max(nsq, 1e-300));
    }
    return ev;
}

BosonizationReport bosonization_check(const SectionBasis& basis, const GreenKernel& kernel,
                                      const ThetaContext* ctx,
                                      const std::vector<Configuration>& configs) {
    BosonizationReport rep;
    rep.log_ratios.reserve(configs.size());
    const WeightField no_weight = WeightField::zero();
    double lo = 1e300, hi = -1e300;
    KahanSum mean;
    int included = 0;
    for (std::size_t c = 0; c < configs.size(); ++c) {
        const auto ev = det_norm(basis, kernel, ctx, configs[c], no_weight);
        if (!ev.log_abs_det.finite()) {
            rep.log_ratios.push_back(std::numeric_limits<double>::quiet_NaN());
            rep.excluded.push_back(static_cast<int>(c));
            continue;
        }
        if (ctx != nullptr) {
            const double norm_sq = std::exp(ev.theta_factor);
            if (std::sqrt(norm_sq) < 1e-10) {
                rep.log_ratios.push_back(std::numeric_limits<double>::quiet_NaN());
                rep.excluded.push_back(static_cast<int>(c));
                continue;
            }
        }
        const double ratio = 2.0 * ev.log_abs_det.value() - ev.green_sum - ev.theta_factor;
        rep.log_ratios.push_back(ratio);
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        mean.add(ratio);
        ++included;
    }
    if (included > 0) {
        rep.spread = hi - lo;
        rep.center = mean.value() / included;
    }
    return rep;
}

FeketeResult fekete_configuration(const SectionBasis& basis, const GreenKernel& kernel,
                                  const WeightedSet& ws, const FeketeOptions& opts) {
    (void)kernel;
    const auto& surface = basis.surface;
    const int N = basis.dimension;

    FeketeResult best;
    bool have_best = false;

    for (int restart = 0; restart < opts.restarts; ++restart) {
        std::mt19937_64 rng(derive_seed(opts.seed, static_cast<std::uint64_t>(restart)));
        Configuration cfg;
        cfg.region = ws.region;
        if (restart == 0 && ws.region.kind == Region::Kind::FullSurface) {
            // structured start: lattice on the torus, spiral on the sphere
            if (surface.is_torus()) {
                const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(N))));
                const Complex tau = surface.tau();
                for (int k = 0; k < N; ++k) {
                    const double a = ((k % side) + 0.5) / side;
                    const double b = ((k / side) + 0.37) / side;
                    cfg.points.push_back(surface.point(a + b * tau));
                }
            } else {
                const double golden = kPi * (3.0 - std::sqrt(5.0));
                for (int k = 0; k < N; ++k) {
                    const double zc = 1.0 - 2.0 * (k + 0.5) / N;
                    const double ph = golden * k;
                    const double r = std::tan(0.5 * std::acos(zc));
                    cfg.points.push_back(
                        SurfacePoint{Complex(r * std::cos(ph), r * std::sin(ph)), false});
                }
            }
        } else {
            for (int k = 0; k < N; ++k)
                cfg.points.push_back(random_point_in_region(surface, ws.region, rng));
        }

        ExtReal value = log_det_norm(basis, cfg, ws.phi);
        if (!value.finite()) {
            // nudge collisions apart
            for (int k = 0; k < N; ++k)
                cfg.points[k] = project_into_region(
                    surface, ws.region,
                    surface.is_torus()
                        ? surface.point(cfg.points[k].z + Complex(1e-4 * k, 1e-4))
                        : SurfacePoint{cfg.points[k].z + Complex(1e-4 * k, 1e-4), false});
            value = log_det_norm(basis, cfg, ws.phi);
        }

        double step = opts.initial_step;
        double last_gain = 0.0;
        for (int round = 0; round < opts.max_rounds && step >= opts.min_step; ++round) {
            bool improved = false;
            last_gain = 0.0;
            for (int l = 0; l < N; ++l) {
                Configuration trial = cfg;
                ExtReal local_best = value;
                SurfacePoint local_point = cfg.points[l];
                for (const auto& cand : stencil_moves(surface, cfg.points[l], step)) {
                    trial.points[l] = project_into_region(surface, ws.region, cand);
                    const ExtReal v = log_det_norm(basis, trial, ws.phi);
                    if (local_best < v) {
                        local_best = v;
                        local_point = trial.points[l];
                    }
                }
                if (value < local_best) {
                    last_gain = std::max(last_gain, local_best.value() - value.value_or(-1e300));
                    cfg.points[l] = local_point;
                    value = local_best;
                    improved = true;
                }
            }
            if (!improved) step *= 0.5;
        }

        if (value.finite() && (!have_best || best.log_value < value.value())) {
            best.config = cfg;
            best.log_value = value.value();
            best.stationarity_residual = last_gain;
            best.restarts_used = restart + 1;
            have_best = true;
        }
    }
    if (!have_best)
        throw std::runtime_error("fekete_configuration: no feasible configuration found");
    best.restarts_used = opts.restarts;
    return best;
}

TransferReport sup_norm_transfer_check(const SectionBasis& basis, const WeightedSet& ws,
                                       const EnvelopeSolution& sol, int samples,
                                       std::uint64_t seed) {
    const auto& grid = *sol.grid;
    const auto& surface = basis.surface;
    const int N = basis.dimension;
    const auto mask = ws.region.mask(grid);
    const Eigen::ArrayXd phi = ws.phi.sample(grid);

    // cache the weighted section values over the grid
    Eigen::MatrixXcd V(grid.size(), N);
    for (int k = 0; k < grid.size(); ++k)
        V.row(k) = weighted_section_values(basis, grid.nodes[k]);

    std::vector<int> contact_nodes;
    for (int k = 0; k < grid.size(); ++k)
        if (sol.contact[k]) contact_nodes.push_back(k);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    TransferReport rep;
    for (int s = 0; s < samples; ++s) {
        Eigen::VectorXcd coeff(N);
        for (int j = 0; j < N; ++j) coeff[j] = Complex(gauss(rng), gauss(rng));
        const Eigen::ArrayXd amp = (V * coeff).array().abs();

        double sup_k = 0.0, sup_x = 0.0;
        int arg_x = 0;
        for (int k = 0; k < grid.size(); ++k) {
            const double vx = amp[k] * std::exp(-basis.n * sol.U[k]);
            if (vx > sup_x) {
                sup_x = vx;
                arg_x = k;
            }
            if (mask[k]) sup_k = std::max(sup_k, amp[k] * std::exp(-basis.n * phi[k]));
        }
        rep.max_rel_gap =
            std::max(rep.max_rel_gap, std::abs(sup_k - sup_x) / std::max(sup_k, sup_x));
        double dist = 1e300;
        for (int k : contact_nodes)
            dist = std::min(dist, surface.distance(grid.nodes[arg_x], grid.nodes[k]));
        rep.max_attain_dist = std::max(rep.max_attain_dist, dist);
    }
    return rep;
}

} // namespace fekete
