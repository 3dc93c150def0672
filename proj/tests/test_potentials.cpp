#include "doctest.h"

#include <algorithm>
#include <random>

#include "fekete/potentials.hpp"
#include "oracles.hpp"

using namespace fekete;

namespace {

ModelSurface square_torus() { return ModelSurface::torus(Complex(0.0, 1.0)); }

const GreenKernel& torus_kernel() {
    static const GreenKernel gk(square_torus(), 512);
    return gk;
}

SurfacePoint random_torus_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    return square_torus().point(Complex(u01(rng), u01(rng)));
}

Eigen::ArrayXd smooth_density(const Grid& grid, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> amp(-0.45, 0.45), phase(0.0, kTwoPi);
    std::uniform_int_distribution<int> freq(1, 3);
    const double a1 = amp(rng), a2 = amp(rng), p1 = phase(rng), p2 = phase(rng);
    const int k1 = freq(rng), k2 = freq(rng);
    Eigen::ArrayXd d(grid.size());
    for (int k = 0; k < grid.size(); ++k) {
        auto ab = grid.surface.lattice_coords(grid.nodes[k].z);
        d[k] = 1.0 + a1 * std::cos(kTwoPi * k1 * ab[0] + p1) +
               a2 * std::sin(kTwoPi * k2 * ab[1] + p2);
    }
    d /= (grid.weights * d).sum();
    return d;
}

// Dirichlet solve of dd^c V = -omega on the chart disc of radius rho with
// V = G(p, .) on the boundary; the swept density is the normal-derivative
// jump across the circle. Polar finite differences, plain SOR.
Eigen::ArrayXd polar_sweep_density_oracle(const GreenKernel& gk, const SurfacePoint& p,
                                          double rho, int n_s, int n_th) {
    const auto& torus = gk.surface();
    const double ds = rho / n_s;
    const double dth = kTwoPi / n_th;
    const double rhs = -kTwoPi / torus.tau().imag(); // chart Laplacian of V
    Eigen::ArrayXXd V = Eigen::ArrayXXd::Zero(n_s + 1, n_th);
    for (int j = 0; j < n_th; ++j) {
        const double th = j * dth;
        V(n_s, j) = gk(p, torus.point(p.z + rho * Complex(std::cos(th), std::sin(th))));
    }
    double center = V.row(n_s).mean() - 0.25 * rhs * rho * rho; // init
    for (int it = 0; it < 20000; ++it) {
        double delta = 0.0;
        for (int i = 1; i < n_s; ++i) {
            const double s = i * ds;
            for (int j = 0; j < n_th; ++j) {
                const double vm = (i == 1) ? center : V(i - 1, j);
                const double lap_coeff = 2.0 / (ds * ds) + 2.0 / (s * s * dth * dth);
                const double rest = (V(i + 1, j) + vm) / (ds * ds) +
                                    (V(i + 1, j) - vm) / (2.0 * s * ds) +
                                    (V(i, (j + 1) % n_th) + V(i, (j + n_th - 1) % n_th)) /
                                        (s * s * dth * dth);
                const double next = (rest - rhs) / lap_coeff;
                delta = std::max(delta, std::abs(next - V(i, j)));
                V(i, j) += 1.7 * (next - V(i, j));
            }
        }
        const double cnext = V.row(1).mean() - 0.25 * rhs * ds * ds;
        delta = std::max(delta, std::abs(cnext - center));
        center = cnext;
        if (delta < 1e-12) break;
    }
    // density per node of a n_th-point circle discretization
    Eigen::ArrayXd dens(n_th);
    for (int j = 0; j < n_th; ++j) {
        const double th = j * dth;
        const Complex dir(std::cos(th), std::sin(th));
        const double g1 = gk(p, torus.point(p.z + (rho + 1e-5) * dir));
        const double g0 = gk(p, torus.point(p.z + (rho - 1e-5) * dir));
        const double dn_out = (g1 - gk(p, torus.point(p.z + rho * dir))) / 1e-5;
        (void)g0;
        const double dn_in =
            (3.0 * V(n_s, j) - 4.0 * V(n_s - 1, j) + V(n_s - 2, j)) / (2.0 * ds);
        dens[j] = (dn_out - dn_in) / kTwoPi * (kTwoPi * rho / n_th);
    }
    return dens;
}

} // namespace

TEST_CASE("potential of the area form vanishes") {
    const auto& gk = torus_kernel();
    const auto grid = make_grid(square_torus(), 128);
    const auto pot = potential_field(gk, Measure::omega(grid), grid);
    CHECK(pot.values.abs().maxCoeff() < 1e-10);
}

TEST_CASE("point-mass potential is the kernel") {
    const auto& gk = torus_kernel();
    const auto torus = square_torus();
    const auto a = torus.point(Complex(0.3, 0.4));
    const auto b = torus.point(Complex(0.8, 0.15));
    const auto x = torus.point(Complex(0.7, 0.1));
    CHECK(potential_of_measure(gk, Measure::dirac(a), x).value() == gk(a, x));
    // linearity over a two-atom measure
    auto half = Measure::atoms({a, b}, Eigen::ArrayXd::Constant(2, 0.5));
    CHECK(potential_of_measure(gk, half, x).value() ==
          doctest::Approx(0.5 * (gk(a, x) + gk(b, x))).epsilon(1e-15));
    // atom at the evaluation point
    CHECK(potential_of_measure(gk, Measure::dirac(a), a).is_neg_inf());
}

TEST_CASE("spectral and direct potentials agree for a smooth density") {
    const auto& gk = torus_kernel();
    const auto grid = make_grid(square_torus(), 128);
    std::mt19937_64 rng(2);
    const auto nu = Measure::grid_density(grid, smooth_density(*grid, rng));
    const auto pot = potential_field(gk, nu, grid);
    for (int k : {777, 5000, 11111}) {
        const auto v = potential_of_measure(gk, nu, grid->nodes[k]);
        CHECK(pot.values[k] == doctest::Approx(v.value()).epsilon(2e-4));
    }
    // max-zero normalization
    const auto pot0 = potential_field(gk, nu, grid, PotentialNormalization::MaxZero);
    CHECK(pot0.values.maxCoeff() == 0.0);
}

TEST_CASE("energy of the area form and of constant weights") {
    const auto& gk = torus_kernel();
    const auto grid = make_grid(square_torus(), 128);
    CHECK(std::abs(energy_I(gk, Measure::omega(grid), WeightField::zero()).value()) < 1e-10);
    CHECK(energy_I(gk, Measure::omega(grid), WeightField::constant(0.7)).value() ==
          doctest::Approx(1.4).epsilon(1e-12));
    // atomic measures carry infinite energy
    CHECK(energy_I(gk, Measure::dirac(square_torus().point(0.1)), WeightField::zero())
              .is_pos_inf());
    // signed or non-probability input is rejected
    auto bad = Measure::grid_density(grid, Eigen::ArrayXd::Constant(grid->size(), 2.0));
    CHECK_THROWS_AS(energy_I(gk, bad, WeightField::zero()), std::invalid_argument);
}

TEST_CASE("circle-measure energy against double-quadrature oracle") {
    const auto& gk = torus_kernel();
    const auto torus = square_torus();
    const double r = 0.08;
    const Complex ctr(0.25, 0.35);
    const double val =
        energy_I(gk, Measure::circle_uniform(torus.point(ctr), r), WeightField::zero()).value();

    // oracle: reduce the double circle integral to angles (u, v), average in
    // v, tanh-sinh in u against the log singularity at u = 0 mod 2pi
    auto ypt = [&](double ph) {
        return torus.point(ctr + r * Complex(std::cos(ph), std::sin(ph)));
    };
    auto inner = [&](double u) {
        const int Mv = 128;
        KahanSum sv;
        for (int j = 0; j < Mv; ++j) {
            const double v = kTwoPi * j / Mv;
            sv.add(gk(ypt(0.5 * (v + u)), ypt(0.5 * (v - u))));
        }
        return sv.value() / Mv;
    };
    const double h = 1.0 / 48.0;
    KahanSum su;
    for (int k = -200; k <= 200; ++k) {
        const double t = k * h;
        const double sh = 0.5 * kPi * std::sinh(t);
        const double w = 0.5 * kPi * std::cosh(t) / (std::cosh(sh) * std::cosh(sh));
        if (w < 1e-17) continue;
        const double u = kPi + kPi * std::tanh(sh);
        if (u <= 1e-8 || u >= kTwoPi - 1e-8) continue;
        su.add(w * inner(u));
    }
    const double oracle = -su.value() * kPi * h / kTwoPi;
    CHECK(val == doctest::Approx(oracle).epsilon(1e-4));
}

TEST_CASE("discrete energy basics") {
    const auto& gk = torus_kernel();
    const auto torus = square_torus();

    Configuration c2{{torus.point(0.0), torus.point(0.5)}, Region::full()};
    CHECK(discrete_energy(gk, c2).value() ==
          doctest::Approx(0.5 * gk(torus.point(0.0), torus.point(0.5))).epsilon(1e-15));

    Configuration dup{{torus.point(0.2), torus.point(0.2), torus.point(0.7)}, Region::full()};
    CHECK(discrete_energy(gk, dup).is_neg_inf());

    Configuration single{{torus.point(0.2)}, Region::full()};
    CHECK_THROWS_AS(discrete_energy(gk, single), std::invalid_argument);

    // quarter lattice, frozen after cross-checking the lattice-sum oracle
    Configuration c4{{torus.point(0.0), torus.point(0.5), torus.point(Complex(0.0, 0.5)),
                      torus.point(Complex(0.5, 0.5))},
                     Region::full()};
    const double e4 = discrete_energy(gk, c4).value();
    CHECK(e4 == doctest::Approx(0.173286795139986).epsilon(1e-9));
    KahanSum oracle;
    for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
            if (j == k) continue;
            oracle.add(oracles::ewald_torus_green(torus, c4.points[j].z - c4.points[k].z));
        }
    CHECK(e4 == doctest::Approx(oracle.value() / 16.0).epsilon(1e-9));
}

TEST_CASE("J and K functionals") {
    const auto& gk = torus_kernel();
    const auto torus = square_torus();
    std::mt19937_64 rng(9);

    Configuration c2{{torus.point(0.0), torus.point(0.5)}, Region::full()};
    const double g05 = gk(torus.point(0.0), torus.point(0.5));
    CHECK(functional_J(gk, c2, WeightField::zero()).value() ==
          doctest::Approx(-discrete_energy(gk, c2).value()).epsilon(1e-15));
    CHECK(functional_J(gk, c2, WeightField::constant(0.3)).value() ==
          doctest::Approx(functional_J(gk, c2, WeightField::zero()).value() + 0.6)
              .epsilon(1e-13));
    CHECK(functional_Km(gk, c2, WeightField::zero()).value() ==
          doctest::Approx(-g05).epsilon(1e-13));

    // K - J = -E/(m-1) on random configurations
    const auto phi = WeightField::smooth(0.4);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 2 + static_cast<int>(rng() % 7);
        Configuration cfg;
        for (int j = 0; j < m; ++j) cfg.points.push_back(random_torus_point(rng));
        const auto e = discrete_energy(gk, cfg);
        if (!e.finite()) continue;
        const double lhs = functional_Km(gk, cfg, phi).value() - functional_J(gk, cfg, phi).value();
        CHECK(lhs == doctest::Approx(-e.value() / (m - 1)).epsilon(1e-12));
    }

    Configuration dup{{torus.point(0.2), torus.point(0.2)}, Region::full()};
    CHECK(functional_J(gk, dup, WeightField::zero()).is_pos_inf());
    CHECK(functional_Km(gk, dup, WeightField::zero()).is_pos_inf());
}

TEST_CASE("permutation invariance of the discrete functionals") {
    const auto& gk = torus_kernel();
    std::mt19937_64 rng(13);
    const auto phi = WeightField::smooth(0.3);
    for (int trial = 0; trial < 10; ++trial) {
        Configuration cfg;
        for (int j = 0; j < 9; ++j) cfg.points.push_back(random_torus_point(rng));
        Configuration perm = cfg;
        std::shuffle(perm.points.begin(), perm.points.end(), rng);
        CHECK(std::abs(discrete_energy(gk, cfg).value() - discrete_energy(gk, perm).value()) <
              1e-12);
        CHECK(std::abs(functional_Km(gk, cfg, phi).value() -
                       functional_Km(gk, perm, phi).value()) < 1e-12);
    }
}

TEST_CASE("commutation of the potential pairing") {
    const auto& gk = torus_kernel();
    const auto grid = make_grid(square_torus(), 96);
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        const auto nu1 = Measure::grid_density(grid, smooth_density(*grid, rng));
        const auto nu2 = Measure::grid_density(grid, smooth_density(*grid, rng));
        const auto u1 = potential_field(gk, nu1, grid);
        const auto u2 = potential_field(gk, nu2, grid);
        const double a = (grid->weights * nu2.density * u1.values).sum();
        const double b = (grid->weights * nu1.density * u2.values).sum();
        CHECK(std::abs(a - b) < 1e-8);
    }
}

TEST_CASE("energy negativity for signed measures") {
    const auto& gk = torus_kernel();
    const auto grid = make_grid(square_torus(), 96);
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        // signed difference of two smooth probability densities
        Eigen::ArrayXd d = smooth_density(*grid, rng) - smooth_density(*grid, rng);
        const auto nu = Measure::grid_density(grid, d, true);
        const double q = density_pairing(gk, nu, nu);
        CHECK(q <= 1e-8);
    }
}

TEST_CASE("sweep onto a circle: mass, uniformity, potential match") {
    const auto& gk = torus_kernel();
    const auto torus = square_torus();
    const auto p = torus.point(Complex(0.31, 0.42));

    for (double r : {0.05, 0.03}) {
        const auto sw = sweep_to_circle(gk, p, r);
        CHECK(std::abs(sw.weights.sum() - 1.0) < 1e-10);
        CHECK((sw.weights * 256.0 - 1.0).abs().maxCoeff() < 1e-3);
        CHECK(sw.weights.minCoeff() > 0.0);
    }
    CHECK_THROWS_AS(sweep_to_circle(gk, p, 0.5), std::invalid_argument);

    // |U_sigma - U_delta| <= C r^2 |log r| away from the disc; C frozen from
    // the first calibration runs (observed ratio <= 0.53).
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (double r : {0.05, 0.02, 0.01}) {
        const auto sw = sweep_to_circle(gk, p, r);
        double worst = 0.0;
        for (int t = 0; t < 100; ++t) {
            const auto x = torus.point(Complex(u01(rng), u01(rng)));
            if (torus.distance(x, p) < 2.0 * r) continue;
            worst = std::max(worst, std::abs(sweep_potential(gk, sw, x) - gk(p, x)));
        }
        CHECK(worst <= 0.8 * r * r * std::abs(std::log(r)));
    }
}

TEST_CASE("sweep density against the polar Dirichlet oracle") {
    const auto& gk = torus_kernel();
    const auto torus = square_torus();
    const auto p = torus.point(Complex(0.62, 0.23));
    const double r = 0.05; // chart radius equals metric radius at tau = i
    const int n_th = 64;
    const auto sw = sweep_to_circle(gk, p, r, n_th);
    const auto oracle = polar_sweep_density_oracle(gk, p, r, 160, n_th);
    CHECK(std::abs(oracle.sum() - 1.0) < 1e-3);
    for (int j = 0; j < n_th; ++j)
        CHECK(sw.weights[j] == doctest::Approx(oracle[j]).epsilon(2e-3));
}

TEST_CASE("discrete energy dominated by the swept pair energy") {
    const auto& gk = torus_kernel();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    // E_m(p) <= pair energy of the averaged sweeps + C log m / m; the
    // constant is frozen from the calibration runs (observed <= 0.64).
    const double C = 1.5;
    for (int m : {8, 16, 32}) {
        for (int trial = 0; trial < 5; ++trial) {
            Configuration cfg;
            for (int j = 0; j < m; ++j)
                cfg.points.push_back(square_torus().point(Complex(u01(rng), u01(rng))));
            const auto e = discrete_energy(gk, cfg);
            if (!e.finite()) continue;
            const double rr = 1.0 / m; // gamma = 1
            std::vector<CircleSweep> sweeps;
            for (const auto& pt : cfg.points) sweeps.push_back(sweep_to_circle(gk, pt, rr, 96));
            KahanSum tot;
            for (int j = 0; j < m; ++j)
                for (int k = 0; k < m; ++k)
                    tot.add(j == k ? sweep_self_energy(gk, sweeps[j])
                                   : sweep_cross_energy(gk, sweeps[j], sweeps[k]));
            const double pair = tot.value() / (static_cast<double>(m) * m);
            CHECK(e.value() <= pair + C * std::log(static_cast<double>(m)) / m);
        }
    }
}
