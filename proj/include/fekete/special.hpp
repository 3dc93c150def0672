#pragma once

// Scalar special functions shared by the Green-function and section-basis
// code: Jacobi theta_1, the genus-one Riemann theta, theta functions with
// rational characteristics, Dedekind eta (log-magnitude), and the
// exponential integral E_1.

#include <cmath>
#include <complex>
#include <stdexcept>

#include "fekete/numerics.hpp"

namespace fekete {

namespace detail {

// Series truncation order for theta sums at scale Im(tau): tail < 1e-14.
inline int theta_terms(double im_tau) {
    if (im_tau <= 0.0) throw std::invalid_argument("theta: Im(tau) must be positive");
    return static_cast<int>(std::ceil(std::sqrt(40.0 / (kPi * im_tau)))) + 3;
}

inline Complex theta1_series(Complex z, Complex tau) {
    const Complex q_exp = Complex(0.0, kPi) * tau; // log q
    const int K = theta_terms(tau.imag());
    Complex s(0.0, 0.0);
    for (int k = K; k >= 0; --k) {
        const double kh = k + 0.5;
        Complex term = std::exp(q_exp * (kh * kh)) * std::sin((2.0 * k + 1.0) * kPi * z);
        s += (k % 2 == 0) ? term : -term;
    }
    return 2.0 * s;
}

} // namespace detail

// Jacobi theta_1 with period lattice Z + tau*Z:
//   theta1(z+1) = -theta1(z),  theta1(z+tau) = -exp(-i pi tau - 2 i pi z) theta1(z),
// simple zeros exactly on the lattice. For Im(tau) < 0.5 the evaluation is
// routed through the modular map tau -> -1/tau.
inline Complex theta1(Complex z, Complex tau) {
    if (tau.imag() <= 0.0) throw std::invalid_argument("theta1: Im(tau) must be positive");
    if (tau.imag() < 0.5) {
        const Complex taup = -1.0 / tau;
        const Complex root = std::sqrt(Complex(0.0, -1.0) * tau);
        return (Complex(0.0, -1.0) / root) *
               std::exp(Complex(0.0, kPi) * taup * z * z) * theta1(z * taup, taup);
    }
    // Reduce z by the lattice so the series sees |Im z| <= Im(tau)/2 and
    // |Re z| <= 1/2; restore via the quasi-periodicity factor.
    const double b = z.imag() / tau.imag();
    const int n = static_cast<int>(std::lround(b));
    const double a = z.real() - n * tau.real();
    const int m = static_cast<int>(std::lround(a));
    const Complex zr = z - static_cast<double>(m) - static_cast<double>(n) * tau;
    // theta1(zr + m + n tau) = (-1)^{m+n} exp(-i pi n^2 tau - 2 i pi n zr) theta1(zr)
    Complex val = detail::theta1_series(zr, tau);
    if (n != 0) {
        const Complex expo = Complex(0.0, -kPi) * (static_cast<double>(n) * static_cast<double>(n)) * tau -
                             Complex(0.0, kTwoPi) * static_cast<double>(n) * zr;
        val *= std::exp(expo);
    }
    if (((m + n) % 2 + 2) % 2 != 0) val = -val;
    return val;
}

// log |theta1(z; tau)| - pi Im(z)^2 / Im(tau): lattice-periodic, evaluated by
// reduction to the centered fundamental domain. This is the Green kernel up
// to its normalization constant.
inline double log_theta1_gaussian(Complex z, Complex tau) {
    if (tau.imag() < 0.5) {
        // Periodic in z either way; delegate to the modular-safe theta1.
        const Complex v = theta1(z, tau);
        return std::log(std::abs(v)) - kPi * z.imag() * z.imag() / tau.imag();
    }
    const double b = z.imag() / tau.imag();
    const int n = static_cast<int>(std::lround(b));
    const double a = z.real() - n * tau.real();
    const int m = static_cast<int>(std::lround(a));
    const Complex zr = z - static_cast<double>(m) - static_cast<double>(n) * tau;
    const Complex v = detail::theta1_series(zr, tau);
    return std::log(std::abs(v)) - kPi * zr.imag() * zr.imag() / tau.imag();
}

// theta1'(0; tau) = 2 pi eta(tau)^3.
inline Complex theta1_prime0(Complex tau) {
    if (tau.imag() <= 0.0) throw std::invalid_argument("theta1_prime0: Im(tau) must be positive");
    const Complex q_exp = Complex(0.0, kPi) * tau;
    const int K = detail::theta_terms(tau.imag());
    Complex s(0.0, 0.0);
    for (int k = K; k >= 0; --k) {
        const double kh = k + 0.5;
        Complex term = std::exp(q_exp * (kh * kh)) * ((2.0 * k + 1.0) * kPi);
        s += (k % 2 == 0) ? term : -term;
    }
    return 2.0 * s;
}

// Genus-one Riemann theta, theta(z) = sum_k exp(i pi k^2 tau + 2 i pi k z).
//   theta(z+1) = theta(z),  theta(z+tau) = exp(-i pi tau - 2 i pi z) theta(z),
// single zero at (1+tau)/2 mod lattice.
inline Complex riemann_theta(Complex z, Complex tau) {
    if (tau.imag() <= 0.0) throw std::invalid_argument("riemann_theta: Im(tau) must be positive");
    const double y = z.imag() / tau.imag();
    const int k0 = static_cast<int>(std::lround(-y));
    const int K = detail::theta_terms(tau.imag());
    Complex s(0.0, 0.0);
    for (int d = -K; d <= K; ++d) {
        const double k = k0 + d;
        s += std::exp(Complex(0.0, kPi) * (k * k) * tau + Complex(0.0, kTwoPi) * k * z);
    }
    return s;
}

inline Complex riemann_theta_deriv(Complex z, Complex tau) {
    const double y = z.imag() / tau.imag();
    const int k0 = static_cast<int>(std::lround(-y));
    const int K = detail::theta_terms(tau.imag());
    Complex s(0.0, 0.0);
    for (int d = -K; d <= K; ++d) {
        const double k = k0 + d;
        s += Complex(0.0, kTwoPi) * k *
             std::exp(Complex(0.0, kPi) * (k * k) * tau + Complex(0.0, kTwoPi) * k * z);
    }
    return s;
}

// |theta(z)| exp(-pi Im(z)^2 / Im(tau)): the lattice-periodic norm of the
// theta section. Every term is damped below 1 before summation, so this
// never overflows regardless of Im(z).
inline double riemann_theta_norm(Complex z, Complex tau) {
    if (tau.imag() <= 0.0) throw std::invalid_argument("riemann_theta_norm: Im(tau) must be positive");
    const double y = z.imag() / tau.imag();
    const double damp = -kPi * y * y * tau.imag();
    const int k0 = static_cast<int>(std::lround(-y));
    const int K = detail::theta_terms(tau.imag());
    Complex s(0.0, 0.0);
    for (int d = -K; d <= K; ++d) {
        const double k = k0 + d;
        s += std::exp(Complex(0.0, kPi) * (k * k) * tau + Complex(0.0, kTwoPi) * k * z + damp);
    }
    return std::abs(s);
}

// Metric-weighted theta with characteristic [a, 0] at tensor scale n:
//   theta[a,0](n z; n tau) * exp(-pi n Im(z)^2 / Im(tau)),
// returned with its phase. Exponents are completed to a negative square, so
// entries of section evaluation matrices stay O(1) for any n.
inline Complex theta_char_weighted(double a, Complex z, int n, Complex tau) {
    if (tau.imag() <= 0.0) throw std::invalid_argument("theta_char_weighted: Im(tau) must be positive");
    const double b = z.imag() / tau.imag();
    const double nd = static_cast<double>(n);
    const int k0 = static_cast<int>(std::lround(-a - b));
    const int K = detail::theta_terms(nd * tau.imag()) + 1;
    const double damp = -kPi * nd * b * b * tau.imag();
    Complex s(0.0, 0.0);
    for (int d = -K; d <= K; ++d) {
        const double ka = (k0 + d) + a;
        const Complex expo = Complex(0.0, kPi) * (ka * ka) * nd * tau +
                             Complex(0.0, kTwoPi) * ka * nd * z + damp;
        s += std::exp(expo);
    }
    return s;
}

// Unweighted theta with characteristic [a, 0] at tensor scale n, and its
// z-derivative. Holomorphic in z; magnitudes can reach exp(pi n Im(tau)),
// so these are for small n (root finding), not for bulk evaluation.
inline Complex theta_char(double a, Complex z, int n, Complex tau) {
    const double nd = static_cast<double>(n);
    const double b = z.imag() / tau.imag();
    const int k0 = static_cast<int>(std::lround(-a - b));
    const int K = detail::theta_terms(nd * tau.imag()) + 1;
    Complex s(0.0, 0.0);
    for (int d = -K; d <= K; ++d) {
        const double ka = (k0 + d) + a;
        s += std::exp(Complex(0.0, kPi) * (ka * ka) * nd * tau + Complex(0.0, kTwoPi) * ka * nd * z);
    }
    return s;
}

inline Complex theta_char_deriv(double a, Complex z, int n, Complex tau) {
    const double nd = static_cast<double>(n);
    const double b = z.imag() / tau.imag();
    const int k0 = static_cast<int>(std::lround(-a - b));
    const int K = detail::theta_terms(nd * tau.imag()) + 1;
    Complex s(0.0, 0.0);
    for (int d = -K; d <= K; ++d) {
        const double ka = (k0 + d) + a;
        s += Complex(0.0, kTwoPi) * ka * nd *
             std::exp(Complex(0.0, kPi) * (ka * ka) * nd * tau + Complex(0.0, kTwoPi) * ka * nd * z);
    }
    return s;
}

// log |eta(tau)| = -pi Im(tau)/12 + sum_{k>=1} log |1 - exp(2 i pi k tau)|.
inline double log_abs_eta(Complex tau) {
    if (tau.imag() <= 0.0) throw std::invalid_argument("log_abs_eta: Im(tau) must be positive");
    double s = -kPi * tau.imag() / 12.0;
    for (int k = 1;; ++k) {
        const Complex qk = std::exp(Complex(0.0, kTwoPi) * static_cast<double>(k) * tau);
        const double t = std::log(std::abs(1.0 - qk));
        s += t;
        if (std::abs(qk) < 1e-18) break;
        if (k > 4000) break;
    }
    return s;
}

// Exponential integral E_1(x), x > 0. Series for small x, Lentz continued
// fraction otherwise.
inline double expint_e1(double x) {
    if (x <= 0.0) throw std::invalid_argument("expint_e1: requires x > 0");
    if (x <= 1.0) {
        const double euler = 0.57721566490153286061;
        double sum = 0.0, term = 1.0;
        for (int k = 1; k <= 40; ++k) {
            term *= -x / k;
            sum += term / k;
            if (std::abs(term / k) < 1e-18) break;
        }
        return -euler - std::log(x) - sum;
    }
    // E_1(x) = exp(-x) * CF, CF = 1/(x+1- 1/(x+3- 4/(x+5- 9/(x+7- ...))))
    double b = x + 1.0;
    double c = 1e308, d = 1.0 / b, h = d;
    for (int k = 1; k <= 200; ++k) {
        const double an = -static_cast<double>(k) * k;
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < 1e-300) d = 1e-300;
        c = b + an / c;
        if (std::abs(c) < 1e-300) c = 1e-300;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
}

} // namespace fekete
