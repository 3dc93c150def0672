#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace fekete {

using Complex = std::complex<double>;

// Compensated (Kahan-Neumaier) accumulator. Batch sums over configurations
// and grids go through this so results do not depend on evaluation order
// beyond the fixed iteration order of the container.
class KahanSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Tagged extended real. Collision semantics of the discrete energies require
// explicit -inf/+inf values that never enter floating-point sums.
class ExtReal {
public:
    enum class Tag { Finite, PosInf, NegInf };

    ExtReal() : tag_(Tag::Finite), v_(0.0) {}
    explicit ExtReal(double v) : tag_(Tag::Finite), v_(v) {}

    static ExtReal pos_inf() { ExtReal e; e.tag_ = Tag::PosInf; return e; }
    static ExtReal neg_inf() { ExtReal e; e.tag_ = Tag::NegInf; return e; }

    bool finite() const { return tag_ == Tag::Finite; }
    bool is_pos_inf() const { return tag_ == Tag::PosInf; }
    bool is_neg_inf() const { return tag_ == Tag::NegInf; }
    Tag tag() const { return tag_; }

    // Value accessor; throws on sentinel so infinities cannot leak into sums.
    double value() const {
        if (!finite()) throw std::logic_error("ExtReal: sentinel has no finite value");
        return v_;
    }
    double value_or(double subst) const { return finite() ? v_ : subst; }

    ExtReal operator-() const {
        if (is_pos_inf()) return neg_inf();
        if (is_neg_inf()) return pos_inf();
        return ExtReal(-v_);
    }

    friend bool operator<(const ExtReal& a, const ExtReal& b) {
        if (a.tag_ == b.tag_ && a.finite()) return a.v_ < b.v_;
        if (a.is_neg_inf()) return !b.is_neg_inf();
        if (b.is_pos_inf()) return !a.is_pos_inf();
        return false;
    }

private:
    Tag tag_;
    double v_;
};

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 6.28318530717958647692;

// Atom-detection threshold: points closer than this are treated as coincident.
inline constexpr double kCollisionTol = 1e-10;

// C^4 smoothstep on [0,1]: s(0)=1, s(1)=0, with four vanishing derivatives
// at both ends. Used for radial cutoffs whose discrete Laplacians must stay
// well resolved.
inline double smooth_cutoff01(double t) {
    if (t <= 0.0) return 1.0;
    if (t >= 1.0) return 0.0;
    // 1 - S(t), S = 126 t^5 - 420 t^6 + 540 t^7 - 315 t^8 + 70 t^9
    const double t2 = t * t, t4 = t2 * t2, t5 = t4 * t;
    return 1.0 - t5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + t * 70.0))));
}
inline double smooth_cutoff01_d1(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double t2 = t * t, t4 = t2 * t2;
    return -t4 * (630.0 + t * (-2520.0 + t * (3780.0 + t * (-2520.0 + t * 630.0))));
}
inline double smooth_cutoff01_d2(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double t2 = t * t, t3 = t2 * t;
    return -t3 * (2520.0 + t * (-12600.0 + t * (22680.0 + t * (-17640.0 + t * 5040.0))));
}

// FNV-1a 64-bit content hash; stable provenance id for config payloads.
inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= static_cast<std::uint64_t>(c);
        h *= 1099511628211ULL;
    }
    return h;
}

// Deterministic per-task seed derivation (splitmix64 step over a mix).
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t salt) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace fekete
