#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "kantor/errors.hpp"

namespace kantor {

inline constexpr double infinity = std::numeric_limits<double>::infinity();

// Values above this are reported as +inf (divergence sentinel).
inline constexpr double divergence_guard = 1e300;

inline double apply_divergence_guard(double v) {
    return (std::isnan(v) || v > divergence_guard) ? infinity : v;
}

// Neumaier compensated summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Exact rational with 64-bit numerator/denominator, always reduced, denominator > 0.
// Used where weights must sum to one exactly before conversion to double.
class Rational {
public:
    constexpr Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) {
        if (den_ == 0) throw DomainError("Rational: zero denominator");
        normalize();
    }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }
    double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

    friend Rational operator+(const Rational& a, const Rational& b) {
        const std::int64_t g = std::gcd(a.den_, b.den_);
        return Rational(add(mul(a.num_, b.den_ / g), mul(b.num_, a.den_ / g)), mul(a.den_ / g, b.den_));
    }
    friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }
    friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
    friend Rational operator*(const Rational& a, const Rational& b) {
        const std::int64_t g1 = std::gcd(a.num_, b.den_);
        const std::int64_t g2 = std::gcd(b.num_, a.den_);
        const std::int64_t s1 = g1 == 0 ? 1 : g1;
        const std::int64_t s2 = g2 == 0 ? 1 : g2;
        return Rational(mul(a.num_ / s1, b.num_ / s2), mul(a.den_ / s2, b.den_ / s1));
    }
    friend Rational operator/(const Rational& a, const Rational& b) {
        if (b.num_ == 0) throw DomainError("Rational: division by zero");
        return a * Rational(b.den_, b.num_);
    }
    Rational& operator+=(const Rational& o) { return *this = *this + o; }

    friend bool operator==(const Rational&, const Rational&) = default;
    friend bool operator<(const Rational& a, const Rational& b) {
        return static_cast<__int128>(a.num_) * b.den_ < static_cast<__int128>(b.num_) * a.den_;
    }
    friend Rational abs(const Rational& r) { return Rational(r.num_ < 0 ? -r.num_ : r.num_, r.den_); }
    friend std::ostream& operator<<(std::ostream& os, const Rational& r) {
        return os << r.num_ << '/' << r.den_;
    }

private:
    static std::int64_t mul(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_mul_overflow(a, b, &r)) throw NumericalError("Rational: overflow");
        return r;
    }
    static std::int64_t add(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_add_overflow(a, b, &r)) throw NumericalError("Rational: overflow");
        return r;
    }
    void normalize() {
        if (den_ < 0) {
            num_ = -num_;
            den_ = -den_;
        }
        const std::int64_t g = std::gcd(num_, den_);
        if (g > 1) {
            num_ /= g;
            den_ /= g;
        }
    }

    std::int64_t num_ = 0;
    std::int64_t den_ = 1;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
};

// Adaptive 15-point Gauss-Kronrod on [a, b]; either bound may be infinite.
// A non-finite integrand or an estimate above the divergence guard yields +inf.
// Finite intervals are mapped onto [-1, 1] first: the Boost recursion tests the
// unscaled local error against a scaled tolerance, so a narrow interval would
// otherwise never terminate before max_depth.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rel_tol = 1e-10, unsigned max_depth = 15) {
    if (a == b) return {};
    struct NonFinite {};
    auto guarded = [&f](double x) {
        const double v = f(x);
        if (!std::isfinite(v)) throw NonFinite{};
        return v;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    QuadratureResult r;
    try {
        if (std::isfinite(a) && std::isfinite(b)) {
            const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
            auto mapped = [&](double u) { return half * guarded(mid + half * u); };
            r.value = GK::integrate(mapped, -1.0, 1.0, max_depth, rel_tol, &r.error);
        } else {
            r.value = GK::integrate(guarded, a, b, max_depth, rel_tol, &r.error);
        }
    } catch (const NonFinite&) {
        return {infinity, infinity};
    } catch (const std::exception&) {
        return {infinity, infinity};
    }
    if (!std::isfinite(r.value) || r.value > divergence_guard) return {infinity, infinity};
    return r;
}

}  // namespace kantor
