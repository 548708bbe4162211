#pragma once

#include <cmath>

namespace expdeg {

// Error-free transformations: a + b = s + e and a * b = p + e exactly.
inline void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

inline void fast_two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  e = b - (s - a);
}

inline void two_prod(double a, double b, double& p, double& e) {
  p = a * b;
  e = std::fma(a, b, -p);
}

/// Unevaluated sum hi + lo with |lo| <= ulp(hi)/2; about 106 significant bits.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  DoubleDouble() = default;
  DoubleDouble(double h) : hi(h), lo(0.0) {}  // NOLINT: implicit by design
  DoubleDouble(double h, double l) : hi(h), lo(l) {}

  double to_double() const { return hi + lo; }

  friend DoubleDouble operator+(const DoubleDouble& a, const DoubleDouble& b) {
    double s, e, t, f;
    two_sum(a.hi, b.hi, s, e);
    two_sum(a.lo, b.lo, t, f);
    e += t;
    fast_two_sum(s, e, s, e);
    e += f;
    fast_two_sum(s, e, s, e);
    return {s, e};
  }

  friend DoubleDouble operator-(const DoubleDouble& a) { return {-a.hi, -a.lo}; }
  friend DoubleDouble operator-(const DoubleDouble& a, const DoubleDouble& b) { return a + (-b); }

  friend DoubleDouble operator*(const DoubleDouble& a, const DoubleDouble& b) {
    double p, e;
    two_prod(a.hi, b.hi, p, e);
    e += a.hi * b.lo + a.lo * b.hi;
    fast_two_sum(p, e, p, e);
    return {p, e};
  }

  friend DoubleDouble operator/(const DoubleDouble& a, const DoubleDouble& b) {
    double q1 = a.hi / b.hi;
    DoubleDouble r = a - b * DoubleDouble(q1);
    double q2 = r.hi / b.hi;
    r = r - b * DoubleDouble(q2);
    double q3 = r.hi / b.hi;
    double s, e;
    fast_two_sum(q1, q2, s, e);
    return DoubleDouble(s, e) + DoubleDouble(q3);
  }

  DoubleDouble& operator+=(const DoubleDouble& o) { return *this = *this + o; }
  DoubleDouble& operator-=(const DoubleDouble& o) { return *this = *this - o; }
  DoubleDouble& operator*=(const DoubleDouble& o) { return *this = *this * o; }
};

inline DoubleDouble dd_abs(const DoubleDouble& a) { return a.hi < 0 ? -a : a; }

// Unit roundoff bounds used by the a priori error model.
inline constexpr double kUnitDouble = 0x1p-53;
inline constexpr double kUnitDoubleDouble = 0x1p-100;

}  // namespace expdeg
