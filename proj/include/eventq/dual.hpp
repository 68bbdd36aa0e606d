#pragma once

// Forward-mode dual scalar: one primal value and one tangent (directional
// derivative along a single seeded parameter direction).

#include <cmath>

#include "eventq/errors.hpp"

namespace eventq {

struct Dual {
  double primal = 0.0;
  double tangent = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double p, double t = 0.0) : primal(p), tangent(t) {}

  static constexpr Dual constant(double p) { return {p, 0.0}; }
  static constexpr Dual seeded(double p) { return {p, 1.0}; }

  constexpr Dual& operator+=(const Dual& o) {
    primal += o.primal;
    tangent += o.tangent;
    return *this;
  }
  constexpr Dual& operator-=(const Dual& o) {
    primal -= o.primal;
    tangent -= o.tangent;
    return *this;
  }
  constexpr Dual& operator*=(double s) {
    primal *= s;
    tangent *= s;
    return *this;
  }

  friend constexpr bool operator==(const Dual&, const Dual&) = default;
};

constexpr Dual operator+(Dual a, const Dual& b) { return a += b; }
constexpr Dual operator-(Dual a, const Dual& b) { return a -= b; }
constexpr Dual operator-(const Dual& a) { return {-a.primal, -a.tangent}; }

// Product rule.
constexpr Dual operator*(const Dual& a, const Dual& b) {
  return {a.primal * b.primal, a.tangent * b.primal + a.primal * b.tangent};
}

// Scaling by a constant; no zero tangent term is added, so the result is
// bit-identical to elementwise multiplication of the two fields.
constexpr Dual operator*(Dual a, double s) { return a *= s; }
constexpr Dual operator*(double s, Dual a) { return a *= s; }

constexpr Dual dual_add(const Dual& a, const Dual& b) { return a + b; }
constexpr Dual dual_mul(const Dual& a, const Dual& b) { return a * b; }

/// Exact solution of dx/dt = -x/tau over an interval dt. tau is a constant,
/// so primal and tangent are scaled by the same factor.
inline Dual dual_exp_decay(const Dual& x, double dt, double tau) {
  if (!(tau > 0.0)) throw ConfigError("dual_exp_decay: tau must be positive");
  if (!(dt >= 0.0)) throw ConfigError("dual_exp_decay: dt must be non-negative");
  return x * std::exp(-dt / tau);
}

inline bool is_finite(const Dual& x) { return std::isfinite(x.primal) && std::isfinite(x.tangent); }

}  // namespace eventq
