#pragma once

#include <array>
#include <map>
#include <string>

#include "gipsp/lattice.hpp"

namespace gipsp {

/// Sparse real polynomial in (x, y, z, t). Terms with zero coefficient are dropped.
class Poly {
public:
  using Exponents = std::array<int, 4>; // powers of x, y, z, t

  Poly() = default;
  static Poly constant(double c);
  static Poly monomial(double coef, int ex, int ey = 0, int ez = 0, int et = 0);

  Poly& add_term(double coef, const Exponents& exps);
  const std::map<Exponents, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  double operator()(const Vec3& q, double t = 0.0) const;
  /// Partial derivative; var = 0,1,2 for x,y,z and 3 for t.
  Poly derivative(int var) const;
  /// Fixes t, leaving a polynomial in (x, y, z).
  Poly at_time(double t) const;
  /// Highest total degree in the spatial variables.
  int spatial_degree() const;
  int degree_in(int var) const;
  bool depends_on(int var) const { return degree_in(var) > 0; }

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(double s) const;
  Poly operator*(const Poly& o) const;
  Poly operator-() const { return *this * -1.0; }

  /// Canonical text form, stable across runs; used for gauge tags.
  std::string to_string() const;

private:
  std::map<Exponents, double> terms_;
};

using PolyVec = std::array<Poly, 3>;

/// Gauss-Legendre nodes and weights on [a, b].
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_legendre(std::size_t count, double a, double b);

/// Smallest node count integrating a polynomial of the given degree exactly.
inline std::size_t nodes_for_degree(int degree) {
  return static_cast<std::size_t>(degree < 1 ? 1 : (degree + 2) / 2);
}

} // namespace gipsp
