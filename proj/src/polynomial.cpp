#include "gipsp/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gipsp {

Poly Poly::constant(double c) { return monomial(c, 0); }

Poly Poly::monomial(double coef, int ex, int ey, int ez, int et) {
  Poly p;
  p.add_term(coef, {ex, ey, ez, et});
  return p;
}

Poly& Poly::add_term(double coef, const Exponents& exps) {
  for (int e : exps) {
    if (e < 0) throw Error("polynomial exponents must be non-negative");
  }
  const double v = (terms_[exps] += coef);
  if (v == 0.0) terms_.erase(exps);
  return *this;
}

double Poly::operator()(const Vec3& q, double t) const {
  const double vars[4] = {q[0], q[1], q[2], t};
  double sum = 0.0;
  for (const auto& [exps, coef] : terms_) {
    double term = coef;
    for (int v = 0; v < 4; ++v) {
      for (int k = 0; k < exps[v]; ++k) term *= vars[v];
    }
    sum += term;
  }
  return sum;
}

Poly Poly::derivative(int var) const {
  Poly d;
  for (const auto& [exps, coef] : terms_) {
    if (exps[var] == 0) continue;
    auto e = exps;
    e[var] -= 1;
    d.add_term(coef * exps[var], e);
  }
  return d;
}

Poly Poly::at_time(double t) const {
  Poly r;
  for (const auto& [exps, coef] : terms_) {
    auto e = exps;
    e[3] = 0;
    r.add_term(coef * std::pow(t, exps[3]), e);
  }
  return r;
}

int Poly::spatial_degree() const {
  int d = 0;
  for (const auto& [exps, coef] : terms_) d = std::max(d, exps[0] + exps[1] + exps[2]);
  return d;
}

int Poly::degree_in(int var) const {
  int d = 0;
  for (const auto& [exps, coef] : terms_) d = std::max(d, exps[var]);
  return d;
}

Poly Poly::operator+(const Poly& o) const {
  Poly r = *this;
  for (const auto& [exps, coef] : o.terms_) r.add_term(coef, exps);
  return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + o * -1.0; }

Poly Poly::operator*(double s) const {
  Poly r;
  if (s == 0.0) return r;
  for (const auto& [exps, coef] : terms_) r.add_term(coef * s, exps);
  return r;
}

Poly Poly::operator*(const Poly& o) const {
  Poly r;
  for (const auto& [ea, ca] : terms_) {
    for (const auto& [eb, cb] : o.terms_) {
      r.add_term(ca * cb, {ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2], ea[3] + eb[3]});
    }
  }
  return r;
}

std::string Poly::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  static const char* names[4] = {"x", "y", "z", "t"};
  for (const auto& [exps, coef] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << coef;
    for (int v = 0; v < 4; ++v) {
      if (exps[v] > 0) os << "*" << names[v] << "^" << exps[v];
    }
  }
  return os.str();
}

Quadrature gauss_legendre(std::size_t count, double a, double b) {
  Quadrature q;
  q.nodes.resize(count);
  q.weights.resize(count);
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const auto n = static_cast<int>(count);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1.0;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    q.nodes[i] = mid + half * x;
    q.weights[i] = 2.0 * half / ((1.0 - x * x) * dp * dp);
  }
  return q;
}

} // namespace gipsp
