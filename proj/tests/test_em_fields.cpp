#include <doctest.h>

#include <cmath>
#include <random>

#include "gipsp/em_fields.hpp"

using namespace gipsp;

namespace {

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double maxabs(const Vec3& a) { return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])}); }

/// A nontrivial time-dependent polynomial gauge function.
GaugeFn sample_chi() {
  Poly c;
  c.add_term(0.3, {2, 1, 0, 0}).add_term(-0.7, {0, 3, 0, 0}).add_term(0.2, {1, 0, 0, 1}).add_term(1.1, {0, 0, 0, 2});
  return GaugeFn{c};
}

/// A field with quadratic A, time dependence and a scalar potential.
GaugeField sample_field() {
  PolyVec A{Poly::monomial(0.4, 0, 2) + Poly::monomial(0.1, 1, 1, 0, 1), Poly::monomial(-0.3, 2, 0),
            Poly::monomial(0.05, 1, 0)};
  return GaugeField::polynomial(A, Poly::monomial(0.6, 1, 0) + Poly::monomial(-0.2, 0, 1, 0, 1));
}

std::vector<Vec3> sample_points() {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> d(-2.0, 2.0);
  std::vector<Vec3> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({d(gen), d(gen), 0.0});
  return pts;
}

} // namespace

TEST_CASE("polynomial arithmetic and derivatives") {
  const Poly p = Poly::monomial(2.0, 2, 1) + Poly::monomial(-1.0, 0, 0, 0, 1) + Poly::constant(3.0);
  CHECK(p({1.5, -2.0, 0.0}, 0.5) == doctest::Approx(2 * 2.25 * -2.0 - 0.5 + 3.0));
  CHECK(p.derivative(0)({1.5, -2.0, 0.0}) == doctest::Approx(4 * 1.5 * -2.0));
  CHECK(p.derivative(3)({0, 0, 0}) == doctest::Approx(-1.0));
  CHECK(p.spatial_degree() == 3);
  CHECK((p - p).is_zero());
  CHECK((p * p)({0.3, 0.4, 0.0}, 0.2) == doctest::Approx(std::pow(p({0.3, 0.4, 0.0}, 0.2), 2)));
  CHECK(p.at_time(2.0)({1, 1, 0}) == doctest::Approx(p({1, 1, 0}, 2.0)));
  CHECK(p.to_string() == (Poly::constant(3.0) + Poly::monomial(-1.0, 0, 0, 0, 1) + Poly::monomial(2.0, 2, 1)).to_string());
}

TEST_CASE("Gauss-Legendre rule integrates its design degree exactly") {
  for (int deg = 0; deg <= 9; ++deg) {
    const auto q = gauss_legendre(nodes_for_degree(deg), -0.5, 0.5);
    double s = 0.0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i], deg);
    const double exact = deg % 2 ? 0.0 : std::pow(0.5, deg) / (deg + 1);
    CHECK(s == doctest::Approx(exact).epsilon(1e-14).scale(1.0));
  }
}

TEST_CASE("uniform-B presets") {
  const Constants k;
  const double B = 1.7;
  const Vec3 q{0.8, -1.3, 0.0};
  const auto sym = eval_potentials(GaugeField::uniform_b(B, GaugePreset::Symmetric), q, 0.0, k);
  CHECK(sym.A[0] == doctest::Approx(-B * q[1] / 2));
  CHECK(sym.A[1] == doctest::Approx(B * q[0] / 2));
  const auto lan = eval_potentials(GaugeField::uniform_b(B, GaugePreset::Landau), q, 0.0, k);
  CHECK(lan.A[0] == doctest::Approx(-B * q[1]));
  CHECK(lan.A[1] == 0.0);

  const auto shifted = GaugeField::uniform_b(B, GaugePreset::Landau).gauged(GaugeFn{Poly::monomial(B / 2, 1, 1)});
  for (const auto& p : sample_points()) {
    const auto a = eval_potentials(shifted, p, 0.0, k);
    const auto b = eval_potentials(GaugeField::uniform_b(B, GaugePreset::Symmetric), p, 0.0, k);
    CHECK(maxabs(sub(a.A, b.A)) <= 1e-14);
  }

  for (auto preset : {GaugePreset::Landau, GaugePreset::Symmetric}) {
    const auto fs = field_strengths(GaugeField::uniform_b(B, preset), k);
    for (int c = 0; c < 3; ++c) CHECK(fs.E[c].is_zero());
    CHECK(fs.B[0].is_zero());
    CHECK(fs.B[1].is_zero());
    CHECK(fs.B[2].to_string() == Poly::constant(B).to_string());
  }
}

TEST_CASE("field strengths of a uniform electric field and of gauge layers") {
  Constants k;
  k.c = 2.0;
  const auto eb = eval_EB(GaugeField::uniform_e({0.3, -0.4, 0.0}), {1.0, 2.0, 0.0}, 0.7, k);
  CHECK(eb.E[0] == doctest::Approx(0.3));
  CHECK(eb.E[1] == doctest::Approx(-0.4));
  CHECK(maxabs(eb.B) == 0.0);

  // phi = -E0 . q with A = 0.
  const auto lin = GaugeField::polynomial({}, Poly::monomial(-0.5, 1, 0) + Poly::monomial(0.25, 0, 1));
  const auto e2 = eval_EB(lin, {3.0, -1.0, 0.0}, 0.0, k);
  CHECK(e2.E[0] == doctest::Approx(0.5));
  CHECK(e2.E[1] == doctest::Approx(-0.25));

  const auto base = sample_field();
  const auto g = base.gauged(sample_chi());
  for (const auto& p : sample_points()) {
    for (double t : {0.0, 0.8}) {
      const auto a = eval_EB(base, p, t, k);
      const auto b = eval_EB(g, p, t, k);
      CHECK(maxabs(sub(a.E, b.E)) <= 1e-12);
      CHECK(maxabs(sub(a.B, b.B)) <= 1e-12);
    }
  }
}

TEST_CASE("gauge layer shifts the potentials by grad chi and -dchi/dt / c") {
  Constants k;
  k.c = 3.0;
  const auto chi = sample_chi();
  const auto base = sample_field();
  const auto g = base.gauged(chi);
  const auto grad = chi.gradient();
  for (const auto& p : sample_points()) {
    const double t = 0.4;
    const auto a = eval_potentials(base, p, t, k);
    const auto b = eval_potentials(g, p, t, k);
    for (int c = 0; c < 3; ++c) CHECK(b.A[c] - a.A[c] == doctest::Approx(grad[c](p, t)).epsilon(1e-12));
    CHECK(b.phi - a.phi == doctest::Approx(-chi.time_derivative()(p, t) / k.c).epsilon(1e-12));
  }
  CHECK(g.tag() != base.tag());
  CHECK(base.gauged(chi).tag() == g.tag());
}

TEST_CASE("chord integral") {
  const Constants k;
  for (auto preset : {GaugePreset::Landau, GaugePreset::Symmetric}) {
    const auto f = GaugeField::uniform_b(1.3, preset);
    for (const auto& p : sample_points()) {
      const auto c = chord_integral(f, p, {0.7, -1.1, 0.0}, 0.0, k);
      CHECK(maxabs(sub(c, eval_potentials(f, p, 0.0, k).A)) <= 1e-14);
    }
  }
  CHECK(maxabs(chord_integral(GaugeField::zero(), {1, 2, 0}, {3, 4, 0}, 0.0, k)) == 0.0);

  // A_x = x^2, q_c = (1,0), u = (2,0): integral of (1 + 2 tau)^2 over [-1/2, 1/2].
  const auto quad = GaugeField::polynomial({Poly::monomial(1.0, 2), Poly{}, Poly{}});
  CHECK(chord_integral(quad, {1, 0, 0}, {2, 0, 0}, 0.0, k)[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));

  // Oracle: composite Simpson quadrature for a higher-degree field.
  const auto f = sample_field();
  const Vec3 qc{0.3, -0.8, 0.0};
  const Vec3 u{1.4, 0.9, 0.0};
  Vec3 ref{0, 0, 0};
  const int N = 2000;
  for (int i = 0; i <= N; ++i) {
    const double tau = -0.5 + static_cast<double>(i) / N;
    const double w = (i == 0 || i == N) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const auto A = eval_potentials(f, {qc[0] + tau * u[0], qc[1] + tau * u[1], 0.0}, 0.3, k).A;
    for (int c = 0; c < 3; ++c) ref[c] += w * A[c] / (3.0 * N);
  }
  CHECK(maxabs(sub(chord_integral(f, qc, u, 0.3, k), ref)) <= 1e-12);
}

TEST_CASE("chord phase changes by the chi difference under a gauge layer") {
  const Constants k;
  const auto chi = sample_chi();
  const auto f = sample_field();
  const auto g = f.gauged(chi);
  for (const auto& qc : sample_points()) {
    const Vec3 u{0.6, -0.9, 0.0};
    const double lhs = dot(u, sub(chord_integral(g, qc, u, 0.2, k), chord_integral(f, qc, u, 0.2, k)));
    const Vec3 plus{qc[0] + u[0] / 2, qc[1] + u[1] / 2, 0.0};
    const Vec3 minus{qc[0] - u[0] / 2, qc[1] - u[1] / 2, 0.0};
    CHECK(std::abs(lhs - (chi(plus, 0.2) - chi(minus, 0.2))) <= 1e-12);
  }
}

TEST_CASE("radial phase") {
  const Constants k;
  const double B = 0.9;
  for (const auto& p : sample_points()) {
    CHECK(std::abs(radial_phase(GaugeField::uniform_b(B, GaugePreset::Symmetric), p, 0.0, k)) <= 1e-15);
    CHECK(radial_phase(GaugeField::uniform_b(B, GaugePreset::Landau), p, 0.0, k) ==
          doctest::Approx(-B / 2 * p[0] * p[1]).epsilon(1e-14));
  }

  // Pure gauge A = grad chi, with e, hbar, c away from one.
  Constants k2;
  k2.e = -0.7;
  k2.hbar = 0.5;
  k2.c = 1.5;
  const auto chi = sample_chi();
  const auto pure = GaugeField::zero().gauged(chi);
  const auto f = sample_field();
  const double coupling = k2.e / (k2.hbar * k2.c);
  for (const auto& p : sample_points()) {
    const double shift = coupling * (chi(p, 0.6) - chi({0, 0, 0}, 0.6));
    CHECK(std::abs(radial_phase(pure, p, 0.6, k2) - shift) <= 1e-12);
    CHECK(std::abs(radial_phase(f.gauged(chi), p, 0.6, k2) - radial_phase(f, p, 0.6, k2) - shift) <= 1e-12);
  }
}

TEST_CASE("potential sampler matches the free functions") {
  Constants k;
  k.e = 2.0;
  const auto f = sample_field().gauged(sample_chi());
  const PotentialSampler s(f, 0.5, k);
  CHECK_FALSE(s.vector_potential_zero());
  CHECK(PotentialSampler(GaugeField::zero(), 0.0, k).vector_potential_zero());
  for (const auto& p : sample_points()) {
    const Vec3 u{-0.4, 1.2, 0.0};
    CHECK(maxabs(sub(s.A(p), eval_potentials(f, p, 0.5, k).A)) <= 1e-12);
    CHECK(maxabs(sub(s.chord(p, u), chord_integral(f, p, u, 0.5, k))) <= 1e-12);
    CHECK(std::abs(s.chord_phase(p, u) - k.e / (k.hbar * k.c) * dot(u, chord_integral(f, p, u, 0.5, k))) <= 1e-12);
    CHECK(std::abs(s.radial(p) - radial_phase(f, p, 0.5, k)) <= 1e-12);
  }
}

TEST_CASE("superposition adds potentials") {
  const Constants k;
  const auto a = GaugeField::uniform_b(1.0, GaugePreset::Landau);
  const auto b = GaugeField::uniform_e({0.2, 0.0, 0.0});
  const auto s = GaugeField::superposition({a, b});
  const auto eb = eval_EB(s, {0.5, 0.5, 0.0}, 0.0, k);
  CHECK(eb.E[0] == doctest::Approx(0.2));
  CHECK(eb.B[2] == doctest::Approx(1.0));
}
