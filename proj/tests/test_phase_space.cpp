#include <doctest.h>

#include <cmath>

#include "gipsp/phase_space.hpp"

using namespace gipsp;

namespace {

/// Weyl-symbol integral of the ground state at (q, P) by trapezoidal quadrature in u.
double ground_state_wigner_oracle(double q, double P) {
  const auto psi = [](double x) { return std::pow(kPi, -0.25) * std::exp(-x * x / 2); };
  const int n = 4000;
  const double L = 20.0;
  const double du = 2 * L / n;
  cplx s = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double u = -L + i * du;
    s += psi(q - u / 2) * psi(q + u / 2) * std::polar(1.0, u * P) * ((i == 0 || i == n) ? 0.5 : 1.0);
  }
  return (s * du).real() / (2 * kPi);
}

double max_kernel_diff(const DensityMatrix& a, const DensityMatrix& b) {
  return (a.kernel() - b.kernel()).cwiseAbs().maxCoeff();
}

DensityMatrix sample_mixture(const QGrid& g, const Constants& k, const std::string& tag = "zero") {
  return mix({{0.5, gaussian_packet({0.4, 0, 0}, {-0.3, 0, 0}, {0.8, 1, 1}, g, k, tag)},
              {0.3, coherent_state({-1.0, 0, 0}, {0.6, 0, 0}, k, g, tag)},
              {0.2, gaussian_packet({1.2, 0, 0}, {0.2, 0, 0}, {1.1, 1, 1}, g, k, tag)}});
}

/// A = 0.6 x, the gradient of chi = 0.3 x^2.
struct Linear1D {
  GaugeFn chi{Poly::monomial(0.3, 2)};
  GaugeField field = GaugeField::zero().gauged(chi);
};

} // namespace

TEST_CASE("Wigner function of the oscillator ground state") {
  const Constants k;
  const auto g = QGrid::balanced(1, 64, 1.0);
  const auto rho = density_from_pure(coherent_state({0, 0, 0}, {0, 0, 0}, k, g));
  const auto W = wigner(rho);
  CHECK(W.kind == Kind::W);
  CHECK(W.grid.shape() == Shape{64, 64});
  const std::size_t c = 32 * 64 + 32;
  CHECK(std::abs(W.values[c].real() - 1.0 / kPi) <= 1e-6);
  CHECK(std::abs(ground_state_wigner_oracle(0.0, 0.0) - 1.0 / kPi) <= 1e-12);
  const std::size_t off = 37 * 64 + 29;
  CHECK(std::abs(W.values[off].real() - ground_state_wigner_oracle(g.axis(0).coord(37), W.grid.p_axis(0).coord(29))) <= 1e-10);
  // Closed form exp(-q^2 - p^2) / pi at every node.
  double err = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    for (std::size_t j = 0; j < 64; ++j) {
      const double q = g.axis(0).coord(i);
      const double p = W.grid.p_axis(0).coord(j);
      err = std::max(err, std::abs(W.values[i * 64 + j] - std::exp(-q * q - p * p) / kPi));
    }
  }
  CHECK(err <= 1e-12);
  CHECK(max_imag(W.values) <= 1e-10);
}

TEST_CASE("Wigner marginals, normalization and purity") {
  Constants k;
  k.hbar = 0.8;
  const auto g = QGrid::balanced(1, 128, k.hbar);
  const auto rho = sample_mixture(g, k);
  const auto W = wigner(rho);
  CHECK(std::abs(W.total() - 1.0) <= 1e-6);
  const auto marg = W.position_marginal();
  const auto dens = rho.position_density();
  for (std::size_t i = 0; i < 128; ++i) CHECK(std::abs(marg[i] - dens[i]) <= 1e-8);
  double w2 = 0.0;
  for (const auto& v : W.values) w2 += std::norm(v);
  w2 *= W.grid.cell_volume() * 2.0 * kPi * k.hbar;
  CHECK(std::abs(w2 - rho.purity()) <= 1e-6);
}

TEST_CASE("cat state has negative Wigner values") {
  const Constants k;
  const auto g = QGrid::balanced(1, 128, 1.0);
  auto a = coherent_state({-2.0, 0, 0}, {0, 0, 0}, k, g);
  const auto b = coherent_state({2.0, 0, 0}, {0, 0, 0}, k, g);
  for (std::size_t i = 0; i < 128; ++i) a.values[i] = (a.values[i] + b.values[i]) / std::sqrt(2.0);
  const auto W = wigner(density_from_pure(a));
  double lo = 0.0;
  for (const auto& v : W.values) lo = std::min(lo, v.real());
  CHECK(lo < -0.1);
}

TEST_CASE("inverse Wigner transform") {
  const Constants k;
  const auto g = QGrid::balanced(1, 128, 1.0);
  const auto rho = sample_mixture(g, k);
  const auto back = inverse_wigner(wigner(rho));
  CHECK(max_kernel_diff(back, rho) <= 1e-10);

  const auto pure = density_from_pure(gaussian_packet({0.2, 0, 0}, {0.5, 0, 0}, {0.7, 1, 1}, g, k));
  CHECK(std::abs(inverse_wigner(wigner(pure)).purity() - 1.0) <= 1e-8);

  auto zero = wigner(rho);
  for (auto& v : zero.values) v = 0.0;
  CHECK(inverse_wigner(zero).kernel().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("W_g reduces to W without a vector potential") {
  const Constants k;
  const auto g1 = QGrid::balanced(1, 64, 1.0);
  const auto rho = sample_mixture(g1, k);
  const auto W = wigner(rho);
  const auto Wg = wigner_gauge_stratonovich(rho, GaugeField::zero());
  CHECK(Wg.kind == Kind::Wg);
  CHECK(max_abs_diff(Wg.values, W.values) <= 1e-14);
  CHECK(max_kernel_diff(inverse_wigner_gauge(Wg, GaugeField::zero()), inverse_wigner(W)) <= 1e-14);

  // A scalar potential alone leaves W_g untouched.
  const auto e_only = GaugeField::uniform_e({0.5, 0, 0});
  const auto rho_e = rho.with_tag(e_only.tag());
  CHECK(max_abs_diff(wigner_gauge_stratonovich(rho_e, e_only).values, W.values) <= 1e-14);
}

TEST_CASE("W_g of a 1-D state in a linear vector potential") {
  const Constants k;
  const auto g = QGrid::balanced(1, 128, 1.0);
  const Linear1D lin;
  const auto rho = gauge_rotate(sample_mixture(g, k), lin.chi);
  const auto Wg = wigner_gauge_stratonovich(rho, lin.field);
  CHECK(max_imag(Wg.values) <= 1e-10);
  CHECK(std::abs(Wg.total() - 1.0) <= 1e-6);
  const auto marg = Wg.position_marginal();
  const auto dens = rho.position_density();
  for (std::size_t i = 0; i < 128; ++i) CHECK(std::abs(marg[i] - dens[i]) <= 1e-8);

  // Gauge invariance: the rotated state in the shifted gauge has the same W_g
  // as the unrotated state with A = 0.
  CHECK(max_abs_diff(Wg.values, wigner(sample_mixture(g, k)).values) <= 1e-8);

  const auto back = inverse_wigner_gauge(Wg, lin.field);
  CHECK(max_kernel_diff(back, rho) <= 1e-10);
  CHECK(back.hermiticity_error() <= 1e-12);
  CHECK(back.gauge_tag() == lin.field.tag());

  const auto r = wigner_gauge_poincare(rho, lin.field);
  CHECK(max_kernel_diff(inverse_wigner_poincare(r, lin.field), rho) <= 1e-10);
}

TEST_CASE("gauge-independent Wigner functions agree across Landau and symmetric gauges") {
  const Constants k;
  const auto g = QGrid::balanced(2, 32, 1.0);
  const double B = 1.0;
  const auto landau = GaugeField::uniform_b(B, GaugePreset::Landau);
  const auto sym = GaugeField::uniform_b(B, GaugePreset::Symmetric);
  const GaugeFn chi{Poly::monomial(B / 2, 1, 1)};
  const auto rho_l = density_from_pure(gaussian_packet({0.5, -0.3, 0}, {0.3, 0.2, 0}, {0.8, 0.7, 1}, g, k, landau.tag()));
  const auto rho_s = gauge_rotate(rho_l, chi).with_tag(sym.tag());

  const auto Wl = wigner_gauge_stratonovich(rho_l, landau);
  const auto Ws = wigner_gauge_stratonovich(rho_s, sym);
  CHECK(max_abs_diff(Wl.values, Ws.values) <= 1e-8);
  CHECK(max_imag(Wl.values) <= 1e-10);
  CHECK(std::abs(Wl.total() - 1.0) <= 1e-6);

  const auto Rl = wigner_gauge_poincare(rho_l, landau);
  const auto Rs = wigner_gauge_poincare(rho_s, sym);
  CHECK(max_abs_diff(Rl.values, Rs.values) <= 1e-8);
  // The radial phase vanishes in the symmetric gauge.
  CHECK(max_abs_diff(Rs.values, wigner(rho_s).values) <= 1e-14);

  // The two constructions are different functions.
  CHECK(max_abs_diff(Wl.values, Rl.values) > 1e-7);
}

TEST_CASE("radial phase table and tag checks") {
  const Constants k;
  const auto g = QGrid::balanced(2, 16, 1.0);
  const auto landau = GaugeField::uniform_b(0.8, GaugePreset::Landau);
  const auto tab = radial_phase_table(g, landau, 0.0, k);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto q = g.point(i);
    CHECK(tab[i] == doctest::Approx(-0.4 * q[0] * q[1]).epsilon(1e-14).scale(1.0));
  }

  const auto rho = density_from_pure(coherent_state({0, 0, 0}, {0, 0, 0}, k, QGrid::balanced(2, 32, 1.0)));
  CHECK_THROWS_AS(wigner_gauge_stratonovich(rho, landau), GaugeTagMismatch);
  CHECK_THROWS_AS(wigner_gauge_poincare(rho, landau), GaugeTagMismatch);
}

TEST_CASE("kind names round trip") {
  for (auto kd : {Kind::W, Kind::Wg, Kind::WgRadial, Kind::Q, Kind::Qg, Kind::QgRadial, Kind::Classical}) {
    CHECK(kind_from_string(to_string(kd)) == kd);
  }
  CHECK(husimi_of(Kind::WgRadial) == Kind::QgRadial);
  CHECK(wigner_of(Kind::Qg) == Kind::Wg);
  CHECK(is_husimi(Kind::Q));
  CHECK_FALSE(is_husimi(Kind::Wg));
  CHECK_THROWS(kind_from_string("bogus"));
}
