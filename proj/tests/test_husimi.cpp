#include <doctest.h>

#include <cmath>

#include "gipsp/husimi.hpp"

using namespace gipsp;

namespace {

double max_kernel_diff(const DensityMatrix& a, const DensityMatrix& b) {
  return (a.kernel() - b.kernel()).cwiseAbs().maxCoeff();
}

double min_real(const CArray& v) {
  double lo = 0.0;
  for (const auto& x : v) lo = std::min(lo, x.real());
  return lo;
}

/// A = 0.6 x, the gradient of chi = 0.3 x^2.
struct Linear1D {
  GaugeFn chi{Poly::monomial(0.3, 2)};
  GaugeField field = GaugeField::zero().gauged(chi);
};

DensityMatrix packet(const QGrid& g, const Constants& k) {
  return density_from_pure(gaussian_packet({-0.3, 0, 0}, {0.5, 0, 0}, {0.9, 1, 1}, g, k));
}

} // namespace

TEST_CASE("smoothing parameters are validated") {
  SmoothingSpec s;
  CHECK_NOTHROW(s.validate());
  s.beta = 1.2;
  CHECK_THROWS_AS(s.validate(), Error);
  s.beta = 0.5;
  s.eps_reg = -1.0;
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("Husimi function of the ground state and of displaced coherent states") {
  const Constants k;
  const auto g = QGrid::balanced(1, 128, 1.0);
  const auto rho = density_from_pure(coherent_state({0, 0, 0}, {0, 0, 0}, k, g));
  const auto W = wigner(rho);
  const auto Q = husimi_from_wigner(W);
  CHECK(Q.kind == Kind::Q);
  CHECK(std::abs(Q.values[64 * 128 + 64].real() - 1.0 / (2 * kPi)) <= 1e-6);
  CHECK(std::abs(Q.total() - W.total()) <= 1e-10);
  CHECK(min_real(Q.values) >= -1e-10);

  // Center on grid nodes so that the maximum is sampled exactly.
  const double q0 = g.axis(0).coord(70);
  const PhaseGrid pg(g, 1.0);
  const double p0 = pg.p_axis(0).coord(58);
  const auto coh = density_from_pure(coherent_state({q0, 0, 0}, {p0, 0, 0}, k, g));
  const auto Qc = husimi_from_wigner(wigner(coh));
  std::size_t arg = 0;
  for (std::size_t i = 0; i < Qc.values.size(); ++i) {
    if (Qc.values[i].real() > Qc.values[arg].real()) arg = i;
  }
  CHECK(arg == 70 * 128 + 58);
  const auto Qo = husimi_overlap(coh);
  CHECK(std::abs(Qo.values[70 * 128 + 58].real() - 1.0 / (2 * kPi)) <= 1e-12);
  CHECK(std::abs(Qo.total() - 1.0) <= 1e-6);
}

TEST_CASE("coherent-state overlap agrees with smoothed Wigner function") {
  Constants k;
  k.lambda = 1.3;
  const auto g = QGrid::balanced(1, 128, 1.0);
  auto a = coherent_state({-1.5, 0, 0}, {0.4, 0, 0}, k, g);
  const auto b = coherent_state({1.5, 0, 0}, {-0.4, 0, 0}, k, g);
  for (std::size_t i = 0; i < 128; ++i) a.values[i] += b.values[i];
  const double n = std::sqrt(a.norm_squared());
  for (auto& v : a.values) v /= n;
  const auto rho = mix({{0.7, a}, {0.3, coherent_state({0.2, 0, 0}, {1.0, 0, 0}, k, g)}});
  const auto Qo = husimi_overlap(rho);
  const auto Qs = husimi_from_wigner(wigner(rho));
  CHECK(max_abs_diff(Qo.values, Qs.values) <= 1e-8);
  CHECK(max_imag(Qo.values) <= 1e-12);
  CHECK(min_real(Qo.values) >= -1e-12);
  double hi = 0.0;
  for (const auto& v : Qo.values) hi = std::max(hi, v.real());
  CHECK(hi <= 1.0 / (2 * kPi) + 1e-10);
}

TEST_CASE("smoothing intertwines multiplication with shifted operators") {
  Constants k;
  k.hbar = 0.9;
  k.lambda = 1.4;
  const auto g = QGrid::balanced(1, 128, k.hbar);
  const PhaseGrid pg(g, k.hbar);
  const std::size_t n = 128;
  CArray F(n * n);
  CArray qF(n * n);
  CArray pF(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double q = g.axis(0).coord(i);
      const double p = pg.p_axis(0).coord(j);
      const double f = std::exp(-0.4 * (q - 0.5) * (q - 0.5) - 0.6 * (p + 0.3) * (p + 0.3)) * (1.0 + 0.3 * q * p);
      F[i * n + j] = f;
      qF[i * n + j] = q * f;
      pF[i * n + j] = p * f;
    }
  }
  const auto S = smooth(F, pg, k);
  auto dq = S;
  spectral_derivative(dq, {n, n}, 0, g.axis(0).spacing);
  auto dp = S;
  spectral_derivative(dp, {n, n}, 1, pg.p_axis(0).spacing);
  const auto SqF = smooth(qF, pg, k);
  const auto SpF = smooth(pF, pg, k);
  double eq = 0.0;
  double ep = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t x = i * n + j;
      const double q = g.axis(0).coord(i);
      const double p = pg.p_axis(0).coord(j);
      eq = std::max(eq, std::abs(SqF[x] - (q * S[x] + k.hbar / (2 * k.lambda) * dq[x])));
      ep = std::max(ep, std::abs(SpF[x] - (p * S[x] + k.hbar * k.lambda / 2 * dp[x])));
    }
  }
  CHECK(eq <= 1e-9);
  CHECK(ep <= 1e-9);
}

TEST_CASE("deconvolution back to the Wigner function") {
  const Constants k;
  const auto g = QGrid::balanced(1, 128, 1.0);
  SmoothingSpec s;
  s.beta = 0.7;
  const auto ground = wigner(density_from_pure(coherent_state({0, 0, 0}, {0, 0, 0}, k, g)));
  const auto back = wigner_from_husimi(husimi_from_wigner(ground, s), s);
  CHECK(back.kind == Kind::W);
  CHECK(std::abs(back.values[64 * 128 + 64].real() - 1.0 / kPi) <= 1e-5);

  const auto coh = wigner(density_from_pure(coherent_state({0.7, 0, 0}, {-0.4, 0, 0}, k, g)));
  CHECK(max_abs_diff(wigner_from_husimi(husimi_from_wigner(coh, s), s).values, coh.values) <= 1e-6);

  auto zero = husimi_from_wigner(coh, s);
  for (auto& v : zero.values) v = 0.0;
  CHECK(max_abs(wigner_from_husimi(zero, s).values) == 0.0);

  // A narrow band cannot represent this Husimi function; the gate refuses it.
  SmoothingSpec narrow;
  narrow.beta = 0.1;
  CHECK_THROWS_AS(wigner_from_husimi(husimi_from_wigner(coh, narrow), narrow), IllPosedInverse);
}

TEST_CASE("Q_g reductions and gauge invariance in one dimension") {
  const Constants k;
  const auto g = QGrid::balanced(1, 128, 1.0);
  const auto rho = packet(g, k);
  const auto Q = husimi_from_wigner(wigner(rho));
  const auto Qg0 = husimi_gauge(rho, GaugeField::zero());
  CHECK(Qg0.kind == Kind::Qg);
  CHECK(max_abs_diff(Qg0.values, Q.values) <= 1e-12);
  CHECK(max_abs_diff(husimi_gauge_poincare(rho, GaugeField::zero()).values, husimi_overlap(rho).values) <= 1e-12);

  const Linear1D lin;
  const auto rot = gauge_rotate(rho, lin.chi);
  const auto Qg = husimi_gauge(rot, lin.field);
  CHECK(max_abs_diff(Qg.values, Qg0.values) <= 1e-8);
  CHECK(max_imag(Qg.values) <= 1e-10);
  CHECK(min_real(Qg.values) >= -1e-10);
  CHECK(std::abs(Qg.total() - 1.0) <= 1e-6);

  const auto R = husimi_gauge_poincare(rot, lin.field);
  CHECK(min_real(R.values) >= -1e-12);
  CHECK(max_abs_diff(R.values, husimi_from_wigner(wigner_gauge_poincare(rot, lin.field)).values) <= 1e-8);
}

TEST_CASE("Q_g dequantizer kernel matches the smoothing path") {
  const Constants k;
  const auto g = QGrid::balanced(1, 64, 1.0);
  const Linear1D lin;
  const auto rot = gauge_rotate(packet(g, k), lin.chi);
  const auto a = husimi_gauge(rot, lin.field);
  const auto b = husimi_gauge_kernel(rot, lin.field);
  CHECK(max_abs_diff(a.values, b.values) <= 1e-8);
  CHECK(max_imag(b.values) <= 1e-10);
}

TEST_CASE("density matrix reconstruction from Q_g") {
  const Constants k;
  const Linear1D lin;
  {
    const auto g = QGrid::balanced(1, 128, 1.0);
    SmoothingSpec s;
    s.beta = 0.7;
    const auto rot = density_from_pure(gauge_rotate(coherent_state({0.4, 0, 0}, {-0.3, 0, 0}, k, g), lin.chi));
    const auto back = density_from_husimi_gauge(husimi_gauge(rot, lin.field, s), lin.field, s);
    CHECK(max_kernel_diff(back, rot) <= 1e-5);
    CHECK(back.hermiticity_error() <= 1e-12);
    CHECK(std::abs(back.trace() - 1.0) <= 1e-6);

    const auto plain = packet(g, k);
    const auto back0 = density_from_husimi_gauge(husimi_gauge(plain, GaugeField::zero(), s), GaugeField::zero(), s);
    CHECK(max_kernel_diff(back0, plain) <= 1e-6);

    const auto Rback = density_from_husimi_poincare(husimi_gauge_poincare(rot, lin.field, s), lin.field, s);
    CHECK(max_kernel_diff(Rback, rot) <= 1e-5);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Rback.kernel() * g.cell_volume());
    CHECK(es.eigenvalues().minCoeff() >= -1e-6);
  }
  {
    const auto g = QGrid::balanced(1, 64, 1.0);
    SmoothingSpec s;
    s.beta = 0.9;
    const auto rot = gauge_rotate(packet(g, k), lin.chi);
    const auto qg = husimi_gauge(rot, lin.field, s);
    const auto via_kernel = density_from_husimi_gauge_kernel(qg, lin.field, s);
    const auto via_pipeline = density_from_husimi_gauge(qg, lin.field, s);
    CHECK(max_kernel_diff(via_kernel, via_pipeline) <= 1e-6);
    const auto R = husimi_gauge_poincare(rot, lin.field, s);
    CHECK(max_kernel_diff(density_from_husimi_poincare_kernel(R, lin.field, s),
                          density_from_husimi_poincare(R, lin.field, s)) <= 1e-6);
  }
}

TEST_CASE("two-dimensional gauge-independent Husimi functions") {
  const Constants k;
  const auto g = QGrid::balanced(2, 32, 1.0);
  const double B = 1.0;
  const auto landau = GaugeField::uniform_b(B, GaugePreset::Landau);
  const auto sym = GaugeField::uniform_b(B, GaugePreset::Symmetric);
  const auto rho_l = density_from_pure(gaussian_packet({0.5, -0.3, 0}, {0.3, 0.2, 0}, {0.8, 0.7, 1}, g, k, landau.tag()));
  const auto rho_s = gauge_rotate(rho_l, GaugeFn{Poly::monomial(B / 2, 1, 1)}).with_tag(sym.tag());

  const auto Ql = husimi_gauge(rho_l, landau);
  CHECK(max_abs_diff(Ql.values, husimi_gauge(rho_s, sym).values) <= 1e-8);
  const auto Rl = husimi_gauge_poincare(rho_l, landau);
  const auto Rs = husimi_gauge_poincare(rho_s, sym);
  CHECK(max_abs_diff(Rl.values, Rs.values) <= 1e-8);
  CHECK(max_abs_diff(Rs.values, husimi_overlap(rho_s).values) <= 1e-12);
  CHECK(min_real(Rl.values) >= -1e-12);
  CHECK(std::abs(Rl.total() - 1.0) <= 1e-6);
}
