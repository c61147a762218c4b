#include "gipsp/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <sstream>

#include "gipsp/dynamics.hpp"

namespace gipsp {

bool CriterionResult::pass() const {
  if (!error.empty() || measurements.empty()) return false;
  for (const auto& m : measurements) {
    if (!m.pass()) return false;
  }
  return true;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.pass() ? "PASS " : "FAIL ") << r.id << " " << r.title << " (" << std::fixed << std::setprecision(1)
     << r.seconds << "s)";
  os << std::scientific << std::setprecision(2);
  for (const auto& m : r.measurements) {
    os << (&m == &r.measurements.front() ? ": " : "; ") << m.name << "=" << m.value << (m.upper ? "<=" : ">")
       << m.bound;
  }
  if (!r.error.empty()) os << " error: " << r.error;
  return os.str();
}

namespace {

using Measure = std::vector<Measurement>;

double max_kernel_diff(const DensityMatrix& a, const DensityMatrix& b) {
  return (a.kernel() - b.kernel()).cwiseAbs().maxCoeff();
}

double l2_diff(const CArray& a, const CArray& b, double cell) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * cell);
}

GaugeFn symmetric_shift(double B) { return GaugeFn{Poly::monomial(0.5 * B, 1, 1)}; }

/// Landau-gauge packet and its symmetric-gauge twin on the 32x32 grid.
struct GaugePair {
  Constants k;
  QGrid grid = QGrid::balanced(2, 32, 1.0);
  double B = 1.0;
  GaugeField landau = GaugeField::uniform_b(1.0, GaugePreset::Landau);
  GaugeField symmetric = GaugeField::uniform_b(1.0, GaugePreset::Symmetric);
  DensityMatrix rho_l;
  DensityMatrix rho_s;

  GaugePair() {
    const auto psi = gaussian_packet({0.5, -0.3, 0.0}, {0.3, 0.2, 0.0}, {0.8, 0.7, 1.0}, grid, k, landau.tag());
    rho_l = density_from_pure(psi);
    rho_s = gauge_rotate(rho_l, symmetric_shift(B)).with_tag(symmetric.tag());
  }
};

Measure criterion1(double s) {
  const GaugePair gp;
  const SmoothingSpec sm;
  const double tol = 1e-8 * s;
  Measure m;
  m.push_back({"W_g", max_abs_diff(wigner_gauge_stratonovich(gp.rho_l, gp.landau).values,
                                   wigner_gauge_stratonovich(gp.rho_s, gp.symmetric).values),
               tol});
  m.push_back({"Q_g", max_abs_diff(husimi_gauge(gp.rho_l, gp.landau, sm).values,
                                   husimi_gauge(gp.rho_s, gp.symmetric, sm).values),
               tol});
  m.push_back({"W_g_radial", max_abs_diff(wigner_gauge_poincare(gp.rho_l, gp.landau).values,
                                          wigner_gauge_poincare(gp.rho_s, gp.symmetric).values),
               tol});
  m.push_back({"Q_g_radial", max_abs_diff(husimi_gauge_poincare(gp.rho_l, gp.landau, sm).values,
                                          husimi_gauge_poincare(gp.rho_s, gp.symmetric, sm).values),
               tol});
  return m;
}

Measure criterion2(double s) {
  Constants k;
  const auto grid = QGrid::balanced(2, 32, 1.0);
  const double tol = 1e-12 * s;
  const SmoothingSpec sm;
  const auto zero = GaugeField::zero();
  const auto rho = density_from_pure(gaussian_packet({0.4, -0.2, 0.0}, {0.5, -0.3, 0.0}, {0.8, 0.7, 1.0}, grid, k));
  const auto W = wigner(rho);
  // Each gauge construction is compared with the ungauged quantity built the
  // same way: Q_g smooths W_g, Q_g_radial takes coherent-state overlaps.
  const auto Q_smoothed = husimi_from_wigner(W, sm);
  const auto Q_overlap = husimi_overlap(rho, sm);
  Measure m;
  m.push_back({"W_g-W", max_abs_diff(wigner_gauge_stratonovich(rho, zero).values, W.values), tol});
  m.push_back({"Q_g-Q", max_abs_diff(husimi_gauge(rho, zero, sm).values, Q_smoothed.values), tol});
  m.push_back({"W_g_radial-W", max_abs_diff(wigner_gauge_poincare(rho, zero).values, W.values), tol});
  m.push_back({"Q_g_radial-Q", max_abs_diff(husimi_gauge_poincare(rho, zero, sm).values, Q_overlap.values), tol});

  const auto sym = GaugeField::uniform_b(1.0, GaugePreset::Symmetric);
  const auto rho_s =
      density_from_pure(gaussian_packet({0.4, -0.2, 0.0}, {0.5, -0.3, 0.0}, {0.8, 0.7, 1.0}, grid, k, sym.tag()));
  m.push_back({"symmetric W_g_radial-W", max_abs_diff(wigner_gauge_poincare(rho_s, sym).values, wigner(rho_s).values),
               tol});
  return m;
}

/// Superposition of two coherent states on the 1-D n=128 grid.
WaveFunction cat_state(const QGrid& grid, const Constants& k) {
  auto a = coherent_state({-1.5, 0.0, 0.0}, {0.4, 0.0, 0.0}, k, grid);
  const auto b = coherent_state({1.5, 0.0, 0.0}, {-0.4, 0.0, 0.0}, k, grid);
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] += b.values[i];
  const double n = std::sqrt(a.norm_squared());
  for (auto& v : a.values) v /= n;
  return a;
}

Measure criterion3(double s) {
  Constants k;
  const auto grid = QGrid::balanced(1, 128, 1.0);
  const SmoothingSpec sm;
  const auto cat = cat_state(grid, k);
  const auto mixed = mix({{0.6, cat}, {0.4, gaussian_packet({0.5, 0.0, 0.0}, {-1.0, 0.0, 0.0}, {0.6, 1.0, 1.0}, grid, k)}});
  Measure m;
  for (const auto& [label, rho] : {std::pair{"cat", density_from_pure(cat)}, std::pair{"mixed", mixed}}) {
    const auto Q = husimi_overlap(rho, sm);
    const auto Qs = husimi_from_wigner(wigner(rho), sm);
    double lo = 0.0;
    double hi = 0.0;
    for (const auto& v : Q.values) {
      lo = std::min(lo, v.real());
      hi = std::max(hi, v.real());
    }
    const std::string l = label;
    m.push_back({l + " overlap-smoothed", max_abs_diff(Q.values, Qs.values), 1e-8 * s});
    m.push_back({l + " max|Im Q|", max_imag(Q.values), 1e-12 * s});
    m.push_back({l + " -min Q", std::max(0.0, -lo), 1e-10 * s});
    m.push_back({l + " |int Q - 1|", std::abs(Q.total() - 1.0), 1e-6 * s});
    m.push_back({l + " max Q - 1/(2 pi hbar)", hi - 1.0 / (2.0 * kPi * k.hbar), 1e-10 * s});
  }
  return m;
}

/// Linear vector potential A = 0.6 x realized as the gauge of chi = 0.3 x^2.
struct LinearGauge {
  GaugeFn chi{Poly::monomial(0.3, 2)};
  GaugeField field = GaugeField::zero().gauged(chi);
};

Measure criterion4(double s) {
  Constants k;
  const LinearGauge lg;
  Measure m;
  {
    const auto grid = QGrid::balanced(1, 128, 1.0);
    const auto rho = density_from_pure(cat_state(grid, k));
    m.push_back({"W", max_kernel_diff(inverse_wigner(wigner(rho)), rho), 1e-10 * s});
    const auto rg = gauge_rotate(rho, lg.chi);
    m.push_back({"W_g", max_kernel_diff(inverse_wigner_gauge(wigner_gauge_stratonovich(rg, lg.field), lg.field), rg),
                 1e-10 * s});
    SmoothingSpec sm;
    sm.beta = 0.7;
    const auto coh = density_from_pure(
        gauge_rotate(coherent_state({0.4, 0.0, 0.0}, {-0.3, 0.0, 0.0}, k, grid), lg.chi));
    const auto pk = density_from_pure(
        gauge_rotate(gaussian_packet({-0.3, 0.0, 0.0}, {0.5, 0.0, 0.0}, {0.9, 1.0, 1.0}, grid, k), lg.chi));
    for (const auto& [label, r] : {std::pair{"coherent", coh}, std::pair{"packet", pk}}) {
      const auto back = density_from_husimi_gauge(husimi_gauge(r, lg.field, sm), lg.field, sm);
      m.push_back({std::string("Q_g pipeline ") + label, max_kernel_diff(back, r), 1e-5 * s});
    }
  }
  {
    const auto grid = QGrid::balanced(1, 64, 1.0);
    SmoothingSpec sm;
    sm.beta = 0.9;
    const auto r = density_from_pure(
        gauge_rotate(gaussian_packet({-0.3, 0.0, 0.0}, {0.5, 0.0, 0.0}, {0.9, 1.0, 1.0}, grid, k), lg.chi));
    const auto qg = husimi_gauge(r, lg.field, sm);
    m.push_back({"Q_g kernel-pipeline", max_abs_diff(husimi_gauge_kernel(r, lg.field).values, qg.values), 1e-4 * s});
    m.push_back({"rho kernel-pipeline",
                 max_kernel_diff(density_from_husimi_gauge_kernel(qg, lg.field, sm),
                                 density_from_husimi_gauge(qg, lg.field, sm)),
                 1e-4 * s});
    const auto qr = husimi_gauge_poincare(r, lg.field, sm);
    m.push_back({"radial rho kernel-pipeline",
                 max_kernel_diff(density_from_husimi_poincare_kernel(qr, lg.field, sm),
                                 density_from_husimi_poincare(qr, lg.field, sm)),
                 1e-4 * s});
  }
  return m;
}

Measure criterion5(double s) {
  const GaugePair gp;
  const SmoothingSpec sm;
  Measure m;
  m.push_back({"2-D Q_g", max_imag(husimi_gauge(gp.rho_l, gp.landau, sm).values), 1e-12 * s});
  m.push_back({"2-D Q_g_radial", max_imag(husimi_gauge_poincare(gp.rho_l, gp.landau, sm).values), 1e-12 * s});
  Constants k;
  const LinearGauge lg;
  const auto grid = QGrid::balanced(1, 128, 1.0);
  const auto rho = gauge_rotate(
      mix({{0.7, cat_state(grid, k)}, {0.3, coherent_state({0.8, 0.0, 0.0}, {0.2, 0.0, 0.0}, k, grid)}}), lg.chi);
  m.push_back({"hermiticity error", rho.hermiticity_error(), 1e-14});
  m.push_back({"1-D mixed Q_g", max_imag(husimi_gauge(rho, lg.field, sm).values), 1e-12 * s});
  m.push_back({"1-D mixed Q_g_radial", max_imag(husimi_gauge_poincare(rho, lg.field, sm).values), 1e-12 * s});
  return m;
}

/// Coherent state in the symmetric gauge; with lambda = B/2 it moves rigidly
/// on the cyclotron circle.
struct CyclotronCase {
  Constants k;
  QGrid grid = QGrid::balanced(2, 32, 1.0);
  GaugeField field;
  WaveFunction psi;
  PhaseSpaceFunction w0;

  CyclotronCase(double B, double lambda) : field(GaugeField::uniform_b(B, GaugePreset::Symmetric)) {
    k.lambda = lambda;
    psi = coherent_state({0.6, -0.4, 0.0}, {0.5, 0.3, 0.0}, k, grid, field.tag());
    w0 = wigner_gauge_stratonovich(density_from_pure(psi), field);
  }
};

Measure criterion6(double s) {
  Measure m;
  {
    const CyclotronCase cc(2.0, 1.0);
    const double period = 2.0 * kPi * cc.k.m * cc.k.c / (cc.k.e * 2.0);
    EvolutionSpec es;
    es.field = cc.field;
    es.t_final = period;
    es.dt = period;
    es.propagator = Propagator::SchrodingerDense;
    const auto psi_t = schrodinger_propagate(cc.psi, es);
    const auto w_quantum = wigner_gauge_stratonovich(density_from_pure(psi_t), cc.field, period);
    es.propagator = Propagator::Liouville;
    es.dt = period / 64.0;
    const auto w_classical = liouville_propagate(cc.w0, es);
    m.push_back({"(a) Schrodinger vs Liouville after T", max_abs_diff(w_quantum.values, w_classical.values), 1e-4 * s});

    const auto rm = moyal_gauge_rhs(cc.w0, cc.field, 0.0);
    const auto rl = liouville_rhs(cc.w0, cc.field, 0.0);
    m.push_back({"(c) uniform B", max_abs_diff(rm.values, rl.values), 1e-10 * s});
    const auto eb = GaugeField::superposition({cc.field, GaugeField::uniform_e({0.3, -0.2, 0.0})});
    PhaseSpaceFunction w_eb = cc.w0;
    w_eb.field_tag = eb.tag();
    m.push_back({"(c) uniform E and B",
                 max_abs_diff(moyal_gauge_rhs(w_eb, eb, 0.0).values, liouville_rhs(w_eb, eb, 0.0).values), 1e-10 * s});
  }
  {
    // Second-order one-sided difference from three exact (dense) evolutions.
    const CyclotronCase cc(1.2, 1.0);
    const double h = 1e-3;
    EvolutionSpec es;
    es.field = cc.field;
    es.propagator = Propagator::SchrodingerDense;
    es.dt = h;
    es.t_final = h;
    const auto w1 = wigner_gauge_stratonovich(density_from_pure(schrodinger_propagate(cc.psi, es)), cc.field, h);
    es.dt = 2.0 * h;
    es.t_final = 2.0 * h;
    const auto w2 = wigner_gauge_stratonovich(density_from_pure(schrodinger_propagate(cc.psi, es)), cc.field, 2.0 * h);
    CArray fd(cc.w0.values.size());
    for (std::size_t i = 0; i < fd.size(); ++i) {
      fd[i] = (-3.0 * cc.w0.values[i] + 4.0 * w1.values[i] - w2.values[i]) / (2.0 * h);
    }
    const auto rm = moyal_gauge_rhs(cc.w0, cc.field, 0.0);
    m.push_back({"(b) Moyal RHS vs d/dt of Schrodinger route", max_abs_diff(rm.values, fd), 1e-4 * s});
  }
  return m;
}

Measure criterion7(double) {
  // B_z = 1 + x/2 from A_y = x + x^2/4; fixed smooth Gaussian on grids adapted to each hbar.
  PolyVec A;
  A[1] = Poly::monomial(1.0, 1) + Poly::monomial(0.25, 2);
  const auto f = GaugeField::polynomial(A);
  const double hbars[] = {0.1, 0.05, 0.025};
  std::vector<double> err;
  for (double hb : hbars) {
    Constants k;
    k.hbar = hb;
    const auto grid = QGrid::balanced(2, 32, hb);
    const PhaseGrid pg(grid, hb);
    PhaseSpaceFunction F{pg, CArray(pg.size()), Kind::Wg, k, f.tag(), 0.0};
    const double sigma = 0.2;
    for (std::size_t iq = 0; iq < pg.q_size(); ++iq) {
      const Vec3 q = grid.point(iq);
      for (std::size_t ip = 0; ip < pg.p_size(); ++ip) {
        const Vec3 p = pg.momentum(ip);
        const double r2 = std::pow(q[0] - 0.05, 2) + std::pow(q[1] + 0.03, 2) + std::pow(p[0] - 0.1, 2) +
                          std::pow(p[1] - 0.05, 2);
        F.values[iq * pg.p_size() + ip] = std::exp(-r2 / (2.0 * sigma * sigma));
      }
    }
    err.push_back(l2_diff(moyal_gauge_rhs(F, f, 0.0).values, liouville_rhs(F, f, 0.0).values, pg.cell_volume()));
  }
  // Least-squares slope of log err against log hbar.
  double sx = 0.0;
  double sy = 0.0;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    const double x = std::log(hbars[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(err.size());
  const double order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return {{"order", order, 1.9, false}};
}

Measure criterion8(double s) {
  Measure m;
  {
    Constants k;
    k.lambda = 0.8;
    const auto grid = QGrid::balanced(1, 128, 1.0);
    const auto W = wigner(density_from_pure(cat_state(grid, k)));
    const PhaseGrid& pg = W.grid;
    const Shape shape = pg.shape();
    const CArray SF = smooth(W.values, pg, k);
    for (int axis = 0; axis < 2; ++axis) {
      CArray xF = W.values;
      CArray rhs = SF;
      CArray dSF = SF;
      const Axis& ax = axis == 0 ? pg.q().axis(0) : pg.p_axis(0);
      const double shift = axis == 0 ? k.hbar / (2.0 * k.lambda) : k.hbar * k.lambda / 2.0;
      spectral_derivative(dSF, shape, static_cast<std::size_t>(axis), ax.spacing);
      for (std::size_t iq = 0; iq < pg.q_size(); ++iq) {
        for (std::size_t ip = 0; ip < pg.p_size(); ++ip) {
          const std::size_t n = iq * pg.p_size() + ip;
          const double x = axis == 0 ? pg.q().axis(0).coord(iq) : pg.p_axis(0).coord(ip);
          xF[n] *= x;
          rhs[n] = x * SF[n] + shift * dSF[n];
        }
      }
      m.push_back({axis == 0 ? "(a) position" : "(a) momentum", max_abs_diff(smooth(xF, pg, k), rhs), 1e-9 * s});
    }
  }
  {
    const CyclotronCase cc(1.2, 1.0);
    const SmoothingSpec sm;
    const auto lhs = husimi_from_wigner(moyal_gauge_rhs(cc.w0, cc.field, 0.0), sm);
    const auto rhs = husimi_gauge_rhs(husimi_from_wigner(cc.w0, sm), cc.field, sm, 0.0);
    m.push_back({"(b) smooth(moyal) vs husimi(smooth)", max_abs_diff(lhs.values, rhs.values), 1e-8 * s});
  }
  return m;
}

Measure criterion9(double s) {
  const GaugePair gp;
  const double d = max_abs_diff(wigner_gauge_stratonovich(gp.rho_l, gp.landau).values,
                                wigner_gauge_poincare(gp.rho_l, gp.landau).values);
  return {{"W_g vs W_g_radial", d, 10.0 * 1e-8 * s, false}};
}

struct Criterion {
  int id;
  const char* title;
  std::function<Measure(double)> run;
};

} // namespace

std::vector<CriterionResult> run_acceptance(double tolerance_scale, const std::vector<int>& only,
                                            std::ostream* progress) {
  const std::vector<Criterion> all{
      {1, "gauge invariance (Landau vs symmetric)", criterion1},
      {2, "reduction identities", criterion2},
      {3, "Husimi consistency", criterion3},
      {4, "round trips", criterion4},
      {5, "reality of Husimi functions", criterion5},
      {6, "dynamics cross-validation", criterion6},
      {7, "classical limit order", criterion7},
      {8, "intertwining", criterion8},
      {9, "distinctness of chord and radial constructions", criterion9},
  };
  std::vector<CriterionResult> out;
  for (const auto& c : all) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    CriterionResult r;
    r.id = c.id;
    r.title = c.title;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r.measurements = c.run(tolerance_scale);
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (progress) *progress << format_result(r) << std::endl;
    out.push_back(std::move(r));
  }
  return out;
}

} // namespace gipsp
