#include <cmath>

#include <Eigen/Eigenvalues>

#include "gipsp/dynamics.hpp"

namespace gipsp {

namespace {

constexpr std::size_t kMaxDenseGrid = 4096;

/// Vector potential components along the grid axes and the effective scalar
/// potential e phi + e^2 A_perp^2 / (2 m c^2) for components without a grid axis.
struct PotentialTable {
  std::vector<std::vector<double>> A;
  std::vector<double> V;
};

PotentialTable tabulate(const QGrid& g, const GaugeField& f, double t, const Constants& k) {
  const auto pot = f.potentials(k.c);
  const std::size_t dim = g.dim();
  PotentialTable tab{std::vector<std::vector<double>>(dim, std::vector<double>(g.size())),
                     std::vector<double>(g.size())};
  for (std::size_t i = 0; i < g.size(); ++i) {
    const Vec3 q = g.point(i);
    double v = k.e * pot.phi(q, t);
    for (std::size_t a = 0; a < 3; ++a) {
      const double Aa = pot.A[a](q, t);
      if (a < dim) {
        tab.A[a][i] = Aa;
      } else {
        v += k.e * k.e * Aa * Aa / (2.0 * k.m * k.c * k.c);
      }
    }
    tab.V[i] = v;
  }
  return tab;
}

bool time_dependent(const GaugeField& f, const Constants& k) {
  const auto pot = f.potentials(k.c);
  if (pot.phi.depends_on(3)) return true;
  for (const auto& a : pot.A) {
    if (a.depends_on(3)) return true;
  }
  return false;
}

/// exp(-i tau (hbar kappa - e A_a/c)^2 / (2 m hbar)) applied along axis a.
void kinetic_factor(CArray& psi, const QGrid& g, std::size_t a, double tau, const std::vector<double>& A,
                    const Constants& k) {
  const Shape shape = g.shape();
  const std::size_t axes[] = {a};
  const Axis& ax = g.axis(a);
  const std::size_t stride = stride_of(shape, a);
  fft(psi, shape, axes, -1);
  const double inv = 1.0 / static_cast<double>(ax.n);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double kappa = ax.wavenumber((i / stride) % ax.n);
    const double pi = k.hbar * kappa - k.e * A[i] / k.c;
    psi[i] *= std::polar(inv, -tau * pi * pi / (2.0 * k.m * k.hbar));
  }
  fft(psi, shape, axes, +1);
}

void split_step(CArray& psi, const QGrid& g, double h, const PotentialTable& tab, const Constants& k) {
  const std::size_t dim = g.dim();
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -0.5 * h * tab.V[i] / k.hbar);
  for (std::size_t a = 0; a < dim; ++a) kinetic_factor(psi, g, a, 0.5 * h, tab.A[a], k);
  for (std::size_t a = dim; a-- > 0;) kinetic_factor(psi, g, a, 0.5 * h, tab.A[a], k);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= std::polar(1.0, -0.5 * h * tab.V[i] / k.hbar);
}

Eigen::MatrixXcd derivative_matrix(const QGrid& g, std::size_t a) {
  const std::size_t n = g.size();
  Eigen::MatrixXcd D(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  CArray col(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::fill(col.begin(), col.end(), cplx{0.0});
    col[j] = 1.0;
    spectral_derivative(col, g.shape(), a, g.axis(a).spacing);
    for (std::size_t i = 0; i < n; ++i) D(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
  }
  return D;
}

Eigen::MatrixXcd hamiltonian(const QGrid& g, const PotentialTable& tab, const Constants& k) {
  const auto n = static_cast<Eigen::Index>(g.size());
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
  for (std::size_t a = 0; a < g.dim(); ++a) {
    Eigen::MatrixXcd Pi = cplx{0.0, -k.hbar} * derivative_matrix(g, a);
    for (Eigen::Index i = 0; i < n; ++i) Pi(i, i) -= k.e * tab.A[a][static_cast<std::size_t>(i)] / k.c;
    H += Pi.adjoint() * Pi / (2.0 * k.m);
  }
  for (Eigen::Index i = 0; i < n; ++i) H(i, i) += tab.V[static_cast<std::size_t>(i)];
  return 0.5 * (H + H.adjoint());
}

void dense_evolve(CArray& psi, const Eigen::MatrixXcd& H, double h, const Constants& k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H);
  const auto& V = solver.eigenvectors();
  const auto& ev = solver.eigenvalues();
  Eigen::Map<Eigen::VectorXcd> v(psi.data(), static_cast<Eigen::Index>(psi.size()));
  Eigen::VectorXcd c = V.adjoint() * v;
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::polar(1.0, -ev[i] * h / k.hbar);
  v = V * c;
}

} // namespace

WaveFunction schrodinger_propagate(const WaveFunction& psi0, const EvolutionSpec& spec, double t0) {
  spec.validate();
  const QGrid& g = psi0.grid;
  const Constants& k = psi0.constants;
  const double span = spec.t_final - t0;
  if (span < 0.0) throw Error("schrodinger_propagate: t_final precedes the initial time");
  const auto steps = static_cast<std::size_t>(std::ceil(span / spec.dt - 1e-12));
  WaveFunction out = psi0;
  if (steps == 0) return out;
  const double h = span / static_cast<double>(steps);
  const bool varying = time_dependent(spec.field, k);

  if (spec.propagator == Propagator::SchrodingerSplit) {
    const auto pot = spec.field.potentials(k.c);
    for (std::size_t a = 0; a < g.dim(); ++a) {
      if (pot.A[a].depends_on(static_cast<int>(a))) {
        throw UnsupportedField("split propagator needs each A_i independent of q_i; field '" + spec.field.tag() +
                               "' is not");
      }
    }
    PotentialTable tab = tabulate(g, spec.field, t0 + 0.5 * h, k);
    for (std::size_t s = 0; s < steps; ++s) {
      if (varying) tab = tabulate(g, spec.field, t0 + (static_cast<double>(s) + 0.5) * h, k);
      split_step(out.values, g, h, tab, k);
    }
    return out;
  }
  if (spec.propagator == Propagator::SchrodingerDense) {
    if (g.size() > kMaxDenseGrid) throw Error("dense propagator is limited to grids of at most 4096 points");
    if (!varying) {
      dense_evolve(out.values, hamiltonian(g, tabulate(g, spec.field, t0, k), k), span, k);
      return out;
    }
    for (std::size_t s = 0; s < steps; ++s) {
      const auto tab = tabulate(g, spec.field, t0 + (static_cast<double>(s) + 0.5) * h, k);
      dense_evolve(out.values, hamiltonian(g, tab, k), h, k);
    }
    return out;
  }
  throw Error("schrodinger_propagate: propagator must be schrodinger_split or schrodinger_dense");
}

double energy(const WaveFunction& psi, const GaugeField& f, double t) {
  const QGrid& g = psi.grid;
  const Constants& k = psi.constants;
  const auto tab = tabulate(g, f, t, k);
  double e = 0.0;
  for (std::size_t a = 0; a < g.dim(); ++a) {
    CArray d = psi.values;
    spectral_derivative(d, g.shape(), a, g.axis(a).spacing);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const cplx pi = cplx{0.0, -k.hbar} * d[i] - k.e * tab.A[a][i] / k.c * psi.values[i];
      e += std::norm(pi) / (2.0 * k.m);
    }
  }
  for (std::size_t i = 0; i < psi.values.size(); ++i) e += tab.V[i] * std::norm(psi.values[i]);
  return e * g.cell_volume() / psi.norm_squared();
}

} // namespace gipsp
