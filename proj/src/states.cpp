#include "gipsp/states.hpp"

#include <cmath>

namespace gipsp {

double WaveFunction::norm_squared() const {
  double s = 0.0;
  for (const auto& v : values) s += std::norm(v);
  return s * grid.cell_volume();
}

DensityMatrix::DensityMatrix(QGrid grid, Eigen::MatrixXcd kernel, Constants constants, std::string gauge_tag)
    : grid_(std::move(grid)), constants_(constants), tag_(std::move(gauge_tag)), dense_(std::move(kernel)) {
  const auto n = static_cast<Eigen::Index>(grid_.size());
  if (dense_->rows() != n || dense_->cols() != n) throw DimensionMismatch("density kernel does not match grid");
}

DensityMatrix::DensityMatrix(QGrid grid, std::vector<PureComponent> components, Constants constants,
                             std::string gauge_tag)
    : grid_(std::move(grid)), constants_(constants), tag_(std::move(gauge_tag)), components_(std::move(components)) {
  for (const auto& c : components_) {
    if (c.weight < 0.0) throw Error("mixture weights must be non-negative");
    if (c.psi.size() != grid_.size()) throw DimensionMismatch("component does not match grid");
  }
}

Eigen::MatrixXcd DensityMatrix::kernel() const {
  if (dense_) return *dense_;
  const auto n = static_cast<Eigen::Index>(grid_.size());
  if (n > 4096) throw Error("dense kernel requested for a grid larger than 4096 points");
  Eigen::MatrixXcd k = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& c : components_) {
    Eigen::Map<const Eigen::VectorXcd> v(c.psi.data(), n);
    k += c.weight * v * v.adjoint();
  }
  return k;
}

std::vector<PureComponent> DensityMatrix::components() const {
  if (!dense_) return components_;
  const double dq = grid_.cell_volume();
  // Eigenvectors of the operator dq * rho are orthonormal in l2; rescale to unit L2(dq) norm.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(*dense_ * dq);
  std::vector<PureComponent> out;
  const auto& vals = solver.eigenvalues();
  const auto& vecs = solver.eigenvectors();
  for (Eigen::Index i = vals.size(); i-- > 0;) {
    if (std::abs(vals[i]) < 1e-15) continue;
    PureComponent c;
    c.weight = vals[i];
    c.psi.resize(static_cast<std::size_t>(vals.size()));
    for (Eigen::Index j = 0; j < vals.size(); ++j) c.psi[static_cast<std::size_t>(j)] = vecs(j, i) / std::sqrt(dq);
    out.push_back(std::move(c));
  }
  return out;
}

cplx DensityMatrix::trace() const {
  const double dv = grid_.cell_volume();
  if (dense_) return dense_->trace() * dv;
  cplx t{0.0};
  for (const auto& c : components_) {
    double s = 0.0;
    for (const auto& v : c.psi) s += std::norm(v);
    t += c.weight * s * dv;
  }
  return t;
}

double DensityMatrix::purity() const {
  const double dv = grid_.cell_volume();
  if (dense_) return ((*dense_) * (*dense_)).trace().real() * dv * dv;
  double p = 0.0;
  for (const auto& a : components_) {
    for (const auto& b : components_) {
      cplx overlap{0.0};
      for (std::size_t i = 0; i < a.psi.size(); ++i) overlap += std::conj(a.psi[i]) * b.psi[i];
      p += a.weight * b.weight * std::norm(overlap * dv);
    }
  }
  return p;
}

double DensityMatrix::hermiticity_error() const {
  if (!dense_) return 0.0;
  return (*dense_ - dense_->adjoint()).cwiseAbs().maxCoeff();
}

std::vector<double> DensityMatrix::position_density() const {
  std::vector<double> d(grid_.size(), 0.0);
  if (dense_) {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*dense_)(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    return d;
  }
  for (const auto& c : components_) {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += c.weight * std::norm(c.psi[i]);
  }
  return d;
}

DensityMatrix DensityMatrix::with_tag(std::string tag) const {
  DensityMatrix r = *this;
  r.tag_ = std::move(tag);
  return r;
}

void check_boundary(std::span<const cplx> psi, const Shape& shape, const char* what) {
  CArray density(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) density[i] = std::norm(psi[i]);
  const double frac = boundary_mass_fraction(density, shape);
  if (frac > kBoundaryThreshold) {
    throw BoundaryMassError(std::string(what) + ": boundary mass fraction " + std::to_string(frac) +
                            " exceeds threshold");
  }
}

WaveFunction coherent_state(const Vec3& q0, const Vec3& p0, const Constants& k, const QGrid& grid,
                            std::string gauge_tag) {
  k.validate();
  const auto dim = static_cast<double>(grid.dim());
  const double norm = std::pow(k.lambda / (kPi * k.hbar), dim / 4.0);
  WaveFunction psi{grid, CArray(grid.size()), k, std::move(gauge_tag)};
  for (std::size_t i = 0; i < psi.values.size(); ++i) {
    const auto x = grid.point(i);
    double r2 = 0.0;
    double phase = 0.0;
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      const double d = q0[a] - x[a];
      r2 += d * d;
      phase -= p0[a] * d / k.hbar;
    }
    psi.values[i] = norm * std::exp(-k.lambda * r2 / (2.0 * k.hbar)) * std::polar(1.0, phase);
  }
  check_boundary(psi.values, grid.shape(), "coherent_state");
  return psi;
}

WaveFunction gaussian_packet(const Vec3& q0, const Vec3& p0, const Vec3& widths, const QGrid& grid,
                             const Constants& k, std::string gauge_tag) {
  k.validate();
  WaveFunction psi{grid, CArray(grid.size()), k, std::move(gauge_tag)};
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    if (!(widths[a] > 0.0)) throw Error("gaussian_packet: widths must be positive");
  }
  for (std::size_t i = 0; i < psi.values.size(); ++i) {
    const auto x = grid.point(i);
    double expo = 0.0;
    double phase = 0.0;
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      const double d = x[a] - q0[a];
      expo -= d * d / (4.0 * widths[a] * widths[a]);
      phase += p0[a] * d / k.hbar;
    }
    psi.values[i] = std::exp(expo) * std::polar(1.0, phase);
  }
  const double n2 = psi.norm_squared();
  for (auto& v : psi.values) v /= std::sqrt(n2);
  check_boundary(psi.values, grid.shape(), "gaussian_packet");
  return psi;
}

DensityMatrix density_from_pure(const WaveFunction& psi) {
  std::vector<PureComponent> comps{{1.0, psi.values}};
  DensityMatrix lowrank(psi.grid, std::move(comps), psi.constants, psi.gauge_tag);
  if (psi.grid.dim() == 1) return DensityMatrix(psi.grid, lowrank.kernel(), psi.constants, psi.gauge_tag);
  return lowrank;
}

DensityMatrix mix(const std::vector<std::pair<double, WaveFunction>>& parts) {
  if (parts.empty()) throw Error("mix: empty mixture");
  double total = 0.0;
  std::vector<PureComponent> comps;
  for (const auto& [w, psi] : parts) {
    if (w < 0.0) throw Error("mix: negative weight");
    if (!(psi.grid == parts.front().second.grid)) throw DimensionMismatch("mix: grids differ");
    if (psi.gauge_tag != parts.front().second.gauge_tag) throw Error("mix: components in different gauges");
    total += w;
    comps.push_back({w, psi.values});
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error("mix: weights must sum to one");
  const auto& ref = parts.front().second;
  DensityMatrix lowrank(ref.grid, std::move(comps), ref.constants, ref.gauge_tag);
  if (ref.grid.dim() == 1) return DensityMatrix(ref.grid, lowrank.kernel(), ref.constants, ref.gauge_tag);
  return lowrank;
}

std::string rotated_tag(const std::string& tag, const GaugeFn& chi, int sign) {
  const Poly c = chi.chi * static_cast<double>(sign);
  return "gauged(" + tag + "; chi=" + c.to_string() + ")";
}

namespace {

std::vector<double> phase_table(const QGrid& grid, const GaugeFn& chi, int sign, double t, const Constants& k) {
  std::vector<double> theta(grid.size());
  const double scale = sign * k.e / (k.c * k.hbar);
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = scale * chi(grid.point(i), t);
  return theta;
}

} // namespace

WaveFunction gauge_rotate(const WaveFunction& psi, const GaugeFn& chi, int sign, double t) {
  const auto theta = phase_table(psi.grid, chi, sign, t, psi.constants);
  WaveFunction out = psi;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] *= std::polar(1.0, theta[i]);
  out.gauge_tag = rotated_tag(psi.gauge_tag, chi, sign);
  return out;
}

DensityMatrix gauge_rotate(const DensityMatrix& rho, const GaugeFn& chi, int sign, double t) {
  const auto theta = phase_table(rho.grid(), chi, sign, t, rho.constants());
  return rotate_by_phase(rho, theta, rotated_tag(rho.gauge_tag(), chi, sign));
}

DensityMatrix rotate_by_phase(const DensityMatrix& rho, std::span<const double> theta, std::string new_tag) {
  if (theta.size() != rho.grid().size()) throw DimensionMismatch("rotate_by_phase: table size mismatch");
  if (rho.is_dense()) {
    Eigen::MatrixXcd k = rho.kernel();
    for (Eigen::Index a = 0; a < k.rows(); ++a) {
      for (Eigen::Index b = 0; b < k.cols(); ++b) {
        k(a, b) *= std::polar(1.0, theta[static_cast<std::size_t>(a)] - theta[static_cast<std::size_t>(b)]);
      }
    }
    return DensityMatrix(rho.grid(), std::move(k), rho.constants(), std::move(new_tag));
  }
  auto comps = rho.components();
  for (auto& c : comps) {
    for (std::size_t i = 0; i < c.psi.size(); ++i) c.psi[i] *= std::polar(1.0, theta[i]);
  }
  return DensityMatrix(rho.grid(), std::move(comps), rho.constants(), std::move(new_tag));
}

} // namespace gipsp
