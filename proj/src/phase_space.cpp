#include "gipsp/phase_space.hpp"

#include <array>
#include <cmath>

namespace gipsp {

std::string to_string(Kind kind) {
  switch (kind) {
  case Kind::W: return "W";
  case Kind::Wg: return "W_g";
  case Kind::WgRadial: return "W_g_radial";
  case Kind::Q: return "Q";
  case Kind::Qg: return "Q_g";
  case Kind::QgRadial: return "Q_g_radial";
  case Kind::Classical: return "classical";
  }
  return "unknown";
}

Kind kind_from_string(const std::string& name) {
  for (Kind k : {Kind::W, Kind::Wg, Kind::WgRadial, Kind::Q, Kind::Qg, Kind::QgRadial, Kind::Classical}) {
    if (to_string(k) == name) return k;
  }
  throw Error("unknown phase-space kind '" + name + "'");
}

bool is_husimi(Kind kind) { return kind == Kind::Q || kind == Kind::Qg || kind == Kind::QgRadial; }

Kind husimi_of(Kind kind) {
  switch (kind) {
  case Kind::W: return Kind::Q;
  case Kind::Wg: return Kind::Qg;
  case Kind::WgRadial: return Kind::QgRadial;
  case Kind::Classical: return Kind::Classical;
  default: throw Error("husimi_of: input is already a Husimi kind");
  }
}

Kind wigner_of(Kind kind) {
  switch (kind) {
  case Kind::Q: return Kind::W;
  case Kind::Qg: return Kind::Wg;
  case Kind::QgRadial: return Kind::WgRadial;
  case Kind::Classical: return Kind::Classical;
  default: throw Error("wigner_of: input is not a Husimi kind");
  }
}

double PhaseSpaceFunction::total() const {
  double s = 0.0;
  for (const auto& v : values) s += v.real();
  return s * grid.cell_volume();
}

std::vector<double> PhaseSpaceFunction::position_marginal() const {
  const std::size_t np = grid.p_size();
  double dp = 1.0;
  for (std::size_t a = 0; a < grid.dim(); ++a) dp *= grid.p_axis(a).spacing;
  std::vector<double> out(grid.q_size(), 0.0);
  for (std::size_t j = 0; j < out.size(); ++j) {
    for (std::size_t k = 0; k < np; ++k) out[j] += values[j * np + k].real();
    out[j] *= dp;
  }
  return out;
}

void require_gauge(const DensityMatrix& rho, const GaugeField& f, const char* what) {
  if (rho.gauge_tag() != f.tag()) {
    throw GaugeTagMismatch(std::string(what) + ": state is expressed in gauge '" + rho.gauge_tag() +
                           "' but the field is '" + f.tag() + "'");
  }
}

namespace {

constexpr std::size_t kMaxDim = 3;

long signed_index(std::size_t k, std::size_t n) {
  return k < n / 2 ? static_cast<long>(k) : static_cast<long>(k) - static_cast<long>(n);
}

/// rho(x1, x2) at nodes of the position grid or of the grid shifted by half a
/// cell (per axis, selected by a bit mask), through trigonometric interpolation.
class ChordSampler {
public:
  explicit ChordSampler(const DensityMatrix& rho) : grid_(rho.grid()), dim_(grid_.dim()) {
    const Shape shape = grid_.shape();
    if (rho.is_dense()) {
      dense_[0] = rho.kernel();
      dense_[1] = dense_[0];
      Shape ks{grid_.size(), grid_.size()};
      // Column-major storage: axis 1 of the row-major view is q1.
      std::span<cplx> data(dense_[1].data(), static_cast<std::size_t>(dense_[1].size()));
      spectral_shift(data, ks, 0, 0.5);
      spectral_shift(data, ks, 1, 0.5);
      return;
    }
    const std::size_t masks = std::size_t{1} << dim_;
    for (const auto& c : rho.components()) {
      Component comp{c.weight, {}};
      for (std::size_t mask = 0; mask < masks; ++mask) {
        CArray v = c.psi;
        for (std::size_t a = 0; a < dim_; ++a) {
          if (mask & (std::size_t{1} << a)) spectral_shift(v, shape, a, 0.5);
        }
        comp.shifted.push_back(std::move(v));
      }
      comps_.push_back(std::move(comp));
    }
  }

  cplx operator()(const std::array<long, kMaxDim>& i1, const std::array<long, kMaxDim>& i2,
                  std::size_t mask) const {
    std::size_t f1 = 0;
    std::size_t f2 = 0;
    for (std::size_t a = 0; a < dim_; ++a) {
      f1 = f1 * grid_.axis(a).n + static_cast<std::size_t>(i1[a]);
      f2 = f2 * grid_.axis(a).n + static_cast<std::size_t>(i2[a]);
    }
    if (comps_.empty()) {
      return dense_[mask](static_cast<Eigen::Index>(f1), static_cast<Eigen::Index>(f2));
    }
    cplx s{0.0};
    for (const auto& c : comps_) s += c.weight * c.shifted[mask][f1] * std::conj(c.shifted[mask][f2]);
    return s;
  }

private:
  struct Component {
    double weight;
    std::vector<CArray> shifted;
  };
  QGrid grid_;
  std::size_t dim_;
  std::array<Eigen::MatrixXcd, 2> dense_;
  std::vector<Component> comps_;
};

std::vector<std::size_t> momentum_axes(std::size_t dim) {
  std::vector<std::size_t> axes;
  for (std::size_t a = 0; a < dim; ++a) axes.push_back(dim + a);
  return axes;
}

/// Chord samples rho(q_j - u_m/2, q_j + u_m/2) times the optional gauge phase,
/// transformed over u into momentum.
PhaseSpaceFunction chord_transform(const DensityMatrix& rho, const PotentialSampler* sampler, Kind kind,
                                   std::string field_tag, double t) {
  const QGrid& qg = rho.grid();
  const auto& k = rho.constants();
  {
    const auto dens = rho.position_density();
    CArray d(dens.begin(), dens.end());
    if (boundary_mass_fraction(d, qg.shape()) > kBoundaryThreshold) {
      throw BoundaryMassError("wigner: state weight reaches the boundary shell");
    }
  }
  PhaseGrid pg(qg, k.hbar);
  const std::size_t dim = qg.dim();
  const std::size_t nq = qg.size();
  const std::size_t np = pg.p_size();
  const ChordSampler sample(rho);

  CArray g(nq * np);
  parallel_for(nq, [&](std::size_t jflat) {
    std::array<long, kMaxDim> j{};
    {
      std::size_t rest = jflat;
      for (std::size_t a = dim; a-- > 0;) {
        j[a] = static_cast<long>(rest % qg.axis(a).n);
        rest /= qg.axis(a).n;
      }
    }
    const Vec3 qj = qg.point(jflat);
    for (std::size_t mflat = 0; mflat < np; ++mflat) {
      std::array<long, kMaxDim> i1{};
      std::array<long, kMaxDim> i2{};
      Vec3 u{0.0, 0.0, 0.0};
      std::size_t mask = 0;
      bool valid = true;
      double sign = 1.0;
      std::size_t rest = mflat;
      for (std::size_t a = dim; a-- > 0;) {
        const std::size_t n = qg.axis(a).n;
        const long m = signed_index(rest % n, n);
        rest /= n;
        if (m == -static_cast<long>(n / 2)) valid = false;
        const long h1 = 2 * j[a] - m;
        const long h2 = 2 * j[a] + m;
        if (m % 2 != 0) {
          mask |= std::size_t{1} << a;
          i1[a] = (h1 - 1) / 2;
          i2[a] = (h2 - 1) / 2;
          sign = -sign;
        } else {
          i1[a] = h1 / 2;
          i2[a] = h2 / 2;
        }
        const long nl = static_cast<long>(n);
        if (i1[a] < 0 || i1[a] >= nl || i2[a] < 0 || i2[a] >= nl) valid = false;
        u[a] = static_cast<double>(m) * qg.axis(a).spacing;
      }
      cplx v{0.0};
      if (valid) {
        v = sign * sample(i1, i2, mask);
        if (sampler != nullptr) v *= std::polar(1.0, sampler->chord_phase(qj, u));
      }
      g[jflat * np + mflat] = v;
    }
  });

  const Shape shape = pg.shape();
  const auto axes = momentum_axes(dim);
  fft(g, shape, axes, +1);
  const double prefactor = std::pow(1.0 / (2.0 * kPi * k.hbar), static_cast<double>(dim)) * qg.cell_volume();
  for (auto& v : g) v *= prefactor;
  return PhaseSpaceFunction{pg, std::move(g), kind, k, std::move(field_tag), t};
}

DensityMatrix inverse_chord_transform(const PhaseSpaceFunction& w, const PotentialSampler* sampler,
                                      std::string gauge_tag) {
  const PhaseGrid& pg = w.grid;
  if (pg.dim() != 1) throw Error("density reconstruction is implemented for one-dimensional grids");
  if (w.values.size() != pg.size()) throw DimensionMismatch("phase-space values do not match grid");
  const Axis& ax = pg.q().axis(0);
  const std::size_t n = ax.n;
  const Shape shape = pg.shape();

  CArray g = w.values;
  const std::size_t paxis[] = {1};
  fft(g, shape, paxis, -1);
  const double dp = pg.p_axis(0).spacing;
  for (std::size_t j = 0; j < n; ++j) {
    const Vec3 qj{ax.coord(j), 0.0, 0.0};
    for (std::size_t mi = 0; mi < n; ++mi) {
      const long m = signed_index(mi, n);
      cplx& v = g[j * n + mi];
      v *= (m % 2 != 0 ? -dp : dp);
      if (sampler != nullptr) {
        const Vec3 u{static_cast<double>(m) * ax.spacing, 0.0, 0.0};
        v *= std::polar(1.0, -sampler->chord_phase(qj, u));
      }
    }
  }
  CArray half = g;
  spectral_shift(half, shape, 0, 0.5);

  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  const long nl = static_cast<long>(n);
  for (long a = 0; a < nl; ++a) {
    for (long b = 0; b < nl; ++b) {
      const long m = b - a;
      if (m <= -nl / 2 || m >= nl / 2) continue;
      const auto mi = static_cast<std::size_t>((m + nl) % nl);
      const long s = a + b;
      cplx v = (s % 2 == 0) ? g[static_cast<std::size_t>(s / 2) * n + mi]
                            : half[static_cast<std::size_t>((s - 1) / 2) * n + mi];
      rho(a, b) = v;
    }
  }
  return DensityMatrix(pg.q(), std::move(rho), w.constants, std::move(gauge_tag));
}

} // namespace

PhaseSpaceFunction wigner(const DensityMatrix& rho) {
  return chord_transform(rho, nullptr, Kind::W, rho.gauge_tag(), 0.0);
}

DensityMatrix inverse_wigner(const PhaseSpaceFunction& w) {
  return inverse_chord_transform(w, nullptr, w.field_tag);
}

PhaseSpaceFunction wigner_gauge_stratonovich(const DensityMatrix& rho, const GaugeField& f, double t) {
  require_gauge(rho, f, "wigner_gauge_stratonovich");
  const PotentialSampler sampler(f, t, rho.constants());
  return chord_transform(rho, &sampler, Kind::Wg, f.tag(), t);
}

DensityMatrix inverse_wigner_gauge(const PhaseSpaceFunction& wg, const GaugeField& f, double t) {
  const PotentialSampler sampler(f, t, wg.constants);
  return inverse_chord_transform(wg, &sampler, f.tag());
}

std::vector<double> radial_phase_table(const QGrid& grid, const GaugeField& f, double t, const Constants& k) {
  const PotentialSampler sampler(f, t, k);
  std::vector<double> lam(grid.size());
  for (std::size_t i = 0; i < lam.size(); ++i) lam[i] = sampler.radial(grid.point(i));
  return lam;
}

PhaseSpaceFunction wigner_gauge_poincare(const DensityMatrix& rho, const GaugeField& f, double t) {
  require_gauge(rho, f, "wigner_gauge_poincare");
  auto theta = radial_phase_table(rho.grid(), f, t, rho.constants());
  for (auto& v : theta) v = -v;
  const auto rotated = rotate_by_phase(rho, theta, rho.gauge_tag());
  return chord_transform(rotated, nullptr, Kind::WgRadial, f.tag(), t);
}

DensityMatrix inverse_wigner_poincare(const PhaseSpaceFunction& wg, const GaugeField& f, double t) {
  const auto rho_lambda = inverse_chord_transform(wg, nullptr, f.tag());
  const auto theta = radial_phase_table(rho_lambda.grid(), f, t, wg.constants);
  return rotate_by_phase(rho_lambda, theta, f.tag());
}

} // namespace gipsp
