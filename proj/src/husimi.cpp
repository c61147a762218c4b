#include "gipsp/husimi.hpp"

#include <array>
#include <cmath>
#include <numeric>

namespace gipsp {

void SmoothingSpec::validate() const {
  if (!(beta > 0.0 && beta <= 1.0)) throw Error("smoothing: beta must lie in (0, 1]");
  if (!(eps_reg >= 0.0)) throw Error("smoothing: eps_reg must be non-negative");
}

namespace {

constexpr std::size_t kMaxKernelGrid = 64;

/// Spacing of every phase-space axis, q axes first.
std::vector<double> phase_spacings(const PhaseGrid& g) {
  std::vector<double> d;
  for (std::size_t a = 0; a < g.dim(); ++a) d.push_back(g.q().axis(a).spacing);
  for (std::size_t a = 0; a < g.dim(); ++a) d.push_back(g.p_axis(a).spacing);
  return d;
}

std::vector<std::size_t> all_axes(std::size_t rank) {
  std::vector<std::size_t> axes(rank);
  std::iota(axes.begin(), axes.end(), std::size_t{0});
  return axes;
}

/// Calls body(flat, kappa) for every bin of the full phase-space spectrum.
template <class Body>
void for_each_wavevector(const PhaseGrid& g, Body&& body) {
  const Shape shape = g.shape();
  const auto spacing = phase_spacings(g);
  const std::size_t rank = shape.size();
  std::array<double, 6> kappa{};
  const std::size_t total = shape_size(shape);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    for (std::size_t a = rank; a-- > 0;) {
      const Axis ax{shape[a], spacing[a], 0.0};
      kappa[a] = ax.wavenumber(rest % shape[a]);
      rest /= shape[a];
    }
    body(flat, kappa);
  }
}

/// Exponent of the smoothing multiplier: -(hbar kq^2/(4 lambda) + lambda hbar kp^2/4).
double smoothing_exponent(const std::array<double, 6>& kappa, std::size_t dim, const Constants& k) {
  double e = 0.0;
  for (std::size_t a = 0; a < dim; ++a) {
    e -= k.hbar * kappa[a] * kappa[a] / (4.0 * k.lambda);
    e -= k.lambda * k.hbar * kappa[dim + a] * kappa[dim + a] / 4.0;
  }
  return e;
}

/// Squared elliptic radius of a wavevector in units of the per-axis Nyquist wavenumber.
double band_radius2(const std::array<double, 6>& kappa, const std::vector<double>& spacing) {
  double r = 0.0;
  for (std::size_t a = 0; a < spacing.size(); ++a) {
    const double x = kappa[a] * spacing[a] / kPi;
    r += x * x;
  }
  return r;
}

void require_kernel_grid(const PhaseGrid& g, const char* what) {
  if (g.dim() != 1 || g.q().axis(0).n > kMaxKernelGrid) {
    throw Error(std::string(what) + ": kernel evaluation is limited to 1-D grids with n <= 64");
  }
}

/// Elliptic band test for the (v, u) pair of the explicit quantizer sums.
bool inside_band(double v, double u, const PhaseGrid& g, double beta) {
  const double kq = v / g.hbar();
  const double kp = u / g.hbar();
  const double rq = kq * g.q().axis(0).spacing / kPi;
  const double rp = kp * g.p_axis(0).spacing / kPi;
  return rq * rq + rp * rp <= beta * beta;
}

enum class KernelPhase { Chord, Radial };

/// Explicit quantizer sums with the band cutoff of the spectral pipeline.
/// The chord or radial phase is applied at the end.
DensityMatrix quantizer_kernel(const PhaseSpaceFunction& qf, const GaugeField& f, const SmoothingSpec& s, double t,
                               KernelPhase phase_kind, const char* what) {
  s.validate();
  const PhaseGrid& g = qf.grid;
  require_kernel_grid(g, what);
  const Constants& k = qf.constants;
  const Axis& qa = g.q().axis(0);
  const Axis& pa = g.p_axis(0);
  const std::size_t n = qa.n;
  const double hbar = k.hbar;
  const double dv = pa.spacing;

  // v nodes share the momentum lattice spacing, centered on zero.
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = (static_cast<double>(i) - static_cast<double>(n / 2)) * dv;

  // Over q first.
  std::vector<cplx> qhat(n * n);
  for (std::size_t iv = 0; iv < n; ++iv) {
    for (std::size_t l = 0; l < n; ++l) {
      cplx acc{0.0};
      for (std::size_t j = 0; j < n; ++j) {
        acc += std::polar(1.0, -v[iv] * qa.coord(j) / hbar) * qf.values[j * n + l];
      }
      qhat[iv * n + l] = acc * qa.spacing;
    }
  }
  // Then over p, for every chord length u = m dq.
  const long nl = static_cast<long>(n);
  const std::size_t nm = 2 * n - 1;
  std::vector<cplx> sp(nm * n);
  for (long m = -(nl - 1); m < nl; ++m) {
    const double u = static_cast<double>(m) * qa.spacing;
    for (std::size_t iv = 0; iv < n; ++iv) {
      cplx acc{0.0};
      if (inside_band(v[iv], u, g, s.beta)) {
        for (std::size_t l = 0; l < n; ++l) acc += std::polar(1.0, -pa.coord(l) * u / hbar) * qhat[iv * n + l];
        acc *= pa.spacing * std::exp(v[iv] * v[iv] / (4.0 * hbar * k.lambda));
      }
      sp[static_cast<std::size_t>(m + nl - 1) * n + iv] = acc;
    }
  }
  // Finally over v.
  const PotentialSampler sampler(f, t, k);
  std::vector<double> lam(n, 0.0);
  if (phase_kind == KernelPhase::Radial) {
    for (std::size_t i = 0; i < n; ++i) lam[i] = sampler.radial(Vec3{qa.coord(i), 0.0, 0.0});
  }
  Eigen::MatrixXcd rho(nl, nl);
  for (long a = 0; a < nl; ++a) {
    for (long b = 0; b < nl; ++b) {
      const long m = b - a;
      const double q1 = qa.coord(static_cast<std::size_t>(a));
      const double q2 = qa.coord(static_cast<std::size_t>(b));
      const double u = q2 - q1;
      const double c = 0.5 * (q1 + q2);
      cplx acc{0.0};
      const cplx* row = &sp[static_cast<std::size_t>(m + nl - 1) * n];
      for (std::size_t iv = 0; iv < n; ++iv) acc += std::polar(1.0, v[iv] * c / hbar) * row[iv];
      acc *= dv / (2.0 * kPi * hbar) * std::exp(k.lambda * u * u / (4.0 * hbar));
      double theta = 0.0;
      if (phase_kind == KernelPhase::Chord) {
        theta = -sampler.chord_phase(Vec3{c, 0.0, 0.0}, Vec3{u, 0.0, 0.0});
      } else {
        theta = lam[static_cast<std::size_t>(a)] - lam[static_cast<std::size_t>(b)];
      }
      rho(a, b) = acc * std::polar(1.0, theta);
    }
  }
  return DensityMatrix(g.q(), std::move(rho), k, f.tag());
}

/// (2 pi hbar)^{-N} |<alpha_{q,p}|psi_i>|^2 summed over the pure components of rho.
PhaseSpaceFunction overlap_impl(const DensityMatrix& rho, Kind kind, std::string tag, double t) {
  const QGrid& qg = rho.grid();
  const Constants& k = rho.constants();
  k.validate();
  const PhaseGrid pg(qg, k.hbar);
  const std::size_t dim = qg.dim();
  const std::size_t nq = qg.size();
  const std::size_t np = pg.p_size();
  const Shape qshape = qg.shape();
  const auto comps = rho.components();

  const double norm = std::pow(k.lambda / (kPi * k.hbar), static_cast<double>(dim) / 4.0);
  const double pref = std::pow(2.0 * kPi * k.hbar, -static_cast<double>(dim));
  const double dv = qg.cell_volume();

  // (-1)^{sum j} moves the zero-momentum bin to the centre of the p axis.
  std::vector<double> parity(nq, 1.0);
  for (std::size_t i = 0; i < nq; ++i) {
    std::size_t rest = i;
    int s = 0;
    for (std::size_t a = dim; a-- > 0;) {
      s += static_cast<int>(rest % qshape[a]);
      rest /= qshape[a];
    }
    if (s % 2) parity[i] = -1.0;
  }
  std::vector<std::size_t> axes(dim);
  std::iota(axes.begin(), axes.end(), std::size_t{0});

  CArray out(nq * np, cplx{0.0});
  parallel_for(nq, [&](std::size_t iq) {
    const Vec3 qc = qg.point(iq);
    CArray window(nq);
    for (std::size_t i = 0; i < nq; ++i) {
      const Vec3 x = qg.point(i);
      double r2 = 0.0;
      for (std::size_t a = 0; a < dim; ++a) r2 += (x[a] - qc[a]) * (x[a] - qc[a]);
      window[i] = norm * std::exp(-k.lambda * r2 / (2.0 * k.hbar)) * parity[i] * dv;
    }
    CArray buf(nq);
    for (const auto& c : comps) {
      for (std::size_t i = 0; i < nq; ++i) buf[i] = window[i] * c.psi[i];
      fft(buf, qshape, axes, -1);
      for (std::size_t ip = 0; ip < np; ++ip) out[iq * np + ip] += c.weight * pref * std::norm(buf[ip]);
    }
  });
  return PhaseSpaceFunction{pg, std::move(out), kind, k, std::move(tag), t};
}

DensityMatrix rotate_radial(const DensityMatrix& rho, const GaugeField& f, double t, double sign,
                            std::string tag) {
  auto theta = radial_phase_table(rho.grid(), f, t, rho.constants());
  for (auto& v : theta) v *= sign;
  return rotate_by_phase(rho, theta, std::move(tag));
}

} // namespace

CArray smooth(std::span<const cplx> values, const PhaseGrid& grid, const Constants& k) {
  if (values.size() != grid.size()) throw DimensionMismatch("smooth: values do not match grid");
  CArray data(values.begin(), values.end());
  const Shape shape = grid.shape();
  const auto axes = all_axes(shape.size());
  fft(data, shape, axes, -1);
  const double inv = 1.0 / static_cast<double>(data.size());
  for_each_wavevector(grid, [&](std::size_t flat, const std::array<double, 6>& kappa) {
    data[flat] *= std::exp(smoothing_exponent(kappa, grid.dim(), k)) * inv;
  });
  fft(data, shape, axes, +1);
  return data;
}

PhaseSpaceFunction husimi_from_wigner(const PhaseSpaceFunction& w, const SmoothingSpec& s) {
  s.validate();
  PhaseSpaceFunction out = w;
  out.kind = husimi_of(w.kind);
  out.values = smooth(w.values, w.grid, w.constants);
  return out;
}

PhaseSpaceFunction wigner_from_husimi(const PhaseSpaceFunction& q, const SmoothingSpec& s) {
  s.validate();
  const PhaseGrid& g = q.grid;
  const Shape shape = g.shape();
  const auto axes = all_axes(shape.size());
  const auto spacing = phase_spacings(g);
  CArray data = q.values;
  fft(data, shape, axes, -1);

  double power_in = 0.0;
  double power_out = 0.0;
  const double inv = 1.0 / static_cast<double>(data.size());
  const double beta2 = s.beta * s.beta;
  for_each_wavevector(g, [&](std::size_t flat, const std::array<double, 6>& kappa) {
    const double p = std::norm(data[flat]);
    if (band_radius2(kappa, spacing) <= beta2) {
      power_in += p;
      data[flat] *= std::exp(-smoothing_exponent(kappa, g.dim(), q.constants)) * inv;
    } else {
      power_out += p;
      data[flat] = 0.0;
    }
  });
  const double total = power_in + power_out;
  if (total > 0.0 && power_out / total > s.eps_reg) {
    throw IllPosedInverse("wigner_from_husimi: spectral power fraction " + std::to_string(power_out / total) +
                          " outside the kept band exceeds eps_reg");
  }
  fft(data, shape, axes, +1);
  // Husimi kinds are real; an imaginary part here is round-off amplified by
  // the growing multiplier.
  for (auto& v : data) v = v.real();
  PhaseSpaceFunction out = q;
  out.kind = wigner_of(q.kind);
  out.values = std::move(data);
  return out;
}

PhaseSpaceFunction husimi_overlap(const DensityMatrix& rho, const SmoothingSpec& s) {
  s.validate();
  return overlap_impl(rho, Kind::Q, rho.gauge_tag(), 0.0);
}

PhaseSpaceFunction husimi_gauge(const DensityMatrix& rho, const GaugeField& f, const SmoothingSpec& s, double t) {
  return husimi_from_wigner(wigner_gauge_stratonovich(rho, f, t), s);
}

PhaseSpaceFunction husimi_gauge_kernel(const DensityMatrix& rho, const GaugeField& f, double t) {
  require_gauge(rho, f, "husimi_gauge_kernel");
  const Constants& k = rho.constants();
  const PhaseGrid pg(rho.grid(), k.hbar);
  require_kernel_grid(pg, "husimi_gauge_kernel");
  const Axis& qa = pg.q().axis(0);
  const Axis& pa = pg.p_axis(0);
  const std::size_t n = qa.n;
  const Eigen::MatrixXcd r = rho.kernel();
  const PotentialSampler sampler(f, t, k);
  const double pref = std::sqrt(k.lambda / (kPi * k.hbar)) / (2.0 * kPi * k.hbar) * qa.spacing * qa.spacing;

  // Chord phase and momentum-free part of each (q1, q2) pair.
  Eigen::MatrixXcd chord(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const double q1 = qa.coord(a);
      const double q2 = qa.coord(b);
      const double ph = sampler.chord_phase(Vec3{0.5 * (q1 + q2), 0.0, 0.0}, Vec3{q2 - q1, 0.0, 0.0});
      chord(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          r(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * std::polar(1.0, ph);
    }
  }
  CArray out(n * n);
  parallel_for(n, [&](std::size_t iq) {
    const double q = qa.coord(iq);
    std::vector<double> gauss(n);
    for (std::size_t a = 0; a < n; ++a) {
      const double d = q - qa.coord(a);
      gauss[a] = std::exp(-k.lambda * d * d / (2.0 * k.hbar));
    }
    for (std::size_t ip = 0; ip < n; ++ip) {
      const double p = pa.coord(ip);
      cplx acc{0.0};
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          const double u = qa.coord(b) - qa.coord(a);
          acc += chord(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) * gauss[a] * gauss[b] *
                 std::polar(1.0, u * p / k.hbar);
        }
      }
      out[iq * n + ip] = acc * pref;
    }
  });
  return PhaseSpaceFunction{pg, std::move(out), Kind::Qg, k, f.tag(), t};
}

DensityMatrix density_from_husimi_gauge(const PhaseSpaceFunction& qg, const GaugeField& f, const SmoothingSpec& s,
                                        double t) {
  return inverse_wigner_gauge(wigner_from_husimi(qg, s), f, t);
}

DensityMatrix density_from_husimi_gauge_kernel(const PhaseSpaceFunction& qg, const GaugeField& f,
                                               const SmoothingSpec& s, double t) {
  return quantizer_kernel(qg, f, s, t, KernelPhase::Chord, "density_from_husimi_gauge_kernel");
}

PhaseSpaceFunction husimi_gauge_poincare(const DensityMatrix& rho, const GaugeField& f, const SmoothingSpec& s,
                                         double t) {
  s.validate();
  require_gauge(rho, f, "husimi_gauge_poincare");
  const auto rotated = rotate_radial(rho, f, t, -1.0, rho.gauge_tag());
  return overlap_impl(rotated, Kind::QgRadial, f.tag(), t);
}

DensityMatrix density_from_husimi_poincare(const PhaseSpaceFunction& qg, const GaugeField& f,
                                           const SmoothingSpec& s, double t) {
  return inverse_wigner_poincare(wigner_from_husimi(qg, s), f, t);
}

DensityMatrix density_from_husimi_poincare_kernel(const PhaseSpaceFunction& qg, const GaugeField& f,
                                                  const SmoothingSpec& s, double t) {
  return quantizer_kernel(qg, f, s, t, KernelPhase::Radial, "density_from_husimi_poincare_kernel");
}

} // namespace gipsp
