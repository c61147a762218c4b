#include <cmath>
#include <numeric>

#include "gipsp/dynamics.hpp"

namespace gipsp {

namespace {

struct FieldTable {
  std::vector<Vec3> E;
  std::vector<Vec3> B;
};

FieldTable tabulate_fields(const QGrid& qg, const GaugeField& f, double t, const Constants& k) {
  const auto fs = field_strengths(f, k);
  FieldTable tab{std::vector<Vec3>(qg.size()), std::vector<Vec3>(qg.size())};
  for (std::size_t i = 0; i < qg.size(); ++i) {
    const Vec3 q = qg.point(i);
    for (int a = 0; a < 3; ++a) {
      tab.E[i][a] = fs.E[a](q, t);
      tab.B[i][a] = fs.B[a](q, t);
    }
  }
  return tab;
}

bool uniform_static(const GaugeField& f, const Constants& k) {
  const auto fs = field_strengths(f, k);
  for (int a = 0; a < 3; ++a) {
    for (const Poly* p : {&fs.E[a], &fs.B[a]}) {
      if (p->spatial_degree() > 0 || p->depends_on(3)) return false;
    }
  }
  return true;
}

/// Pulls the momentum block back through a rotation by `theta` about p_d
/// using three shears per sub-rotation of at most pi/4.
void rotate_momentum(CArray& data, const PhaseGrid& g, double theta, double pdx, double pdy) {
  const Shape shape = g.shape();
  const Axis& ax = g.p_axis(0);
  const Axis& ay = g.p_axis(1);
  const auto pieces = static_cast<std::size_t>(std::ceil(std::abs(theta) / (kPi / 4.0)));
  if (pieces == 0) return;
  const double th = theta / static_cast<double>(pieces);
  const double a = -std::tan(th / 2.0);
  const double b = std::sin(th);
  std::vector<double> shift_x(ay.n);
  std::vector<double> shift_y(ax.n);
  for (std::size_t r = 0; r < ay.n; ++r) shift_x[r] = a * (ay.coord(r) - pdy) / ax.spacing;
  for (std::size_t r = 0; r < ax.n; ++r) shift_y[r] = b * (ax.coord(r) - pdx) / ay.spacing;
  for (std::size_t piece = 0; piece < pieces; ++piece) {
    spectral_shear(data, shape, 2, 3, shift_x);
    spectral_shear(data, shape, 3, 2, shift_y);
    spectral_shear(data, shape, 2, 3, shift_x);
  }
}

/// data(q, p) -> data(q - d(p), p) by a spectral shift over the q axes.
void shift_positions(CArray& data, const PhaseGrid& g, const std::function<Vec3(std::size_t)>& d_of_p) {
  const Shape shape = g.shape();
  const std::size_t dim = g.dim();
  std::vector<std::size_t> qaxes(dim);
  std::iota(qaxes.begin(), qaxes.end(), std::size_t{0});
  fft(data, shape, qaxes, -1);
  const std::size_t np = g.p_size();
  const double inv = 1.0 / static_cast<double>(g.q_size());
  std::vector<Vec3> d(np);
  for (std::size_t ip = 0; ip < np; ++ip) d[ip] = d_of_p(ip);
  for (std::size_t iq = 0; iq < g.q_size(); ++iq) {
    double kap[3] = {0.0, 0.0, 0.0};
    bool nyq[3] = {false, false, false};
    std::size_t rest = iq;
    for (std::size_t a = dim; a-- > 0;) {
      const Axis& ax = g.q().axis(a);
      const std::size_t kk = rest % ax.n;
      rest /= ax.n;
      nyq[a] = kk == ax.n / 2;
      kap[a] = ax.wavenumber(kk);
    }
    for (std::size_t ip = 0; ip < np; ++ip) {
      // Nyquist bins take the real cosine factor so that real data stays real.
      cplx factor{inv};
      for (std::size_t a = 0; a < dim; ++a) {
        factor *= nyq[a] ? cplx{std::cos(kap[a] * d[ip][a])} : std::polar(1.0, -kap[a] * d[ip][a]);
      }
      data[iq * np + ip] *= factor;
    }
  }
  fft(data, shape, qaxes, +1);
}

PhaseSpaceFunction affine_flow(const PhaseSpaceFunction& f0, const GaugeField& f, double t) {
  const PhaseGrid& g = f0.grid;
  const Constants& k = f0.constants;
  const std::size_t dim = g.dim();
  const auto eb = eval_EB(f, Vec3{0.0, 0.0, 0.0}, f0.time, k);
  const double omega = dim == 2 ? k.e * eb.B[2] / (k.m * k.c) : 0.0;
  PhaseSpaceFunction out = f0;
  CArray& data = out.values;
  const Shape shape = g.shape();

  if (std::abs(omega * t) < 1e-14) {
    for (std::size_t a = 0; a < dim; ++a) {
      const double cells = -k.e * eb.E[a] * t / g.p_axis(a).spacing;
      if (cells != 0.0) spectral_shift(data, shape, dim + a, cells);
    }
    shift_positions(data, g, [&](std::size_t ip) {
      const Vec3 p = g.momentum(ip);
      Vec3 d{0.0, 0.0, 0.0};
      for (std::size_t a = 0; a < dim; ++a) d[a] = (p[a] * t - 0.5 * k.e * eb.E[a] * t * t) / k.m;
      return d;
    });
  } else {
    const double pdx = k.e * eb.E[1] / omega;
    const double pdy = -k.e * eb.E[0] / omega;
    const double th = omega * t;
    rotate_momentum(data, g, th, pdx, pdy);
    const double c = std::cos(th);
    const double s = std::sin(th);
    shift_positions(data, g, [&](std::size_t ip) {
      const Vec3 p = g.momentum(ip);
      const double ux = p[0] - pdx;
      const double uy = p[1] - pdy;
      // R(omega t)(p - p_d), then K applied to it.
      const double rx = c * ux - s * uy;
      const double ry = s * ux + c * uy;
      const double kx = (s * rx + (1.0 - c) * ry) / omega;
      const double ky = (-(1.0 - c) * rx + s * ry) / omega;
      return Vec3{(pdx * t + kx) / k.m, (pdy * t + ky) / k.m, 0.0};
    });
  }
  out.time = f0.time + t;
  return out;
}

/// One Boris step of the Lorentz-force equations with fields at q.
void boris_step(Vec3& q, Vec3& p, double h, double t, const FieldStrengths& fs, const Constants& k,
                std::size_t dim) {
  Vec3 E{};
  Vec3 B{};
  for (int a = 0; a < 3; ++a) {
    E[a] = fs.E[a](q, t);
    B[a] = fs.B[a](q, t);
  }
  Vec3 pm{};
  for (int a = 0; a < 3; ++a) pm[a] = p[a] + 0.5 * h * k.e * E[a];
  Vec3 tv{};
  double t2 = 0.0;
  for (int a = 0; a < 3; ++a) {
    tv[a] = 0.5 * h * k.e * B[a] / (k.m * k.c);
    t2 += tv[a] * tv[a];
  }
  auto cross = [](const Vec3& u, const Vec3& v) {
    return Vec3{u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]};
  };
  const Vec3 c1 = cross(pm, tv);
  Vec3 pp{};
  for (int a = 0; a < 3; ++a) pp[a] = pm[a] + c1[a];
  Vec3 sv{};
  for (int a = 0; a < 3; ++a) sv[a] = 2.0 * tv[a] / (1.0 + t2);
  const Vec3 c2 = cross(pp, sv);
  for (int a = 0; a < 3; ++a) p[a] = pm[a] + c2[a] + 0.5 * h * k.e * E[a];
  for (std::size_t a = dim; a < 3; ++a) p[a] = 0.0;
  for (std::size_t a = 0; a < dim; ++a) q[a] += h * p[a] / k.m;
}

/// Cubic Lagrange stencil: first index and four weights; false when off grid.
bool stencil(const Axis& ax, double x, long& first, std::array<double, 4>& w) {
  const double u = (x - ax.coord(0)) / ax.spacing;
  const long i1 = static_cast<long>(std::floor(u));
  first = i1 - 1;
  if (first < 0 || first + 3 >= static_cast<long>(ax.n)) return false;
  const double r = u - static_cast<double>(i1);
  w[0] = -r * (r - 1.0) * (r - 2.0) / 6.0;
  w[1] = (r + 1.0) * (r - 1.0) * (r - 2.0) / 2.0;
  w[2] = -(r + 1.0) * r * (r - 2.0) / 2.0;
  w[3] = (r + 1.0) * r * (r - 1.0) / 6.0;
  return true;
}

PhaseSpaceFunction characteristics(const PhaseSpaceFunction& f0, const GaugeField& f, double t, double dt,
                                   double* loss) {
  const PhaseGrid& g = f0.grid;
  const Constants& k = f0.constants;
  const std::size_t dim = g.dim();
  const std::size_t rank = 2 * dim;
  const Shape shape = g.shape();
  const auto fs = field_strengths(f, k);
  const auto steps = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t / dt - 1e-12)));
  const double h = t / static_cast<double>(steps);
  const double t_end = f0.time + t;
  std::vector<const Axis*> axes;
  for (std::size_t a = 0; a < dim; ++a) axes.push_back(&g.q().axis(a));
  for (std::size_t a = 0; a < dim; ++a) axes.push_back(&g.p_axis(a));
  std::vector<std::size_t> strides(rank);
  for (std::size_t a = 0; a < rank; ++a) strides[a] = stride_of(shape, a);

  PhaseSpaceFunction out = f0;
  const std::size_t np = g.p_size();
  parallel_for(g.size(), [&](std::size_t flat) {
    Vec3 q = g.q().point(flat / np);
    Vec3 p = g.momentum(flat % np);
    for (std::size_t s = 0; s < steps; ++s) {
      boris_step(q, p, -h, t_end - (static_cast<double>(s) + 0.5) * h, fs, k, dim);
    }
    std::array<long, 4> first{};
    std::array<std::array<double, 4>, 4> w{};
    for (std::size_t a = 0; a < rank; ++a) {
      const double x = a < dim ? q[a] : p[a - dim];
      if (!stencil(*axes[a], x, first[a], w[a])) {
        out.values[flat] = 0.0;
        return;
      }
    }
    cplx acc{0.0};
    const std::size_t count = std::size_t{1} << (2 * rank);
    for (std::size_t c = 0; c < count; ++c) {
      double weight = 1.0;
      std::size_t idx = 0;
      for (std::size_t a = 0; a < rank; ++a) {
        const std::size_t o = (c >> (2 * a)) & 3u;
        weight *= w[a][o];
        idx += static_cast<std::size_t>(first[a] + static_cast<long>(o)) * strides[a];
      }
      acc += weight * f0.values[idx];
    }
    out.values[flat] = acc;
  });

  // Mass carried out of the box, from forward characteristics of every node.
  std::vector<double> lost(g.size(), 0.0);
  parallel_for(g.size(), [&](std::size_t flat) {
    Vec3 q = g.q().point(flat / np);
    Vec3 p = g.momentum(flat % np);
    for (std::size_t s = 0; s < steps; ++s) {
      boris_step(q, p, h, f0.time + (static_cast<double>(s) + 0.5) * h, fs, k, dim);
    }
    for (std::size_t a = 0; a < rank; ++a) {
      const double x = a < dim ? q[a] : p[a - dim];
      const Axis& ax = *axes[a];
      if (x < ax.coord(0) || x > ax.coord(ax.n - 1)) {
        lost[flat] = f0.values[flat].real();
        return;
      }
    }
  });
  double lost_mass = 0.0;
  for (double v : lost) lost_mass += v;
  lost_mass *= g.cell_volume();

  // Cubic interpolation is not conservative; restore the transported mass.
  const double target = f0.total() - lost_mass;
  const double now = out.total();
  if (now != 0.0) {
    for (auto& v : out.values) v *= target / now;
  }
  out.time = t_end;
  if (loss) *loss = lost_mass;
  return out;
}

} // namespace

PhaseSpaceFunction liouville_rhs(const PhaseSpaceFunction& f0, const GaugeField& f, double t) {
  const PhaseGrid& g = f0.grid;
  const Constants& k = f0.constants;
  const std::size_t dim = g.dim();
  const Shape shape = g.shape();
  const std::size_t np = g.p_size();
  const std::size_t total = g.size();
  const auto tab = tabulate_fields(g.q(), f, t, k);
  PhaseSpaceFunction out = f0;
  std::fill(out.values.begin(), out.values.end(), cplx{0.0});
  for (std::size_t i = 0; i < dim; ++i) {
    CArray d = f0.values;
    spectral_derivative(d, shape, i, g.q().axis(i).spacing);
    for (std::size_t n = 0; n < total; ++n) out.values[n] -= g.momentum(n % np)[i] / k.m * d[n];
  }
  for (std::size_t i = 0; i < dim; ++i) {
    CArray d = f0.values;
    spectral_derivative(d, shape, dim + i, g.p_axis(i).spacing);
    for (std::size_t n = 0; n < total; ++n) {
      const std::size_t iq = n / np;
      const Vec3 p = g.momentum(n % np);
      const Vec3& B = tab.B[iq];
      const Vec3 pxb{p[1] * B[2] - p[2] * B[1], p[2] * B[0] - p[0] * B[2], p[0] * B[1] - p[1] * B[0]};
      const double force = k.e * (tab.E[iq][i] + pxb[i] / (k.m * k.c));
      out.values[n] -= force * d[n];
    }
  }
  return out;
}

PhaseSpaceFunction liouville_propagate(const PhaseSpaceFunction& f0, const EvolutionSpec& spec,
                                       double* boundary_loss) {
  spec.validate();
  const double t = spec.t_final - f0.time;
  if (t < 0.0) throw Error("liouville_propagate: t_final precedes the initial time");
  if (boundary_loss) *boundary_loss = 0.0;
  if (t == 0.0) return f0;
  if (uniform_static(spec.field, f0.constants)) {
    auto out = affine_flow(f0, spec.field, t);
    out.time = spec.t_final;
    return out;
  }
  auto out = characteristics(f0, spec.field, t, spec.dt, boundary_loss);
  out.time = spec.t_final;
  return out;
}

} // namespace gipsp
