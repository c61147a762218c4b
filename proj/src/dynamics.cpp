#include "gipsp/dynamics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace gipsp {

std::string to_string(Propagator p) {
  switch (p) {
  case Propagator::Liouville: return "liouville";
  case Propagator::SchrodingerSplit: return "schrodinger_split";
  case Propagator::SchrodingerDense: return "schrodinger_dense";
  case Propagator::MoyalGauge: return "moyal_gauge";
  case Propagator::HusimiGauge: return "husimi_gauge";
  }
  return "unknown";
}

Propagator propagator_from_string(const std::string& name) {
  for (Propagator p : {Propagator::Liouville, Propagator::SchrodingerSplit, Propagator::SchrodingerDense,
                       Propagator::MoyalGauge, Propagator::HusimiGauge}) {
    if (to_string(p) == name) return p;
  }
  throw Error("unknown propagator '" + name + "'");
}

void EvolutionSpec::validate() const {
  if (!(dt > 0.0)) throw Error("evolution: dt must be positive");
  if (!(t_final >= 0.0)) throw Error("evolution: t_final must be non-negative");
  if (stepper != "rk4") throw Error("evolution: unsupported stepper '" + stepper + "'");
  smoothing.validate();
}

namespace {

int levi_civita(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((i == 0 && j == 1) || (i == 1 && j == 2) || (i == 2 && j == 0)) ? 1 : -1;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

/// Coordinates of flat indices of a phase-space array read as (q, s) or (q, p).
/// s nodes are spaced like q and stored in natural FFT order.
class Indexer {
public:
  explicit Indexer(const PhaseGrid& g) : grid_(g), shape_(g.shape()), dim_(g.dim()) {
    for (std::size_t a = 0; a < dim_; ++a) {
      strides_.push_back(stride_of(shape_, a));
      pstrides_.push_back(stride_of(shape_, dim_ + a));
    }
  }

  std::size_t dim() const { return dim_; }
  const Shape& shape() const { return shape_; }
  const PhaseGrid& grid() const { return grid_; }

  std::size_t s_index(std::size_t flat, std::size_t a) const { return (flat / pstrides_[a]) % shape_[dim_ + a]; }
  std::size_t q_index(std::size_t flat, std::size_t a) const { return (flat / strides_[a]) % shape_[a]; }
  /// The Nyquist bin pairs with itself under s -> -s, so odd powers of s_a
  /// must vanish there for a multiplier to keep results real.
  bool nyquist(std::size_t flat, std::size_t a) const { return s_index(flat, a) == shape_[dim_ + a] / 2; }
  /// s_a^k with odd powers removed on the Nyquist bin.
  double s_power(std::size_t flat, std::size_t a, int k) const {
    if (k % 2 != 0 && nyquist(flat, a)) return 0.0;
    return std::pow(s(flat, a), k);
  }
  double s(std::size_t flat, std::size_t a) const {
    const std::size_t n = shape_[dim_ + a];
    const std::size_t m = s_index(flat, a);
    const double sm = m < n / 2 ? static_cast<double>(m) : static_cast<double>(m) - static_cast<double>(n);
    return sm * grid_.q().axis(a).spacing;
  }
  /// Momentum at the p index of `flat` (same index slots as s).
  double p(std::size_t flat, std::size_t a) const { return grid_.p_axis(a).coord(s_index(flat, a)); }
  double q(std::size_t flat, std::size_t a) const { return grid_.q().axis(a).coord(q_index(flat, a)); }

private:
  PhaseGrid grid_;
  Shape shape_;
  std::size_t dim_;
  std::vector<std::size_t> strides_;
  std::vector<std::size_t> pstrides_;
};

/// Transforms between (q, p) and (q, s), where d/dp becomes i s / hbar.
class MixedRep : public Indexer {
public:
  explicit MixedRep(const PhaseGrid& g) : Indexer(g) {
    for (std::size_t a = 0; a < dim(); ++a) paxes_.push_back(dim() + a);
    const std::size_t total = g.size();
    sign_.resize(total);
    norm_ = 1.0;
    for (std::size_t a = 0; a < dim(); ++a) norm_ /= static_cast<double>(g.p_axis(a).n);
    for (std::size_t flat = 0; flat < total; ++flat) {
      int parity = 0;
      for (std::size_t a = 0; a < dim(); ++a) parity += static_cast<int>(s_index(flat, a));
      sign_[flat] = parity % 2 ? -1.0 : 1.0;
    }
  }

  std::size_t size() const { return sign_.size(); }

  CArray to_s(std::span<const cplx> in) const {
    CArray out(in.begin(), in.end());
    fft(out, shape(), paxes_, -1);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sign_[i] * norm_;
    return out;
  }

  CArray to_p(std::span<const cplx> in) const {
    CArray out(in.begin(), in.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= sign_[i];
    fft(out, shape(), paxes_, +1);
    return out;
  }

private:
  std::vector<std::size_t> paxes_;
  std::vector<double> sign_;
  double norm_;
};

void axpy(CArray& acc, cplx a, std::span<const cplx> x) {
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a * x[i];
}

/// Field operators and momentum operator of one right-hand side evaluation.
class GaugeRhs {
public:
  GaugeRhs(const PhaseGrid& g, const GaugeField& f, double t, const Constants& k, double sigma, double p_shift,
           CrossOrdering ordering)
      : rep_(g), k_(k), p_shift_(p_shift), ordering_(ordering) {
    const auto fs = field_strengths(f, k);
    const std::size_t dim = g.dim();
    for (std::size_t i = 0; i < dim; ++i) E_.emplace_back(fs.E[i].at_time(t), g, sigma, 0);
    for (int i = 0; i < 3; ++i) {
      B_.emplace_back(fs.B[i].at_time(t), g, sigma, 0);
      b_.emplace_back(fs.B[i].at_time(t), g, sigma, 1);
      any_b_ = any_b_ || !b_.back().is_zero();
      any_B_ = any_B_ || !B_.back().is_zero();
    }
  }

  CArray evaluate(std::span<const cplx> w) const {
    const std::size_t dim = rep_.dim();
    const std::size_t total = rep_.size();
    CArray acc_p(total, cplx{0.0});
    CArray acc_s(total, cplx{0.0});
    const double inv_m = 1.0 / k_.m;

    // (1/m)(p + p_shift + dp) . d/dq
    for (std::size_t i = 0; i < dim; ++i) {
      CArray dq(w.begin(), w.end());
      spectral_derivative(dq, rep_.shape(), i, rep_.grid().q().axis(i).spacing);
      for (std::size_t n = 0; n < total; ++n) acc_p[n] += inv_m * rep_.p(n, i) * dq[n];
      if (p_shift_ != 0.0 || any_b_) {
        const CArray dqs = rep_.to_s(dq);
        add_momentum_correction(acc_s, inv_m, i, dqs);
      }
    }

    const CArray ws = rep_.to_s(w);
    std::vector<CArray> dps(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      dps[i] = ws;
      for (std::size_t n = 0; n < total; ++n) {
        dps[i][n] *= cplx{0.0, rep_.s_power(n, i, 1) / k_.hbar};
      }
      // e E~ . d/dp
      axpy(acc_s, k_.e, E_[i].apply(dps[i]));
    }

    if (any_B_) {
      const double coupling = k_.e * inv_m / k_.c;
      const double weight = ordering_ == CrossOrdering::Written ? 1.0 : 0.5;
      // Written order: B~ acts first, then the momentum factor.
      for (int j = 0; j < 3; ++j) {
        CArray g(total, cplx{0.0});
        bool nonzero = false;
        for (std::size_t i = 0; i < dim; ++i) {
          for (int kk = 0; kk < 3; ++kk) {
            const int eps = levi_civita(static_cast<int>(i), j, kk);
            if (eps == 0 || B_[kk].is_zero()) continue;
            axpy(g, static_cast<double>(eps), B_[kk].apply(dps[i]));
            nonzero = true;
          }
        }
        if (!nonzero) continue;
        apply_momentum(acc_p, acc_s, weight * coupling, j, g);
      }
      if (ordering_ == CrossOrdering::Symmetrized) {
        for (std::size_t i = 0; i < dim; ++i) {
          for (int j = 0; j < 3; ++j) {
            CArray ap(total, cplx{0.0});
            CArray as(total, cplx{0.0});
            bool used = false;
            for (int kk = 0; kk < 3; ++kk) used = used || (levi_civita(static_cast<int>(i), j, kk) != 0 && !B_[kk].is_zero());
            if (!used) continue;
            apply_momentum(ap, as, 1.0, j, dps[i]);
            const CArray a = sum_in_s(ap, as);
            for (int kk = 0; kk < 3; ++kk) {
              const int eps = levi_civita(static_cast<int>(i), j, kk);
              if (eps == 0 || B_[kk].is_zero()) continue;
              axpy(acc_s, 0.5 * coupling * eps, B_[kk].apply(a));
            }
          }
        }
      }
    }

    const CArray back = rep_.to_p(acc_s);
    CArray out(total);
    for (std::size_t n = 0; n < total; ++n) out[n] = -(acc_p[n] + back[n]);
    return out;
  }

private:
  /// acc_s += scale * (p_shift i s_j + dp_j) x for x in (q, s).
  void add_momentum_correction(CArray& acc_s, double scale, std::size_t j, std::span<const cplx> xs) const {
    const std::size_t total = rep_.size();
    if (p_shift_ != 0.0 && j < rep_.dim()) {
      for (std::size_t n = 0; n < total; ++n) {
        acc_s[n] += scale * cplx{0.0, p_shift_ * rep_.s_power(n, j, 1)} * xs[n];
      }
    }
    if (!any_b_) return;
    // dp_j = -(e/c) (s x b)_j
    for (std::size_t a = 0; a < rep_.dim(); ++a) {
      for (int bb = 0; bb < 3; ++bb) {
        const int eps = levi_civita(static_cast<int>(j), static_cast<int>(a), bb);
        if (eps == 0 || b_[bb].is_zero()) continue;
        const CArray bx = b_[bb].apply(xs);
        const double f = -scale * eps * k_.e / k_.c;
        for (std::size_t n = 0; n < total; ++n) acc_s[n] += f * rep_.s_power(n, a, 1) * bx[n];
      }
    }
  }

  /// Adds scale * (p_j + p_shift + dp_j) x, with x given in (q, s).
  void apply_momentum(CArray& acc_p, CArray& acc_s, double scale, int j, std::span<const cplx> xs) const {
    if (static_cast<std::size_t>(j) < rep_.dim()) {
      const CArray xp = rep_.to_p(xs);
      for (std::size_t n = 0; n < rep_.size(); ++n) acc_p[n] += scale * rep_.p(n, static_cast<std::size_t>(j)) * xp[n];
    }
    add_momentum_correction(acc_s, scale, static_cast<std::size_t>(j), xs);
  }

  CArray sum_in_s(std::span<const cplx> ap, std::span<const cplx> as) const {
    CArray out = rep_.to_s(ap);
    for (std::size_t n = 0; n < out.size(); ++n) out[n] += as[n];
    return out;
  }

  MixedRep rep_;
  Constants k_;
  double p_shift_;
  CrossOrdering ordering_;
  std::vector<ShiftedFieldOperator> E_;
  std::vector<ShiftedFieldOperator> B_;
  std::vector<ShiftedFieldOperator> b_;
  bool any_b_ = false;
  bool any_B_ = false;
};

} // namespace

double ShiftedFieldOperator::tau_moment(int k) {
  if (k % 2 != 0) return 0.0;
  return 1.0 / ((k + 1) * std::pow(2.0, k));
}

ShiftedFieldOperator::ShiftedFieldOperator(const Poly& field, const PhaseGrid& grid, double sigma, int tau_power)
    : grid_(grid), sigma_(sigma) {
  const int degree = field.spatial_degree();
  const std::size_t dim = grid.dim();
  if (field.is_zero()) return;
  for (int ax = 0; ax <= degree; ++ax) {
    for (int ay = 0; ax + ay <= degree; ++ay) {
      for (int az = 0; ax + ay + az <= degree; ++az) {
        const std::array<int, 3> alpha{ax, ay, az};
        bool allowed = true;
        for (std::size_t a = dim; a < 3; ++a) allowed = allowed && alpha[a] == 0;
        if (!allowed) continue;
        const int order = ax + ay + az;
        const double mu = tau_moment(order + tau_power);
        if (mu == 0.0) continue;
        Poly d = field;
        for (int a = 0; a < 3; ++a) {
          for (int r = 0; r < alpha[a]; ++r) d = d.derivative(a);
        }
        if (d.is_zero()) continue;
        terms_.push_back({alpha, d, mu / (factorial(ax) * factorial(ay) * factorial(az))});
      }
    }
  }
  if (sigma_ != 0.0 || terms_.empty()) return;

  const Indexer rep(grid);
  multiplier_.assign(grid.size(), cplx{0.0});
  parallel_for(grid.size(), [&](std::size_t n) {
    Vec3 q{0.0, 0.0, 0.0};
    for (std::size_t a = 0; a < dim; ++a) q[a] = rep.q(n, a);
    double v = 0.0;
    for (const auto& t : terms_) {
      double mono = t.coefficient;
      for (std::size_t a = 0; a < dim; ++a) mono *= std::pow(-1.0, t.alpha[a]) * rep.s_power(n, a, t.alpha[a]);
      v += mono * t.derivative(q);
    }
    multiplier_[n] = v;
  });
}

CArray ShiftedFieldOperator::apply_polynomial(const Poly& g, std::span<const cplx> in) const {
  const Indexer rep(grid_);
  const std::size_t dim = grid_.dim();
  const std::size_t total = in.size();
  auto apply_y = [&](CArray v, std::size_t a) {
    CArray d = v;
    spectral_derivative(d, rep.shape(), a, grid_.q().axis(a).spacing);
    for (std::size_t n = 0; n < total; ++n) v[n] = rep.q(n, a) * v[n] + sigma_ * d[n];
    return v;
  };
  int max_x = 0;
  for (const auto& [ex, c] : g.terms()) max_x = std::max(max_x, ex[0]);
  std::vector<CArray> powx{CArray(in.begin(), in.end())};
  for (int r = 1; r <= max_x && dim >= 1; ++r) powx.push_back(apply_y(powx.back(), 0));
  CArray out(total, cplx{0.0});
  for (const auto& [ex, c] : g.terms()) {
    if (ex[2] > 0 || (dim < 2 && ex[1] > 0)) continue;
    CArray v = powx[static_cast<std::size_t>(ex[0])];
    for (int r = 0; r < ex[1]; ++r) v = apply_y(std::move(v), 1);
    axpy(out, c, v);
  }
  return out;
}

CArray ShiftedFieldOperator::apply(std::span<const cplx> in) const {
  if (in.size() != grid_.size()) throw DimensionMismatch("ShiftedFieldOperator: array does not match grid");
  if (terms_.empty()) return CArray(in.size(), cplx{0.0});
  if (sigma_ == 0.0) {
    CArray out(in.begin(), in.end());
    for (std::size_t n = 0; n < out.size(); ++n) out[n] *= multiplier_[n];
    return out;
  }
  const Indexer rep(grid_);
  const std::size_t dim = grid_.dim();
  CArray out(in.size(), cplx{0.0});
  for (const auto& t : terms_) {
    CArray h(in.begin(), in.end());
    for (std::size_t n = 0; n < h.size(); ++n) {
      double mono = t.coefficient;
      for (std::size_t a = 0; a < dim; ++a) mono *= std::pow(-1.0, t.alpha[a]) * rep.s_power(n, a, t.alpha[a]);
      h[n] *= mono;
    }
    axpy(out, 1.0, apply_polynomial(t.derivative, h));
  }
  return out;
}

PhaseSpaceFunction moyal_gauge_rhs(const PhaseSpaceFunction& wg, const GaugeField& f, double t,
                                   CrossOrdering ordering) {
  const GaugeRhs rhs(wg.grid, f, t, wg.constants, 0.0, 0.0, ordering);
  PhaseSpaceFunction out = wg;
  out.values = rhs.evaluate(wg.values);
  return out;
}

PhaseSpaceFunction husimi_gauge_rhs(const PhaseSpaceFunction& qg, const GaugeField& f, const SmoothingSpec& s,
                                    double t, CrossOrdering ordering) {
  s.validate();
  const Constants& k = qg.constants;
  const GaugeRhs rhs(qg.grid, f, t, k, k.hbar / (2.0 * k.lambda), k.lambda / 2.0, ordering);
  PhaseSpaceFunction out = qg;
  out.values = rhs.evaluate(qg.values);
  return out;
}

PhaseSpaceFunction propagate_phase_space(const PhaseSpaceFunction& f0, const EvolutionSpec& spec,
                                         PropagationLog* log,
                                         const std::function<void(const std::string&)>& warn) {
  spec.validate();
  if (spec.propagator != Propagator::MoyalGauge && spec.propagator != Propagator::HusimiGauge) {
    throw Error("propagate_phase_space: propagator must be moyal_gauge or husimi_gauge");
  }
  const bool husimi = spec.propagator == Propagator::HusimiGauge;
  const PhaseGrid& g = f0.grid;
  const Constants& k = f0.constants;
  const double span = spec.t_final - f0.time;
  if (span < 0.0) throw Error("propagate_phase_space: t_final precedes the initial time");
  const auto steps = static_cast<std::size_t>(std::ceil(span / spec.dt - 1e-12));
  PropagationLog local;
  PropagationLog& lg = log ? *log : local;
  lg = PropagationLog{};

  // Transport speed along q and force scale along p bound the stable step.
  double p_max = 0.0;
  double dq = std::numeric_limits<double>::infinity();
  double dp = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < g.dim(); ++a) {
    p_max = std::max(p_max, g.p_axis(a).extent() / 2.0 + std::abs(g.p_axis(a).center));
    dq = std::min(dq, g.q().axis(a).spacing);
    dp = std::min(dp, g.p_axis(a).spacing);
  }
  double force = 0.0;
  for (std::size_t i = 0; i < g.q_size(); ++i) {
    const auto eb = eval_EB(spec.field, g.q().point(i), f0.time, k);
    double e2 = 0.0;
    double b2 = 0.0;
    for (int a = 0; a < 3; ++a) {
      e2 += eb.E[a] * eb.E[a];
      b2 += eb.B[a] * eb.B[a];
    }
    force = std::max(force, std::abs(k.e) * (std::sqrt(e2) + p_max * std::sqrt(b2) / (k.m * k.c)));
  }
  double limit = dq * k.m / std::max(p_max, 1e-300);
  if (force > 0.0) limit = std::min(limit, dp / force);
  if (steps > 0 && span / static_cast<double>(steps) > 0.5 * limit) {
    lg.cfl_warning = true;
    if (warn) {
      std::ostringstream os;
      os << "time step " << span / static_cast<double>(steps) << " exceeds the CFL guidance " << 0.5 * limit;
      warn(os.str());
    }
  }
  // Spectral derivatives reach wavenumber pi / spacing; RK4 is stable on the
  // imaginary axis up to 2 sqrt(2).
  double omega = 0.0;
  for (std::size_t a = 0; a < g.dim(); ++a) {
    omega += p_max / k.m * kPi / g.q().axis(a).spacing + force * kPi / g.p_axis(a).spacing;
  }
  if (steps > 0 && span / static_cast<double>(steps) * omega > 2.0 * std::sqrt(2.0)) {
    lg.cfl_warning = true;
    if (warn) {
      std::ostringstream os;
      os << "time step " << span / static_cast<double>(steps) << " exceeds the RK4 stability estimate "
         << 2.0 * std::sqrt(2.0) / omega;
      warn(os.str());
    }
  }

  PhaseSpaceFunction cur = f0;
  const double mass0 = f0.total();
  if (steps == 0) return cur;
  const double h = span / static_cast<double>(steps);
  const std::size_t total = g.size();
  for (std::size_t step = 0; step < steps; ++step) {
    const double tm = f0.time + (static_cast<double>(step) + 0.5) * h;
    const GaugeRhs rhs(g, spec.field, tm, k, husimi ? k.hbar / (2.0 * k.lambda) : 0.0, husimi ? k.lambda / 2.0 : 0.0,
                       spec.ordering);
    const CArray& y = cur.values;
    const CArray k1 = rhs.evaluate(y);
    CArray tmp(total);
    for (std::size_t n = 0; n < total; ++n) tmp[n] = y[n] + 0.5 * h * k1[n];
    const CArray k2 = rhs.evaluate(tmp);
    for (std::size_t n = 0; n < total; ++n) tmp[n] = y[n] + 0.5 * h * k2[n];
    const CArray k3 = rhs.evaluate(tmp);
    for (std::size_t n = 0; n < total; ++n) tmp[n] = y[n] + h * k3[n];
    const CArray k4 = rhs.evaluate(tmp);
    double imag = 0.0;
    for (std::size_t n = 0; n < total; ++n) {
      const cplx v = y[n] + h / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
        throw Error("propagate_phase_space: non-finite value at step " + std::to_string(step));
      }
      imag = std::max(imag, std::abs(v.imag()));
      cur.values[n] = v.real();
    }
    cur.time = f0.time + static_cast<double>(step + 1) * h;
    lg.steps = step + 1;
    lg.max_imag_removed = std::max(lg.max_imag_removed, imag);
    lg.max_norm_drift = std::max(lg.max_norm_drift, std::abs(cur.total() - mass0));
  }
  cur.time = spec.t_final;
  return cur;
}

} // namespace gipsp
