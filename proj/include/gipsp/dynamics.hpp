#pragma once

#include <functional>
#include <string>

#include "gipsp/husimi.hpp"

namespace gipsp {

enum class Propagator { Liouville, SchrodingerSplit, SchrodingerDense, MoyalGauge, HusimiGauge };

/// Operator order of the magnetic term (p + dp) x B: as written, or averaged
/// with the reversed order.
enum class CrossOrdering { Written, Symmetrized };

std::string to_string(Propagator p);
Propagator propagator_from_string(const std::string& name);

struct EvolutionSpec {
  GaugeField field;
  double dt = 0.01;
  double t_final = 0.0;
  Propagator propagator = Propagator::SchrodingerSplit;
  std::string stepper = "rk4";
  CrossOrdering ordering = CrossOrdering::Written;
  SmoothingSpec smoothing;

  void validate() const;
};

/// Operator  int_{-1/2}^{1/2} tau^w F(Y - tau s) dtau  on arrays in the mixed
/// (q, s) representation, where s is conjugate to momentum and
/// Y = q + sigma d/dq. F is a polynomial, so the Taylor expansion in tau s is
/// finite and the tau integrals are exact moments. With sigma = 0 the operator
/// is a pointwise multiplier and is tabulated once.
class ShiftedFieldOperator {
public:
  ShiftedFieldOperator(const Poly& field, const PhaseGrid& grid, double sigma, int tau_power);

  /// out = operator applied to `in`; both in (q, s) layout.
  CArray apply(std::span<const cplx> in) const;
  bool is_zero() const { return terms_.empty(); }

  /// int_{-1/2}^{1/2} tau^k dtau.
  static double tau_moment(int k);

private:
  struct Term {
    std::array<int, 3> alpha;
    Poly derivative;
    double coefficient;
  };
  CArray apply_polynomial(const Poly& g, std::span<const cplx> in) const;

  PhaseGrid grid_;
  double sigma_;
  std::vector<Term> terms_;
  CArray multiplier_;
};

/// Classical transport right-hand side
/// -[(p/m) d/dq + e(E + p x B/(m c)) d/dp] F with spectral derivatives.
PhaseSpaceFunction liouville_rhs(const PhaseSpaceFunction& f0, const GaugeField& f, double t);

/// Semi-Lagrangian transport from f0.time to spec.t_final. Uniform static
/// fields use the closed-form affine flow with spectral shifts and shears;
/// other fields trace characteristics backward with a Boris pusher and
/// interpolate with tensor-product cubic Lagrange stencils. The result is
/// rescaled so that its mass is the initial mass minus `boundary_loss`, the
/// mass of nodes whose forward characteristics leave the grid.
PhaseSpaceFunction liouville_propagate(const PhaseSpaceFunction& f0, const EvolutionSpec& spec,
                                       double* boundary_loss = nullptr);

WaveFunction schrodinger_propagate(const WaveFunction& psi0, const EvolutionSpec& spec, double t0 = 0.0);

/// <psi| (P - eA/c)^2/2m + e phi |psi> with spectral derivatives.
double energy(const WaveFunction& psi, const GaugeField& f, double t);

/// Right-hand side of the gauge-independent Moyal equation.
PhaseSpaceFunction moyal_gauge_rhs(const PhaseSpaceFunction& wg, const GaugeField& f, double t,
                                   CrossOrdering ordering = CrossOrdering::Written);

/// Right-hand side of the gauge-independent Husimi evolution equation.
PhaseSpaceFunction husimi_gauge_rhs(const PhaseSpaceFunction& qg, const GaugeField& f, const SmoothingSpec& s,
                                    double t, CrossOrdering ordering = CrossOrdering::Written);

struct PropagationLog {
  std::size_t steps = 0;
  double max_norm_drift = 0.0;
  double max_imag_removed = 0.0;
  bool cfl_warning = false;
};

/// RK4 integration of moyal_gauge_rhs or husimi_gauge_rhs from f0.time to spec.t_final.
/// `warn` receives CFL advisories; NaN values abort with Error.
PhaseSpaceFunction propagate_phase_space(const PhaseSpaceFunction& f0, const EvolutionSpec& spec,
                                         PropagationLog* log = nullptr,
                                         const std::function<void(const std::string&)>& warn = {});

} // namespace gipsp
