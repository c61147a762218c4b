#pragma once

#include <string>

#include "gipsp/em_fields.hpp"
#include "gipsp/lattice.hpp"
#include "gipsp/states.hpp"

namespace gipsp {

class GaugeTagMismatch : public Error {
public:
  using Error::Error;
};

/// W: standard Wigner over generalized momentum. Wg / Qg: Stratonovich chord
/// construction over kinetic momentum. WgRadial / QgRadial: radial-phase
/// construction over kinetic momentum.
enum class Kind { W, Wg, WgRadial, Q, Qg, QgRadial, Classical };

std::string to_string(Kind kind);
Kind kind_from_string(const std::string& name);
bool is_husimi(Kind kind);
Kind husimi_of(Kind wigner_kind);
Kind wigner_of(Kind husimi_kind);

/// Scalar field on a phase-space grid. Values are stored complex so that the
/// residual imaginary part of real-by-construction transforms stays visible.
struct PhaseSpaceFunction {
  PhaseGrid grid;
  CArray values;
  Kind kind = Kind::W;
  Constants constants;
  std::string field_tag = "zero";
  double time = 0.0;

  /// Integral over the whole phase grid.
  double total() const;
  /// Integral over momentum at each position node.
  std::vector<double> position_marginal() const;
};

PhaseSpaceFunction wigner(const DensityMatrix& rho);
DensityMatrix inverse_wigner(const PhaseSpaceFunction& w);

PhaseSpaceFunction wigner_gauge_stratonovich(const DensityMatrix& rho, const GaugeField& f, double t = 0.0);
DensityMatrix inverse_wigner_gauge(const PhaseSpaceFunction& wg, const GaugeField& f, double t = 0.0);

PhaseSpaceFunction wigner_gauge_poincare(const DensityMatrix& rho, const GaugeField& f, double t = 0.0);
DensityMatrix inverse_wigner_poincare(const PhaseSpaceFunction& wg, const GaugeField& f, double t = 0.0);

/// Radial phase Lambda(q) tabulated on the position grid.
std::vector<double> radial_phase_table(const QGrid& grid, const GaugeField& f, double t, const Constants& k);

void require_gauge(const DensityMatrix& rho, const GaugeField& f, const char* what);

} // namespace gipsp
