#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gipsp/em_fields.hpp"
#include "gipsp/lattice.hpp"

namespace gipsp {

/// Largest fraction of a state's weight allowed in the outer 10% shell of the box.
inline constexpr double kBoundaryThreshold = 1e-8;

struct WaveFunction {
  QGrid grid;
  CArray values;
  Constants constants;
  std::string gauge_tag = "zero";

  double norm_squared() const;
};

/// One weighted pure state of a mixture.
struct PureComponent {
  double weight = 1.0;
  CArray psi;
};

/// Density matrix in the position representation. One-dimensional states are
/// held as dense n x n kernels rho(q_a, q_b); two-dimensional states only as
/// a weighted list of pure states.
class DensityMatrix {
public:
  DensityMatrix() = default;
  /// Dense kernel rho(q_a, q_b) for a 1-D grid.
  DensityMatrix(QGrid grid, Eigen::MatrixXcd kernel, Constants constants, std::string gauge_tag);
  /// Low-rank form sum_i w_i |psi_i><psi_i|.
  DensityMatrix(QGrid grid, std::vector<PureComponent> components, Constants constants, std::string gauge_tag);

  const QGrid& grid() const { return grid_; }
  const Constants& constants() const { return constants_; }
  const std::string& gauge_tag() const { return tag_; }
  bool is_dense() const { return dense_.has_value(); }

  /// Kernel values; built from the components when needed (1-D or small grids).
  Eigen::MatrixXcd kernel() const;
  /// Pure-state decomposition; dense kernels are diagonalized.
  std::vector<PureComponent> components() const;

  cplx trace() const;
  double purity() const;
  double hermiticity_error() const;
  /// <q|rho|q> on the grid.
  std::vector<double> position_density() const;

  DensityMatrix with_tag(std::string tag) const;

private:
  QGrid grid_;
  Constants constants_;
  std::string tag_ = "zero";
  std::optional<Eigen::MatrixXcd> dense_;
  std::vector<PureComponent> components_;
};

/// Coherent state centered at (q0, p0) with the phase convention
/// (lambda / pi hbar)^{N/4} exp[-(lambda / 2 hbar)(q0 - q')^2 - (i / hbar) p0 (q0 - q')].
WaveFunction coherent_state(const Vec3& q0, const Vec3& p0, const Constants& k, const QGrid& grid,
                            std::string gauge_tag = "zero");

/// Gaussian packet with position standard deviations `widths`, normalized on the grid.
WaveFunction gaussian_packet(const Vec3& q0, const Vec3& p0, const Vec3& widths, const QGrid& grid,
                             const Constants& k, std::string gauge_tag = "zero");

DensityMatrix density_from_pure(const WaveFunction& psi);

/// Weighted mixture; weights must be non-negative and sum to one.
DensityMatrix mix(const std::vector<std::pair<double, WaveFunction>>& parts);

/// psi -> exp(sign * i e chi / c hbar) psi.
WaveFunction gauge_rotate(const WaveFunction& psi, const GaugeFn& chi, int sign = +1, double t = 0.0);
/// rho -> exp(sign * i e chi / c hbar) rho exp(-sign * i e chi / c hbar).
DensityMatrix gauge_rotate(const DensityMatrix& rho, const GaugeFn& chi, int sign = +1, double t = 0.0);

/// rho(q1, q2) -> exp(i theta(q1)) rho(q1, q2) exp(-i theta(q2)) for an arbitrary phase table.
DensityMatrix rotate_by_phase(const DensityMatrix& rho, std::span<const double> theta, std::string new_tag);

/// Tag carried by a state after gauge_rotate with `chi` and `sign`.
std::string rotated_tag(const std::string& tag, const GaugeFn& chi, int sign);

void check_boundary(std::span<const cplx> psi, const Shape& shape, const char* what);

} // namespace gipsp
