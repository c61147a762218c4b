#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gipsp {

using cplx = std::complex<double>;
using CArray = std::vector<cplx>;
using Shape = std::vector<std::size_t>;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
  using Error::Error;
};

/// Raised when a state or distribution carries too much weight near the edge
/// of the periodic box for whole-space integrals to be trusted.
class BoundaryMassError : public Error {
public:
  using Error::Error;
};

/// Physical constants in Gaussian units. Only the charge may be negative.
struct Constants {
  double hbar = 1.0;
  double m = 1.0;
  double e = 1.0;
  double c = 1.0;
  double lambda = 1.0; ///< coherent-state squeeze parameter, lambda = m * omega

  void validate() const;
};

/// One uniform axis. Node j sits at center + (j - n/2) * spacing.
struct Axis {
  std::size_t n = 0;
  double spacing = 0.0;
  double center = 0.0;

  double coord(std::size_t j) const {
    return center + (static_cast<double>(j) - static_cast<double>(n / 2)) * spacing;
  }
  double extent() const { return static_cast<double>(n) * spacing; }
  /// Angular wavenumber of FFT bin k (natural FFT order), in units of 1/spacing.
  double wavenumber(std::size_t k) const;
};

/// Uniform position grid in one or two dimensions.
class QGrid {
public:
  QGrid() = default;
  explicit QGrid(std::vector<Axis> axes);

  /// Square grid whose position and dual-momentum spacings coincide.
  static QGrid balanced(std::size_t dim, std::size_t n, double hbar, double center = 0.0);

  std::size_t dim() const { return axes_.size(); }
  const Axis& axis(std::size_t i) const { return axes_.at(i); }
  const std::vector<Axis>& axes() const { return axes_; }
  Shape shape() const;
  std::size_t size() const;
  double cell_volume() const;
  /// Coordinates of a flat (row-major) index, padded with zeros to three components.
  Vec3 point(std::size_t flat) const;

  bool operator==(const QGrid& other) const;

private:
  std::vector<Axis> axes_;
};

/// Position grid together with its FFT-dual momentum grid (centered at zero).
/// Arrays on a PhaseGrid are row-major with all position axes first.
class PhaseGrid {
public:
  PhaseGrid() = default;
  PhaseGrid(QGrid qgrid, double hbar);

  const QGrid& q() const { return q_; }
  std::size_t dim() const { return q_.dim(); }
  const Axis& p_axis(std::size_t i) const { return p_.at(i); }
  double hbar() const { return hbar_; }
  Shape shape() const;
  std::size_t size() const;
  std::size_t q_size() const { return q_.size(); }
  std::size_t p_size() const;
  double cell_volume() const;
  /// Momentum coordinates of a flat index into the momentum block.
  Vec3 momentum(std::size_t p_flat) const;

  bool operator==(const PhaseGrid& other) const;

private:
  QGrid q_;
  std::vector<Axis> p_;
  double hbar_ = 1.0;
};

std::size_t shape_size(const Shape& shape);
std::size_t stride_of(const Shape& shape, std::size_t axis);

/// Unnormalized in-place FFT over the listed axes of a row-major array.
/// sign = -1 applies exp(-2 pi i jk/n), sign = +1 its conjugate.
void fft(std::span<cplx> data, const Shape& shape, std::span<const std::size_t> axes, int sign);

enum class Direction { Forward, Inverse };

/// Continuum-normalized transform along one axis with kernel exp(-+ i p q / hbar).
/// Forward maps samples on `q_axis` to the centered dual momentum axis; Inverse
/// maps back. Unitary: the round trip is the identity and Parseval holds with
/// cell weights dq and dp.
CArray dft_axis(std::span<const cplx> field, const Shape& shape, std::size_t axis,
                const Axis& q_axis, double hbar, Direction direction);

/// Multiplies the spectrum along `axis` by i*kappa (Nyquist bin dropped).
void spectral_derivative(std::span<cplx> data, const Shape& shape, std::size_t axis, double spacing);

/// f(x) -> f(x + cells * spacing) by trigonometric interpolation. The Nyquist
/// bin is scaled by cos(pi * cells), which keeps real data real.
void spectral_shift(std::span<cplx> data, const Shape& shape, std::size_t axis, double cells);

/// Same as spectral_shift, but the shift varies with the index along another axis:
/// row r along `shift_axis` is translated by cells[r] along `axis`.
void spectral_shear(std::span<cplx> data, const Shape& shape, std::size_t axis,
                    std::size_t shift_axis, std::span<const double> cells);

/// Riemann sum with uniform cell weight.
cplx integrate(std::span<const cplx> field, double cell_volume);
double integrate(std::span<const double> field, double cell_volume);

/// Fraction of sum |f| carried by nodes within the outer `shell` fraction of any axis.
double boundary_mass_fraction(std::span<const cplx> field, const Shape& shape, double shell = 0.1);

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b);
double max_abs(std::span<const cplx> a);
double max_imag(std::span<const cplx> a);

/// Worker count used by parallel_for; defaults to 1.
void set_threads(std::size_t n);
std::size_t threads();
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

} // namespace gipsp
