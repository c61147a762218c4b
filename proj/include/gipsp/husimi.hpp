#pragma once

#include "gipsp/phase_space.hpp"

namespace gipsp {

class IllPosedInverse : public Error {
public:
  using Error::Error;
};

/// Gaussian smoothing widths come from Constants::lambda. `beta` is the radius
/// of the elliptic spectral band kept by the deconvolution, as a fraction of
/// the Nyquist radius on every phase-space axis. `eps_reg` is the largest
/// fraction of spectral power allowed outside that band.
struct SmoothingSpec {
  double beta = 0.5;
  double eps_reg = 1e-10;

  void validate() const;
};

/// Gaussian convolution with (pi hbar)^{-N} exp(-lambda dq^2/hbar - dp^2/(lambda hbar)),
/// applied spectrally to a raw array on `grid`.
CArray smooth(std::span<const cplx> values, const PhaseGrid& grid, const Constants& k);

/// Wigner kind -> matching Husimi kind.
PhaseSpaceFunction husimi_from_wigner(const PhaseSpaceFunction& w, const SmoothingSpec& s = {});

/// Husimi kind -> matching Wigner kind. The result is real. Throws IllPosedInverse
/// when the input carries more than eps_reg of its spectral power outside the kept band.
PhaseSpaceFunction wigner_from_husimi(const PhaseSpaceFunction& q, const SmoothingSpec& s = {});

/// (2 pi hbar)^{-N} <alpha_{q,p}| rho |alpha_{q,p}> at every phase-space node.
PhaseSpaceFunction husimi_overlap(const DensityMatrix& rho, const SmoothingSpec& s = {});

PhaseSpaceFunction husimi_gauge(const DensityMatrix& rho, const GaugeField& f, const SmoothingSpec& s = {},
                                double t = 0.0);
/// Same quantity by summing the dequantizer kernel against rho (1-D, n <= 64).
PhaseSpaceFunction husimi_gauge_kernel(const DensityMatrix& rho, const GaugeField& f, double t = 0.0);

DensityMatrix density_from_husimi_gauge(const PhaseSpaceFunction& qg, const GaugeField& f,
                                        const SmoothingSpec& s = {}, double t = 0.0);
/// Quantizer kernel summed explicitly: over q first, then p, then v (1-D, n <= 64).
DensityMatrix density_from_husimi_gauge_kernel(const PhaseSpaceFunction& qg, const GaugeField& f,
                                               const SmoothingSpec& s = {}, double t = 0.0);

PhaseSpaceFunction husimi_gauge_poincare(const DensityMatrix& rho, const GaugeField& f,
                                         const SmoothingSpec& s = {}, double t = 0.0);
DensityMatrix density_from_husimi_poincare(const PhaseSpaceFunction& qg, const GaugeField& f,
                                           const SmoothingSpec& s = {}, double t = 0.0);
DensityMatrix density_from_husimi_poincare_kernel(const PhaseSpaceFunction& qg, const GaugeField& f,
                                                  const SmoothingSpec& s = {}, double t = 0.0);

} // namespace gipsp
