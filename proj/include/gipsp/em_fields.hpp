#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "gipsp/lattice.hpp"
#include "gipsp/polynomial.hpp"

namespace gipsp {

class UnsupportedField : public Error {
public:
  using Error::Error;
};

/// Gauge function chi(q, t); polynomial so that grad and d/dt are exact.
struct GaugeFn {
  Poly chi;

  double operator()(const Vec3& q, double t = 0.0) const { return chi(q, t); }
  PolyVec gradient() const { return {chi.derivative(0), chi.derivative(1), chi.derivative(2)}; }
  Poly time_derivative() const { return chi.derivative(3); }
};

enum class GaugePreset { Landau, Symmetric };

/// Vector and scalar potentials flattened to polynomials in (x, y, z, t).
struct Potentials {
  PolyVec A;
  Poly phi;
};

/// Electric field and magnetic induction as polynomials in (x, y, z, t).
struct FieldStrengths {
  PolyVec E;
  PolyVec B;
};

/// Electromagnetic potentials built from presets, explicit polynomials,
/// superpositions, and gauge layers. Immutable value type.
class GaugeField {
public:
  struct UniformB {
    Vec3 B;
    GaugePreset preset;
  };
  struct UniformE {
    Vec3 E;
  };
  struct Polynomial {
    PolyVec A;
    Poly phi;
  };
  struct Superposition {
    std::vector<GaugeField> terms;
  };
  struct Gauged {
    std::shared_ptr<const GaugeField> base;
    GaugeFn chi;
  };
  using Node = std::variant<UniformB, UniformE, Polynomial, Superposition, Gauged>;

  /// A = 0, phi = 0.
  GaugeField();
  explicit GaugeField(Node node);

  static GaugeField zero();
  /// Out-of-plane field B e_z in the chosen gauge.
  static GaugeField uniform_b(double Bz, GaugePreset preset);
  static GaugeField uniform_b(const Vec3& B, GaugePreset preset);
  static GaugeField uniform_e(const Vec3& E);
  static GaugeField polynomial(PolyVec A, Poly phi = {});
  static GaugeField superposition(std::vector<GaugeField> terms);
  /// A -> A + grad chi, phi -> phi - (1/c) d chi / dt.
  GaugeField gauged(const GaugeFn& chi) const;

  const Node& node() const { return node_; }
  /// Potentials with all gauge layers applied; c enters through the gauge shift of phi.
  Potentials potentials(double c) const;
  /// Stable identifier used to tie states to the gauge they are expressed in.
  std::string tag() const;

private:
  Node node_;
};

struct PotentialValues {
  Vec3 A;
  double phi;
};
struct FieldValues {
  Vec3 E;
  Vec3 B;
};

PotentialValues eval_potentials(const GaugeField& f, const Vec3& q, double t, const Constants& k);

/// E = -grad phi - (1/c) dA/dt, B = curl A, derived symbolically.
FieldStrengths field_strengths(const GaugeField& f, const Constants& k);
FieldValues eval_EB(const GaugeField& f, const Vec3& q, double t, const Constants& k);

/// Average of A over the chord q_c + tau u, tau in [-1/2, 1/2]; exact for polynomial A.
Vec3 chord_integral(const GaugeField& f, const Vec3& q_c, const Vec3& u, double t, const Constants& k);

/// Radial phase (e / hbar c) q . int_0^1 A(tau q) dtau; exact for polynomial A.
double radial_phase(const GaugeField& f, const Vec3& q, double t, const Constants& k);

/// Precompiled potentials at a fixed time for repeated chord and radial evaluations.
class PotentialSampler {
public:
  PotentialSampler(const GaugeField& f, double t, const Constants& k);

  Vec3 A(const Vec3& q) const;
  Vec3 chord(const Vec3& q_c, const Vec3& u) const;
  /// (e / hbar c) u . chord(q_c, u)
  double chord_phase(const Vec3& q_c, const Vec3& u) const;
  double radial(const Vec3& q) const;
  bool vector_potential_zero() const { return zero_; }

private:
  PolyVec A_;
  Quadrature chord_rule_;
  Quadrature radial_rule_;
  double coupling_; // e / (hbar c)
  bool zero_;
};

} // namespace gipsp
