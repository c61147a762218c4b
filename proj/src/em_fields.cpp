#include "gipsp/em_fields.hpp"

#include <cmath>
#include <sstream>

namespace gipsp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string vec_string(const Vec3& v) {
  std::ostringstream os;
  os.precision(17);
  os << "(" << v[0] << "," << v[1] << "," << v[2] << ")";
  return os.str();
}

} // namespace

GaugeField::GaugeField() : node_(Polynomial{}) {}
GaugeField::GaugeField(Node node) : node_(std::move(node)) {}

GaugeField GaugeField::zero() { return GaugeField(); }

GaugeField GaugeField::uniform_b(double Bz, GaugePreset preset) { return uniform_b(Vec3{0.0, 0.0, Bz}, preset); }

GaugeField GaugeField::uniform_b(const Vec3& B, GaugePreset preset) {
  if (preset == GaugePreset::Landau && (B[0] != 0.0 || B[1] != 0.0)) {
    throw UnsupportedField("Landau preset requires B along z");
  }
  return GaugeField(UniformB{B, preset});
}

GaugeField GaugeField::uniform_e(const Vec3& E) { return GaugeField(UniformE{E}); }

GaugeField GaugeField::polynomial(PolyVec A, Poly phi) { return GaugeField(Polynomial{std::move(A), std::move(phi)}); }

GaugeField GaugeField::superposition(std::vector<GaugeField> terms) {
  return GaugeField(Superposition{std::move(terms)});
}

GaugeField GaugeField::gauged(const GaugeFn& chi) const {
  return GaugeField(Gauged{std::make_shared<const GaugeField>(*this), chi});
}

Potentials GaugeField::potentials(double c) const {
  return std::visit(
      Overloaded{
          [](const UniformB& u) {
            Potentials p;
            if (u.preset == GaugePreset::Landau) {
              p.A[0] = Poly::monomial(-u.B[2], 0, 1);
            } else {
              // A = (B x q) / 2
              p.A[0] = Poly::monomial(0.5 * u.B[1], 0, 0, 1) + Poly::monomial(-0.5 * u.B[2], 0, 1);
              p.A[1] = Poly::monomial(0.5 * u.B[2], 1) + Poly::monomial(-0.5 * u.B[0], 0, 0, 1);
              p.A[2] = Poly::monomial(0.5 * u.B[0], 0, 1) + Poly::monomial(-0.5 * u.B[1], 1);
            }
            return p;
          },
          [](const UniformE& u) {
            Potentials p;
            p.phi = Poly::monomial(-u.E[0], 1) + Poly::monomial(-u.E[1], 0, 1) + Poly::monomial(-u.E[2], 0, 0, 1);
            return p;
          },
          [](const Polynomial& poly) { return Potentials{poly.A, poly.phi}; },
          [c](const Superposition& s) {
            Potentials p;
            for (const auto& term : s.terms) {
              const auto q = term.potentials(c);
              for (int i = 0; i < 3; ++i) p.A[i] = p.A[i] + q.A[i];
              p.phi = p.phi + q.phi;
            }
            return p;
          },
          [c](const Gauged& g) {
            auto p = g.base->potentials(c);
            const auto grad = g.chi.gradient();
            for (int i = 0; i < 3; ++i) p.A[i] = p.A[i] + grad[i];
            p.phi = p.phi - g.chi.time_derivative() * (1.0 / c);
            return p;
          },
      },
      node_);
}

std::string GaugeField::tag() const {
  return std::visit(
      Overloaded{
          [](const UniformB& u) {
            return std::string("uniform_b") + vec_string(u.B) +
                   (u.preset == GaugePreset::Landau ? "[landau]" : "[symmetric]");
          },
          [](const UniformE& u) { return "uniform_e" + vec_string(u.E); },
          [](const Polynomial& p) {
            if (p.A[0].is_zero() && p.A[1].is_zero() && p.A[2].is_zero() && p.phi.is_zero()) {
              return std::string("zero");
            }
            return "poly{A=(" + p.A[0].to_string() + "; " + p.A[1].to_string() + "; " + p.A[2].to_string() +
                   "), phi=" + p.phi.to_string() + "}";
          },
          [](const Superposition& s) {
            std::string out = "sum[";
            for (std::size_t i = 0; i < s.terms.size(); ++i) {
              if (i) out += ", ";
              out += s.terms[i].tag();
            }
            return out + "]";
          },
          [](const Gauged& g) { return "gauged(" + g.base->tag() + "; chi=" + g.chi.chi.to_string() + ")"; },
      },
      node_);
}

PotentialValues eval_potentials(const GaugeField& f, const Vec3& q, double t, const Constants& k) {
  const auto p = f.potentials(k.c);
  return {{p.A[0](q, t), p.A[1](q, t), p.A[2](q, t)}, p.phi(q, t)};
}

FieldStrengths field_strengths(const GaugeField& f, const Constants& k) {
  const auto p = f.potentials(k.c);
  FieldStrengths s;
  for (int i = 0; i < 3; ++i) s.E[i] = -p.phi.derivative(i) - p.A[i].derivative(3) * (1.0 / k.c);
  s.B[0] = p.A[2].derivative(1) - p.A[1].derivative(2);
  s.B[1] = p.A[0].derivative(2) - p.A[2].derivative(0);
  s.B[2] = p.A[1].derivative(0) - p.A[0].derivative(1);
  return s;
}

FieldValues eval_EB(const GaugeField& f, const Vec3& q, double t, const Constants& k) {
  const auto s = field_strengths(f, k);
  FieldValues v{};
  for (int i = 0; i < 3; ++i) {
    v.E[i] = s.E[i](q, t);
    v.B[i] = s.B[i](q, t);
  }
  return v;
}

Vec3 chord_integral(const GaugeField& f, const Vec3& q_c, const Vec3& u, double t, const Constants& k) {
  return PotentialSampler(f, t, k).chord(q_c, u);
}

double radial_phase(const GaugeField& f, const Vec3& q, double t, const Constants& k) {
  return PotentialSampler(f, t, k).radial(q);
}

PotentialSampler::PotentialSampler(const GaugeField& f, double t, const Constants& k)
    : coupling_(k.e / (k.hbar * k.c)) {
  const auto p = f.potentials(k.c);
  int degree = 0;
  for (int i = 0; i < 3; ++i) {
    A_[i] = p.A[i].at_time(t);
    degree = std::max(degree, A_[i].spatial_degree());
  }
  zero_ = A_[0].is_zero() && A_[1].is_zero() && A_[2].is_zero();
  chord_rule_ = gauss_legendre(nodes_for_degree(degree), -0.5, 0.5);
  // q . A(tau q) has degree `degree` in tau.
  radial_rule_ = gauss_legendre(nodes_for_degree(degree), 0.0, 1.0);
}

Vec3 PotentialSampler::A(const Vec3& q) const { return {A_[0](q), A_[1](q), A_[2](q)}; }

Vec3 PotentialSampler::chord(const Vec3& q_c, const Vec3& u) const {
  Vec3 sum{0.0, 0.0, 0.0};
  if (zero_) return sum;
  for (std::size_t n = 0; n < chord_rule_.nodes.size(); ++n) {
    const double tau = chord_rule_.nodes[n];
    const Vec3 x{q_c[0] + tau * u[0], q_c[1] + tau * u[1], q_c[2] + tau * u[2]};
    for (int i = 0; i < 3; ++i) sum[i] += chord_rule_.weights[n] * A_[i](x);
  }
  return sum;
}

double PotentialSampler::chord_phase(const Vec3& q_c, const Vec3& u) const {
  if (zero_) return 0.0;
  const auto a = chord(q_c, u);
  return coupling_ * (u[0] * a[0] + u[1] * a[1] + u[2] * a[2]);
}

double PotentialSampler::radial(const Vec3& q) const {
  if (zero_) return 0.0;
  double sum = 0.0;
  for (std::size_t n = 0; n < radial_rule_.nodes.size(); ++n) {
    const double tau = radial_rule_.nodes[n];
    const Vec3 x{tau * q[0], tau * q[1], tau * q[2]};
    sum += radial_rule_.weights[n] * (q[0] * A_[0](x) + q[1] * A_[1](x) + q[2] * A_[2](x));
  }
  return coupling_ * sum;
}

} // namespace gipsp
