#include "gipsp/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "gipsp/io.hpp"

namespace gipsp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) { throw ConfigError(path + ": " + what); }

const json* find(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(path, "must be finite");
  return v;
}

double number_or(const json& obj, const char* key, const std::string& path, double fallback) {
  const json* v = find(obj, key);
  return v ? number(*v, path + "." + key) : fallback;
}

double positive_or(const json& obj, const char* key, const std::string& path, double fallback) {
  const double v = number_or(obj, key, path, fallback);
  if (!(v > 0.0)) {
    std::ostringstream msg;
    msg << "must be positive (got " << v << ")";
    fail(path + "." + key, msg.str());
  }
  return v;
}

std::string string_or(const json& obj, const char* key, const std::string& path, const std::string& fallback) {
  const json* v = find(obj, key);
  if (!v) return fallback;
  if (!v->is_string()) fail(path + "." + key, "expected a string");
  return v->get<std::string>();
}

Vec3 vec3(const json& j, const std::string& path, std::size_t dim) {
  Vec3 v{0.0, 0.0, 0.0};
  if (j.is_number()) {
    v[0] = number(j, path);
    return v;
  }
  if (!j.is_array() || j.size() < dim || j.size() > 3) fail(path, "expected an array of " + std::to_string(dim) + " numbers");
  for (std::size_t a = 0; a < j.size(); ++a) v[a] = number(j[a], path + "[" + std::to_string(a) + "]");
  return v;
}

Vec3 vec3_or(const json& obj, const char* key, const std::string& path, std::size_t dim, Vec3 fallback) {
  const json* v = find(obj, key);
  return v ? vec3(*v, path + "." + key, dim) : fallback;
}

/// A polynomial is a number or a list of {"coef": c, "pow": [ex, ey, ez, et]}.
Poly poly(const json& j, const std::string& path) {
  if (j.is_number()) return Poly::constant(number(j, path));
  if (!j.is_array()) fail(path, "expected a number or a list of terms");
  Poly p;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string tp = path + "[" + std::to_string(i) + "]";
    const json& t = j[i];
    if (!t.is_object() || !find(t, "coef")) fail(tp, "term needs 'coef' and 'pow'");
    Poly::Exponents ex{0, 0, 0, 0};
    if (const json* pw = find(t, "pow")) {
      if (!pw->is_array() || pw->size() > 4) fail(tp + ".pow", "expected up to four non-negative integers");
      for (std::size_t a = 0; a < pw->size(); ++a) {
        if (!(*pw)[a].is_number_integer() || (*pw)[a].get<int>() < 0) {
          fail(tp + ".pow", "expected up to four non-negative integers");
        }
        ex[a] = (*pw)[a].get<int>();
      }
    }
    p.add_term(number(t["coef"], tp + ".coef"), ex);
  }
  return p;
}

GaugeField field_from(const json& j, const std::string& path, std::size_t dim) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string type = string_or(j, "type", path, "zero");
  if (type == "zero") return GaugeField::zero();
  if (type == "uniform_b") {
    const json* b = find(j, "B");
    if (!b) fail(path + ".B", "required for uniform_b");
    const std::string gauge = string_or(j, "gauge", path, "symmetric");
    GaugePreset preset;
    if (gauge == "landau") {
      preset = GaugePreset::Landau;
    } else if (gauge == "symmetric") {
      preset = GaugePreset::Symmetric;
    } else {
      fail(path + ".gauge", "unknown preset '" + gauge + "' (landau, symmetric)");
    }
    try {
      if (b->is_number()) return GaugeField::uniform_b(number(*b, path + ".B"), preset);
      return GaugeField::uniform_b(vec3(*b, path + ".B", 3), preset);
    } catch (const UnsupportedField& e) {
      fail(path, e.what());
    }
  }
  if (type == "uniform_e") {
    const json* e = find(j, "E");
    if (!e) fail(path + ".E", "required for uniform_e");
    return GaugeField::uniform_e(vec3(*e, path + ".E", dim));
  }
  if (type == "polynomial") {
    PolyVec A;
    if (const json* a = find(j, "A")) {
      if (!a->is_array() || a->size() > 3) fail(path + ".A", "expected up to three polynomials");
      for (std::size_t i = 0; i < a->size(); ++i) A[i] = poly((*a)[i], path + ".A[" + std::to_string(i) + "]");
    }
    Poly phi;
    if (const json* p = find(j, "phi")) phi = poly(*p, path + ".phi");
    return GaugeField::polynomial(A, phi);
  }
  if (type == "superposition") {
    const json* terms = find(j, "terms");
    if (!terms || !terms->is_array() || terms->empty()) fail(path + ".terms", "expected a non-empty list of fields");
    std::vector<GaugeField> fields;
    for (std::size_t i = 0; i < terms->size(); ++i) {
      fields.push_back(field_from((*terms)[i], path + ".terms[" + std::to_string(i) + "]", dim));
    }
    return GaugeField::superposition(std::move(fields));
  }
  fail(path + ".type", "unknown field type '" + type + "'");
}

WaveFunction pure_state(const json& j, const std::string& path, const QGrid& grid, const Constants& k,
                        const std::string& tag) {
  if (!j.is_object()) fail(path, "expected an object");
  const std::string type = string_or(j, "type", path, "coherent");
  const std::size_t dim = grid.dim();
  const Vec3 q0 = vec3_or(j, "q0", path, dim, {0.0, 0.0, 0.0});
  const Vec3 p0 = vec3_or(j, "p0", path, dim, {0.0, 0.0, 0.0});
  try {
    if (type == "coherent") return coherent_state(q0, p0, k, grid, tag);
    if (type == "gaussian") {
      const Vec3 w = vec3_or(j, "widths", path, dim, {1.0, 1.0, 1.0});
      for (std::size_t a = 0; a < dim; ++a) {
        if (!(w[a] > 0.0)) fail(path + ".widths", "must be positive");
      }
      return gaussian_packet(q0, p0, w, grid, k, tag);
    }
    if (type == "superposition") {
      const json* parts = find(j, "parts");
      if (!parts || !parts->is_array() || parts->empty()) fail(path + ".parts", "expected a non-empty list");
      WaveFunction sum;
      for (std::size_t i = 0; i < parts->size(); ++i) {
        const std::string pp = path + ".parts[" + std::to_string(i) + "]";
        const json& part = (*parts)[i];
        const json* st = find(part, "state");
        if (!st) fail(pp + ".state", "required");
        const double amp = number_or(part, "amplitude", pp, 1.0);
        WaveFunction psi = pure_state(*st, pp + ".state", grid, k, tag);
        if (i == 0) {
          sum = psi;
          for (auto& v : sum.values) v *= amp;
        } else {
          for (std::size_t n = 0; n < psi.values.size(); ++n) sum.values[n] += amp * psi.values[n];
        }
      }
      const double norm = std::sqrt(sum.norm_squared());
      if (!(norm > 0.0)) fail(path, "superposition vanishes");
      for (auto& v : sum.values) v /= norm;
      return sum;
    }
  } catch (const BoundaryMassError& e) {
    fail(path, e.what());
  }
  fail(path + ".type", "unknown state type '" + type + "'");
}

std::vector<Kind> transforms_from(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected a list of kinds");
  std::vector<Kind> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string tp = path + "[" + std::to_string(i) + "]";
    if (!j[i].is_string()) fail(tp, "expected a kind name");
    Kind k;
    try {
      k = kind_from_string(j[i].get<std::string>());
    } catch (const Error& e) {
      fail(tp, e.what());
    }
    if (k == Kind::Classical) fail(tp, "'classical' is not a transform of a state");
    if (std::find(out.begin(), out.end(), k) == out.end()) out.push_back(k);
  }
  return out;
}

bool is_pow2(std::size_t n) { return n >= 8 && (n & (n - 1)) == 0; }

std::string short_name(Kind k) {
  switch (k) {
  case Kind::W: return "w";
  case Kind::Wg: return "wg";
  case Kind::WgRadial: return "wg_radial";
  case Kind::Q: return "q";
  case Kind::Qg: return "qg";
  case Kind::QgRadial: return "qg_radial";
  case Kind::Classical: return "classical";
  }
  return "unknown";
}

bool gauge_kind(Kind k) { return k != Kind::W && k != Kind::Q && k != Kind::Classical; }

PhaseSpaceFunction transform(Kind kind, const DensityMatrix& rho, const GaugeField& f, const SmoothingSpec& s) {
  switch (kind) {
  case Kind::W: return wigner(rho);
  case Kind::Wg: return wigner_gauge_stratonovich(rho, f);
  case Kind::WgRadial: return wigner_gauge_poincare(rho, f);
  case Kind::Q: return husimi_overlap(rho, s);
  case Kind::Qg: return husimi_gauge(rho, f, s);
  case Kind::QgRadial: return husimi_gauge_poincare(rho, f, s);
  case Kind::Classical: break;
  }
  throw Error("transform: unsupported kind");
}

DensityMatrix invert(const PhaseSpaceFunction& F, const GaugeField& f, const SmoothingSpec& s) {
  switch (F.kind) {
  case Kind::W: return inverse_wigner(F);
  case Kind::Wg: return inverse_wigner_gauge(F, f);
  case Kind::WgRadial: return inverse_wigner_poincare(F, f);
  case Kind::Q: return inverse_wigner(wigner_from_husimi(F, s));
  case Kind::Qg: return density_from_husimi_gauge(F, f, s);
  case Kind::QgRadial: return density_from_husimi_poincare(F, f, s);
  case Kind::Classical: break;
  }
  throw Error("invert: unsupported kind");
}

double kernel_diff(const DensityMatrix& a, const DensityMatrix& b) {
  return (a.kernel() - b.kernel()).cwiseAbs().maxCoeff();
}

class Stopwatch {
public:
  double lap() {
    const auto now = std::chrono::steady_clock::now();
    const double s = std::chrono::duration<double>(now - last_).count();
    last_ = now;
    return s;
  }

private:
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

void write_json_file(const fs::path& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

} // namespace

ScenarioConfig parse_config(const json& j) {
  if (!j.is_object()) fail("config", "expected a JSON object");
  ScenarioConfig cfg;
  cfg.source = j;
  cfg.name = string_or(j, "name", "config", "scenario");

  const json empty = json::object();
  const json& kc = find(j, "constants") ? j["constants"] : empty;
  cfg.constants.hbar = positive_or(kc, "hbar", "constants", 1.0);
  cfg.constants.m = positive_or(kc, "m", "constants", 1.0);
  cfg.constants.c = positive_or(kc, "c", "constants", 1.0);
  cfg.constants.lambda = positive_or(kc, "lambda", "constants", 1.0);
  cfg.constants.e = number_or(kc, "e", "constants", 1.0);

  const json* g = find(j, "grid");
  if (!g || !g->is_object()) fail("grid", "required object with 'dim' and 'n'");
  const json* dimj = find(*g, "dim");
  if (!dimj || !dimj->is_number_integer() || dimj->get<int>() < 1 || dimj->get<int>() > 2) {
    fail("grid.dim", "must be 1 or 2");
  }
  const auto dim = dimj->get<std::size_t>();
  const json* nj = find(*g, "n");
  if (!nj || !nj->is_number_integer() || nj->get<long>() < 0 || !is_pow2(nj->get<std::size_t>())) {
    fail("grid.n", "must be a power of two >= 8");
  }
  const auto n = nj->get<std::size_t>();
  const double center = number_or(*g, "center", "grid", 0.0);
  if (find(*g, "spacing")) {
    cfg.grid = QGrid(std::vector<Axis>(dim, Axis{n, positive_or(*g, "spacing", "grid", 1.0), center}));
  } else {
    cfg.grid = QGrid::balanced(dim, n, cfg.constants.hbar, center);
  }

  cfg.field = field_from(find(j, "field") ? j["field"] : empty, "field", dim);
  if (const json* c = find(j, "gauge_transform")) cfg.gauge_transform = GaugeFn{poly(*c, "gauge_transform")};
  if (const json* c = find(j, "chi")) cfg.chi = GaugeFn{poly(*c, "chi")};

  const json* st = find(j, "state");
  if (!st) fail("state", "required");
  cfg.state = *st;

  cfg.transforms = transforms_from(find(j, "transforms") ? j["transforms"] : json::array({"W", "W_g"}), "transforms");

  if (const json* s = find(j, "smoothing")) {
    cfg.smoothing.beta = positive_or(*s, "beta", "smoothing", cfg.smoothing.beta);
    cfg.smoothing.eps_reg = positive_or(*s, "eps_reg", "smoothing", cfg.smoothing.eps_reg);
    if (cfg.smoothing.beta > 1.0) fail("smoothing.beta", "must not exceed 1");
  }

  if (const json* e = find(j, "evolution")) {
    if (!e->is_object()) fail("evolution", "expected an object");
    EvolutionSpec spec;
    spec.field = cfg.field;
    try {
      spec.propagator = propagator_from_string(string_or(*e, "propagator", "evolution", "schrodinger_split"));
    } catch (const Error& err) {
      fail("evolution.propagator", err.what());
    }
    spec.dt = positive_or(*e, "dt", "evolution", 0.01);
    spec.t_final = number_or(*e, "t_final", "evolution", 0.0);
    if (spec.t_final < 0.0) fail("evolution.t_final", "must be non-negative");
    const std::string ord = string_or(*e, "ordering", "evolution", "written");
    if (ord == "written") {
      spec.ordering = CrossOrdering::Written;
    } else if (ord == "symmetrized") {
      spec.ordering = CrossOrdering::Symmetrized;
    } else {
      fail("evolution.ordering", "expected 'written' or 'symmetrized'");
    }
    spec.smoothing = cfg.smoothing;
    const double stride = number_or(*e, "snapshot_stride", "evolution", 0.0);
    if (stride < 0.0 || stride != std::floor(stride)) fail("evolution.snapshot_stride", "must be a non-negative integer");
    cfg.snapshot_stride = static_cast<std::size_t>(stride);
    cfg.evolution = spec;
  }

  if (const json* t = find(j, "tolerances")) {
    if (!t->is_object()) fail("tolerances", "expected an object");
    auto& tol = cfg.tolerances;
    const std::pair<const char*, double*> fields[] = {
        {"norm", &tol.norm},
        {"gauge_invariance", &tol.gauge_invariance},
        {"reduction", &tol.reduction},
        {"round_trip", &tol.round_trip},
        {"husimi_round_trip", &tol.husimi_round_trip},
        {"husimi_total", &tol.husimi_total},
        {"positivity", &tol.positivity},
        {"imaginary", &tol.imaginary},
        {"mass", &tol.mass},
        {"gauge_dynamics", &tol.gauge_dynamics},
    };
    for (auto it = t->begin(); it != t->end(); ++it) {
      bool known = false;
      for (const auto& [key, dst] : fields) {
        if (it.key() == key) {
          *dst = positive_or(*t, key, "tolerances", *dst);
          known = true;
        }
      }
      if (!known) fail("tolerances." + it.key(), "unknown tolerance");
    }
  }

  if (const json* o = find(j, "output")) {
    if (!o->is_object()) fail("output", "expected an object");
    cfg.output_dir = string_or(*o, "dir", "output", cfg.output_dir.string());
    if (const json* c = find(*o, "csv")) {
      if (!c->is_boolean()) fail("output.csv", "expected true or false");
      cfg.csv = c->get<bool>();
    }
  }

  // Build once so that state errors surface as configuration errors.
  build_state(cfg.state, cfg.grid, cfg.constants, cfg.field);
  return cfg;
}

ScenarioConfig load_config(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError("config: cannot open '" + file.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }
  return parse_config(j);
}

DensityMatrix build_state(const json& spec, const QGrid& grid, const Constants& k, const GaugeField& field,
                          WaveFunction* pure) {
  const std::string tag = field.tag();
  if (spec.is_object() && string_or(spec, "type", "state", "") == "mixture") {
    const json* parts = find(spec, "parts");
    if (!parts || !parts->is_array() || parts->empty()) fail("state.parts", "expected a non-empty list");
    std::vector<std::pair<double, WaveFunction>> comps;
    double total = 0.0;
    for (std::size_t i = 0; i < parts->size(); ++i) {
      const std::string pp = "state.parts[" + std::to_string(i) + "]";
      const json& part = (*parts)[i];
      const double w = number_or(part, "weight", pp, 1.0);
      if (w < 0.0) fail(pp + ".weight", "must be non-negative");
      const json* st = find(part, "state");
      if (!st) fail(pp + ".state", "required");
      comps.emplace_back(w, pure_state(*st, pp + ".state", grid, k, tag));
      total += w;
    }
    if (!(total > 0.0)) fail("state.parts", "weights sum to zero");
    for (auto& c : comps) c.first /= total;
    return mix(comps);
  }
  WaveFunction psi = pure_state(spec, "state", grid, k, tag);
  if (pure) *pure = psi;
  return density_from_pure(psi);
}

std::vector<std::string> expected_artifacts() { return {"config.json", "report.json"}; }

RunResult run_scenario(const ScenarioConfig& cfg, double tolerance_scale, std::ostream* log) {
  if (!(tolerance_scale > 0.0)) throw ConfigError("--tolerance-scale: must be positive");
  const Tolerances& tol = cfg.tolerances;
  auto scaled = [&](double t) { return t * tolerance_scale; };
  RunResult result;
  json runtimes = json::object();
  json artifacts = json::array();
  json warnings = json::array();
  Stopwatch clock;
  auto say = [&](const std::string& s) {
    if (log) *log << s << '\n';
  };
  auto check = [&](std::string name, double value, std::optional<double> t, std::string note = {}) {
    if (t) t = scaled(*t);
    result.checks.push_back(Check{std::move(name), value, t, std::move(note)});
  };

  const fs::path out = cfg.output_dir;
  fs::create_directories(out);

  GaugeField field = cfg.field;
  WaveFunction psi;
  bool is_pure = !(cfg.state.is_object() && cfg.state.value("type", "") == "mixture");
  DensityMatrix rho = build_state(cfg.state, cfg.grid, cfg.constants, field, &psi);
  if (cfg.gauge_transform) {
    field = field.gauged(*cfg.gauge_transform);
    rho = gauge_rotate(rho, *cfg.gauge_transform);
    if (is_pure) psi = gauge_rotate(psi, *cfg.gauge_transform);
  }
  runtimes["state"] = clock.lap();
  check("state_trace_err", std::abs(rho.trace() - 1.0), tol.norm);
  if (is_pure) write_wavefunction(out / "psi", psi), artifacts.push_back("psi.bin");

  std::optional<GaugeField> twin_field;
  std::optional<DensityMatrix> twin_rho;
  if (cfg.chi) {
    twin_field = field.gauged(*cfg.chi);
    twin_rho = gauge_rotate(rho, *cfg.chi);
  }
  const auto pot = field.potentials(cfg.constants.c);
  const bool zero_a = pot.A[0].is_zero() && pot.A[1].is_zero() && pot.A[2].is_zero();

  std::map<Kind, PhaseSpaceFunction> computed;
  auto get = [&](Kind k) -> const PhaseSpaceFunction& {
    auto it = computed.find(k);
    if (it == computed.end()) it = computed.emplace(k, transform(k, rho, field, cfg.smoothing)).first;
    return it->second;
  };

  for (Kind kind : cfg.transforms) {
    const std::string sn = short_name(kind);
    say("transform " + to_string(kind));
    Stopwatch local;
    const PhaseSpaceFunction& F = get(kind);
    runtimes["transform_" + sn] = local.lap();
    write_phase_function(out / sn, F);
    artifacts.push_back(sn + ".bin");
    if (cfg.csv) {
      write_csv_slice(out / (sn + "_slice.csv"), F);
      artifacts.push_back(sn + "_slice.csv");
    }

    check(sn + "_total_err", std::abs(F.total() - 1.0), is_husimi(kind) ? tol.husimi_total : tol.norm);
    if (is_husimi(kind)) {
      double lo = 0.0;
      double hi = 0.0;
      for (const auto& v : F.values) {
        lo = std::min(lo, v.real());
        hi = std::max(hi, v.real());
      }
      const double bound = std::pow(2.0 * kPi * cfg.constants.hbar, -static_cast<double>(cfg.grid.dim()));
      check(sn + "_max_imag", max_imag(F.values), tol.imaginary);
      check(sn + "_negativity", std::max(0.0, -lo), tol.positivity);
      check(sn + "_excess_over_bound", std::max(0.0, hi - bound), tol.positivity);
    }

    if (zero_a && gauge_kind(kind)) {
      const Kind base = is_husimi(kind) ? Kind::Q : Kind::W;
      // Q_g smooths W_g, so it is compared with the smoothed Wigner function
      // rather than the overlap route used for Q.
      const auto& B = kind == Kind::Qg ? husimi_from_wigner(get(Kind::W), cfg.smoothing) : get(base);
      check(sn + "_equals_" + short_name(base) + "_max_err", max_abs_diff(F.values, B.values), tol.reduction);
    }

    if (twin_rho && gauge_kind(kind)) {
      Stopwatch tw;
      const auto T = transform(kind, *twin_rho, *twin_field, cfg.smoothing);
      runtimes["twin_" + sn] = tw.lap();
      check(sn + "_gauge_invariance_max_err", max_abs_diff(F.values, T.values), tol.gauge_invariance);
    }

    if (cfg.grid.dim() == 1) {
      Stopwatch rt;
      const bool husimi = is_husimi(kind);
      try {
        const auto back = invert(F, field, cfg.smoothing);
        check(sn + "_round_trip_max_err", kernel_diff(back, rho), husimi ? tol.husimi_round_trip : tol.round_trip);
      } catch (const IllPosedInverse& e) {
        check(sn + "_round_trip_max_err", std::numeric_limits<double>::infinity(), tol.husimi_round_trip, e.what());
      }
      runtimes["round_trip_" + sn] = rt.lap();
    }
  }

  if (cfg.evolution) {
    EvolutionSpec spec = *cfg.evolution;
    spec.field = field;
    Stopwatch ev;
    say("evolution " + to_string(spec.propagator));
    const bool schrodinger =
        spec.propagator == Propagator::SchrodingerSplit || spec.propagator == Propagator::SchrodingerDense;
    auto gauge_view = [&](const DensityMatrix& r, const GaugeField& f) {
      return spec.propagator == Propagator::HusimiGauge ? husimi_gauge(r, f, cfg.smoothing)
                                                        : wigner_gauge_stratonovich(r, f);
    };
    auto evolve_phase = [&](const PhaseSpaceFunction& F0, const GaugeField& f, double t_end, PropagationLog* plog,
                            double* loss) {
      EvolutionSpec s = spec;
      s.field = f;
      s.t_final = t_end;
      if (spec.propagator == Propagator::Liouville) return liouville_propagate(F0, s, loss);
      return propagate_phase_space(F0, s, plog, [&](const std::string& w) { warnings.push_back(w); });
    };

    PhaseSpaceFunction final_state;
    if (schrodinger) {
      if (!is_pure) throw ConfigError("evolution.propagator: Schrodinger propagation needs a pure state");
      const WaveFunction end = schrodinger_propagate(psi, spec);
      check("evolution_norm_drift", std::abs(end.norm_squared() - psi.norm_squared()), tol.norm);
      check("evolution_energy_drift", std::abs(energy(end, field, spec.t_final) - energy(psi, field, 0.0)), {});
      write_wavefunction(out / "psi_final", end);
      artifacts.push_back("psi_final.bin");
      final_state = wigner_gauge_stratonovich(density_from_pure(end), field, spec.t_final);
      if (twin_rho) {
        EvolutionSpec twin_spec = spec;
        twin_spec.field = *twin_field;
        const WaveFunction twin_end = schrodinger_propagate(gauge_rotate(psi, *cfg.chi), twin_spec);
        const auto twin_final = wigner_gauge_stratonovich(density_from_pure(twin_end), *twin_field, spec.t_final);
        check("evolution_gauge_invariance_max_err", max_abs_diff(final_state.values, twin_final.values),
              tol.gauge_dynamics);
      }
    } else {
      const PhaseSpaceFunction F0 = gauge_view(rho, field);
      const std::size_t stride = cfg.snapshot_stride;
      PropagationLog plog;
      double loss = 0.0;
      if (stride == 0) {
        final_state = evolve_phase(F0, field, spec.t_final, &plog, &loss);
      } else {
        // Segments of `stride` steps; each segment end is written as a snapshot.
        const double seg = spec.dt * static_cast<double>(stride);
        final_state = F0;
        std::size_t index = 0;
        while (final_state.time < spec.t_final - 1e-12 * std::max(1.0, spec.t_final)) {
          PropagationLog part;
          double part_loss = 0.0;
          final_state = evolve_phase(final_state, field, std::min(spec.t_final, final_state.time + seg), &part,
                                     &part_loss);
          plog.steps += part.steps;
          plog.max_norm_drift = std::max(plog.max_norm_drift, part.max_norm_drift);
          plog.max_imag_removed = std::max(plog.max_imag_removed, part.max_imag_removed);
          plog.cfl_warning = plog.cfl_warning || part.cfl_warning;
          loss += part_loss;
          std::ostringstream name;
          name << "snapshot_" << std::setw(4) << std::setfill('0') << ++index;
          write_phase_function(out / name.str(), final_state);
          artifacts.push_back(name.str() + ".bin");
        }
      }
      check("evolution_mass_drift", std::abs(final_state.total() - F0.total()), tol.mass);
      if (spec.propagator == Propagator::Liouville) {
        check("evolution_boundary_loss", loss, tol.mass);
      } else {
        check("evolution_max_imag_removed", plog.max_imag_removed, {});
      }
      if (twin_rho) {
        const auto twin_final = evolve_phase(gauge_view(*twin_rho, *twin_field), *twin_field, spec.t_final, nullptr, nullptr);
        check("evolution_gauge_invariance_max_err", max_abs_diff(final_state.values, twin_final.values),
              tol.gauge_dynamics);
      }
    }
    write_phase_function(out / "evolved", final_state);
    artifacts.push_back("evolved.bin");
    runtimes["evolution"] = ev.lap();
  }

  bool ok = true;
  json checks = json::array();
  for (const auto& c : result.checks) {
    ok = ok && c.pass();
    json row{{"name", c.name},
             {"value", std::isfinite(c.value) ? json(c.value) : json("inf")},
             {"tolerance", c.tolerance ? json(*c.tolerance) : json(nullptr)},
             {"status", c.tolerance ? (c.pass() ? "pass" : "fail") : "info"}};
    if (!c.note.empty()) row["note"] = c.note;
    checks.push_back(row);
  }
  result.exit_code = ok ? 0 : 1;
  json metrics = json::object();
  for (const auto& c : result.checks) metrics[c.name] = std::isfinite(c.value) ? json(c.value) : json("inf");
  result.report = json{{"scenario", cfg.name},
                       {"field_tag", field.tag()},
                       {"transforms", [&] {
                          json t = json::array();
                          for (Kind k : cfg.transforms) t.push_back(to_string(k));
                          return t;
                        }()},
                       {"tolerance_scale", tolerance_scale},
                       {"checks", checks},
                       {"metrics", metrics},
                       {"runtimes", runtimes},
                       {"warnings", warnings},
                       {"artifacts", artifacts},
                       {"passed", ok},
                       {"exit_code", result.exit_code}};
  write_json_file(out / "config.json", cfg.source);
  write_json_file(out / "report.json", result.report);
  return result;
}

std::string report_table(const fs::path& dir) {
  std::vector<std::string> missing;
  for (const auto& f : expected_artifacts()) {
    if (!fs::exists(dir / f)) missing.push_back(f);
  }
  json report;
  if (missing.empty()) {
    std::ifstream in(dir / "report.json");
    try {
      report = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error("report.json in '" + dir.string() + "' is not valid JSON: " + e.what());
    }
    for (const auto& a : report.value("artifacts", json::array())) {
      const auto name = a.get<std::string>();
      if (!fs::exists(dir / name)) missing.push_back(name);
    }
  }
  if (!missing.empty()) {
    std::string msg = "missing artifacts in '" + dir.string() + "'; expected:";
    for (const auto& m : missing) msg += " " + m;
    throw Error(msg);
  }

  std::ostringstream out;
  out << "scenario: " << report.value("scenario", std::string("?")) << "\n";
  out << "field:    " << report.value("field_tag", std::string("?")) << "\n\n";
  out << std::left << std::setw(40) << "check" << std::setw(14) << "value" << std::setw(14) << "tolerance"
      << "status\n";
  out << std::string(74, '-') << '\n';
  auto fmt = [](const json& v) {
    if (v.is_null()) return std::string("-");
    if (v.is_string()) return v.get<std::string>();
    std::ostringstream s;
    s << std::scientific << std::setprecision(3) << v.get<double>();
    return s.str();
  };
  for (const auto& c : report.at("checks")) {
    out << std::left << std::setw(40) << c.at("name").get<std::string>() << std::setw(14) << fmt(c.at("value"))
        << std::setw(14) << fmt(c.at("tolerance")) << c.at("status").get<std::string>() << '\n';
  }
  out << '\n' << std::left << std::setw(40) << "runtime" << "seconds\n";
  out << std::string(54, '-') << '\n';
  for (const auto& [name, secs] : report.at("runtimes").items()) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << secs.get<double>();
    out << std::left << std::setw(40) << name << s.str() << '\n';
  }
  out << "\nresult: " << (report.value("passed", false) ? "pass" : "fail") << '\n';
  return out.str();
}

} // namespace gipsp
