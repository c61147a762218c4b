#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "gipsp/io.hpp"
#include "gipsp/lattice.hpp"
#include "gipsp/states.hpp"

using namespace gipsp;

namespace {

CArray random_field(std::size_t n, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> d;
  CArray v(n);
  for (auto& x : v) x = {d(gen), d(gen)};
  return v;
}

double l2(const CArray& v, double cell) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return s * cell;
}

} // namespace

TEST_CASE("grid construction enforces sizes and the dual relation") {
  const auto g = QGrid::balanced(2, 32, 1.0);
  const PhaseGrid pg(g, 1.0);
  for (std::size_t a = 0; a < 2; ++a) {
    CHECK(g.axis(a).spacing * pg.p_axis(a).spacing * 32.0 == doctest::Approx(2.0 * kPi).epsilon(1e-15));
    CHECK(pg.p_axis(a).coord(16) == 0.0);
    CHECK(pg.p_axis(a).coord(1) == doctest::Approx(-pg.p_axis(a).coord(31)));
  }
  CHECK(pg.shape() == Shape{32, 32, 32, 32});
  CHECK_THROWS_AS(QGrid({Axis{12, 0.5, 0.0}}), Error);
  CHECK_THROWS_AS(QGrid({Axis{4, 0.5, 0.0}}), Error);
  CHECK_THROWS_AS(QGrid({Axis{16, -0.5, 0.0}}), Error);
}

TEST_CASE("constants validation allows only the charge to be negative") {
  Constants k;
  k.e = -2.0;
  CHECK_NOTHROW(k.validate());
  k.lambda = 0.0;
  CHECK_THROWS_AS(k.validate(), Error);
  k = Constants{};
  k.hbar = -1.0;
  CHECK_THROWS_AS(k.validate(), Error);
}

TEST_CASE("dft_axis round trip and Parseval on a random field") {
  const QGrid g({Axis{64, 0.3, 0.7}});
  const double hbar = 0.8;
  const PhaseGrid pg(g, hbar);
  const auto f = random_field(64, 7);
  const auto F = dft_axis(f, {64}, 0, g.axis(0), hbar, Direction::Forward);
  const auto back = dft_axis(F, {64}, 0, g.axis(0), hbar, Direction::Inverse);
  CHECK(max_abs_diff(back, f) <= 1e-12);
  CHECK(std::abs(l2(F, pg.p_axis(0).spacing) - l2(f, g.axis(0).spacing)) <= 1e-12 * l2(f, g.axis(0).spacing));
}

TEST_CASE("dft_axis acts on one axis of a 2-D array") {
  const Shape shape{16, 32};
  const auto f = random_field(16 * 32, 3);
  const QGrid g({Axis{32, 0.4, -0.2}});
  const auto F = dft_axis(f, shape, 1, g.axis(0), 1.0, Direction::Forward);
  for (std::size_t r = 0; r < 16; ++r) {
    const CArray row(f.begin() + static_cast<long>(r * 32), f.begin() + static_cast<long>((r + 1) * 32));
    const auto Fr = dft_axis(row, {32}, 0, g.axis(0), 1.0, Direction::Forward);
    for (std::size_t k = 0; k < 32; ++k) CHECK(std::abs(F[r * 32 + k] - Fr[k]) <= 1e-14);
  }
  CHECK_THROWS_AS(dft_axis(f, {16, 16}, 0, g.axis(0), 1.0, Direction::Forward), DimensionMismatch);
}

TEST_CASE("delta at the grid center has a constant-modulus spectrum") {
  const auto g = QGrid::balanced(1, 64, 1.0, 0.3);
  CArray f(64, 0.0);
  f[32] = 1.0;
  const auto F = dft_axis(f, {64}, 0, g.axis(0), 1.0, Direction::Forward);
  const double m0 = std::abs(F[0]);
  for (const auto& v : F) CHECK(std::abs(std::abs(v) - m0) <= 1e-14);
}

TEST_CASE("Gaussian transforms to the analytic Gaussian") {
  // Oracle: direct quadrature of the continuum transform.
  const double hbar = 1.0;
  const auto g = QGrid::balanced(1, 128, hbar);
  const PhaseGrid pg(g, hbar);
  CArray f(128);
  for (std::size_t j = 0; j < 128; ++j) f[j] = std::exp(-g.axis(0).coord(j) * g.axis(0).coord(j) / (2.0 * hbar));
  const auto F = dft_axis(f, {128}, 0, g.axis(0), hbar, Direction::Forward);
  double err_direct = 0.0;
  double err_closed = 0.0;
  for (std::size_t k = 0; k < 128; ++k) {
    const double p = pg.p_axis(0).coord(k);
    cplx direct = 0.0;
    for (std::size_t j = 0; j < 128; ++j) {
      const double q = g.axis(0).coord(j);
      direct += f[j] * std::polar(1.0, -p * q / hbar);
    }
    direct *= g.axis(0).spacing / std::sqrt(2.0 * kPi * hbar);
    err_direct = std::max(err_direct, std::abs(F[k] - direct));
    err_closed = std::max(err_closed, std::abs(F[k] - std::exp(-p * p / (2.0 * hbar))));
  }
  CHECK(err_direct <= 1e-12);
  CHECK(err_closed <= 1e-12);
}

TEST_CASE("integrate: constants, normalized Gaussians, odd functions") {
  const QGrid g({Axis{64, 0.25, 0.0}, Axis{32, 0.5, 0.0}});
  std::vector<double> ones(g.size(), 1.0);
  CHECK(integrate(ones, g.cell_volume()) == doctest::Approx(16.0 * 16.0).epsilon(1e-14));

  const auto g1 = QGrid::balanced(1, 128, 1.0);
  const double s = 0.9;
  CArray gauss(128);
  CArray odd(128);
  for (std::size_t j = 0; j < 128; ++j) {
    const double q = g1.axis(0).coord(j);
    gauss[j] = std::exp(-q * q / (2 * s * s)) / std::sqrt(2 * kPi * s * s);
    odd[j] = q * std::exp(-q * q);
  }
  const double L = g1.axis(0).extent() / 2.0;
  // Grid mass versus the error-function mass of the periodic cell.
  const double erf_mass = std::erf(L / (s * std::sqrt(2.0)));
  CHECK(std::abs(integrate(gauss, g1.cell_volume()).real() - erf_mass) <= 1e-10);
  CHECK(std::abs(integrate(gauss, g1.cell_volume()).real() - 1.0) <= 1e-10);
  CHECK(std::abs(integrate(odd, g1.cell_volume())) <= 1e-14);
}

TEST_CASE("spectral derivative and shift are exact for band-limited data") {
  const QGrid g({Axis{32, 2 * kPi / 32, 0.0}});
  CArray f(32);
  CArray df(32);
  CArray sh(32);
  const double cells = 0.37;
  const double dx = g.axis(0).spacing;
  for (std::size_t j = 0; j < 32; ++j) {
    const double x = g.axis(0).coord(j);
    f[j] = std::sin(3 * x) + 0.5 * std::cos(5 * x);
    df[j] = 3 * std::cos(3 * x) - 2.5 * std::sin(5 * x);
    sh[j] = std::sin(3 * (x + cells * dx)) + 0.5 * std::cos(5 * (x + cells * dx));
  }
  auto d = f;
  spectral_derivative(d, {32}, 0, dx);
  CHECK(max_abs_diff(d, df) <= 1e-12);
  auto s = f;
  spectral_shift(s, {32}, 0, cells);
  CHECK(max_abs_diff(s, sh) <= 1e-12);

  // A real Nyquist mode stays real under a fractional shift.
  CArray nyq(32);
  for (std::size_t j = 0; j < 32; ++j) nyq[j] = (j % 2 == 0) ? 1.0 : -1.0;
  spectral_shift(nyq, {32}, 0, 0.3);
  CHECK(max_imag(nyq) <= 1e-15);
}

TEST_CASE("spectral shear shifts each row by its own amount") {
  const std::size_t n = 32;
  const double dx = 2 * kPi / n;
  std::vector<double> cells(8);
  CArray f(8 * n);
  for (std::size_t r = 0; r < 8; ++r) {
    cells[r] = 0.2 * static_cast<double>(r) - 0.5;
    for (std::size_t j = 0; j < n; ++j) f[r * n + j] = std::cos(2 * dx * static_cast<double>(j));
  }
  auto out = f;
  spectral_shear(out, {8, n}, 1, 0, cells);
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t j = 0; j < n; ++j) {
      CHECK(std::abs(out[r * n + j] - std::cos(2 * dx * (static_cast<double>(j) + cells[r]))) <= 1e-12);
    }
  }
}

TEST_CASE("boundary mass diagnostic sees edge weight") {
  const auto g = QGrid::balanced(1, 64, 1.0);
  auto inside = coherent_state({0, 0, 0}, {0, 0, 0}, Constants{}, g);
  CHECK(boundary_mass_fraction(inside.values, g.shape()) < kBoundaryThreshold);
  CArray edge(64, 0.0);
  edge[1] = 1.0;
  CHECK(boundary_mass_fraction(edge, g.shape()) == doctest::Approx(1.0));
  CHECK_THROWS_AS(coherent_state({12, 0, 0}, {0, 0, 0}, Constants{}, g), BoundaryMassError);
}

TEST_CASE("parallel_for visits every index once with several threads") {
  set_threads(3);
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  set_threads(1);
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("array files round trip with sidecar metadata") {
  const auto dir = std::filesystem::temp_directory_path() / "gipsp_test_lattice_io";
  std::filesystem::create_directories(dir);
  const auto vals = random_field(24, 11);
  write_array(dir / "cplx", vals, {4, 6}, {{"note", "x"}});
  nlohmann::json meta;
  const auto back = read_array(dir / "cplx", meta);
  CHECK(back == vals);
  CHECK(meta["dtype"] == "complex128");
  CHECK(meta["shape"] == nlohmann::json::array({4, 6}));
  CHECK(meta["note"] == "x");
  CHECK(std::filesystem::file_size(dir / "cplx.bin") == 24 * 16);

  CArray real(10);
  for (std::size_t i = 0; i < 10; ++i) real[i] = 0.5 * static_cast<double>(i);
  write_array(dir / "real", real, {10}, {});
  CHECK(read_array(dir / "real", meta) == real);
  CHECK(meta["dtype"] == "float64");
  CHECK(std::filesystem::file_size(dir / "real.bin") == 80);

  const QGrid g({Axis{16, 0.3, 1.5}, Axis{8, 0.6, -0.5}});
  CHECK(grid_from_json(grid_to_json(g, 1.0)) == g);
  std::filesystem::remove_all(dir);
}
