#include "gipsp/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>

namespace gipsp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path with_suffix(const fs::path& stem, const char* suffix) {
  fs::path p = stem;
  p += suffix;
  return p;
}

std::uint64_t to_little(double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return bits;
}

double from_little(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
  return std::bit_cast<double>(bits);
}

void write_json(const fs::path& file, const json& j) {
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out << j.dump(2) << '\n';
}

std::size_t nearest_node(const Axis& a, double x) {
  const double u = std::round((x - a.center) / a.spacing + static_cast<double>(a.n / 2));
  if (u <= 0.0) return 0;
  return std::min(a.n - 1, static_cast<std::size_t>(u));
}

} // namespace

json grid_to_json(const QGrid& grid, double hbar) {
  json axes = json::array();
  for (const auto& a : grid.axes()) axes.push_back({{"n", a.n}, {"spacing", a.spacing}, {"center", a.center}});
  return {{"axes", axes}, {"hbar", hbar}};
}

QGrid grid_from_json(const json& j) {
  std::vector<Axis> axes;
  for (const auto& a : j.at("axes")) {
    axes.push_back(Axis{a.at("n").get<std::size_t>(), a.at("spacing").get<double>(), a.at("center").get<double>()});
  }
  return QGrid(std::move(axes));
}

void write_array(const fs::path& stem, std::span<const cplx> values, const Shape& shape, const json& meta) {
  if (shape_size(shape) != values.size()) throw DimensionMismatch("write_array: shape does not match data");
  const bool real = std::all_of(values.begin(), values.end(), [](const cplx& v) { return v.imag() == 0.0; });
  std::vector<std::uint64_t> buf;
  buf.reserve(values.size() * (real ? 1 : 2));
  for (const auto& v : values) {
    buf.push_back(to_little(v.real()));
    if (!real) buf.push_back(to_little(v.imag()));
  }
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());
  std::ofstream out(with_suffix(stem, ".bin"), std::ios::binary);
  if (!out) throw Error("cannot write " + with_suffix(stem, ".bin").string());
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(std::uint64_t)));
  json side = meta;
  side["shape"] = shape;
  side["dtype"] = real ? "float64" : "complex128";
  side["byte_order"] = "little";
  write_json(with_suffix(stem, ".json"), side);
}

CArray read_array(const fs::path& stem, json& meta) {
  std::ifstream side(with_suffix(stem, ".json"));
  if (!side) throw Error("missing sidecar " + with_suffix(stem, ".json").string());
  meta = json::parse(side);
  const auto shape = meta.at("shape").get<Shape>();
  const std::string dtype = meta.at("dtype").get<std::string>();
  if (dtype != "float64" && dtype != "complex128") throw Error("unknown dtype '" + dtype + "'");
  const bool real = dtype == "float64";
  const std::size_t count = shape_size(shape);
  std::vector<std::uint64_t> buf(count * (real ? 1 : 2));
  std::ifstream in(with_suffix(stem, ".bin"), std::ios::binary);
  if (!in) throw Error("missing array " + with_suffix(stem, ".bin").string());
  in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(std::uint64_t)));
  if (in.gcount() != static_cast<std::streamsize>(buf.size() * sizeof(std::uint64_t))) {
    throw Error("truncated array " + with_suffix(stem, ".bin").string());
  }
  CArray values(count);
  for (std::size_t i = 0; i < count; ++i) {
    values[i] = real ? cplx{from_little(buf[i])} : cplx{from_little(buf[2 * i]), from_little(buf[2 * i + 1])};
  }
  return values;
}

void write_phase_function(const fs::path& stem, const PhaseSpaceFunction& f) {
  const auto& k = f.constants;
  json meta{{"grid", grid_to_json(f.grid.q(), f.grid.hbar())},
            {"kind", to_string(f.kind)},
            {"field_tag", f.field_tag},
            {"time", f.time},
            {"constants", {{"hbar", k.hbar}, {"m", k.m}, {"e", k.e}, {"c", k.c}, {"lambda", k.lambda}}}};
  write_array(stem, f.values, f.grid.shape(), meta);
}

PhaseSpaceFunction read_phase_function(const fs::path& stem) {
  json meta;
  CArray values = read_array(stem, meta);
  PhaseSpaceFunction f;
  const auto& g = meta.at("grid");
  f.grid = PhaseGrid(grid_from_json(g), g.at("hbar").get<double>());
  if (f.grid.shape() != meta.at("shape").get<Shape>()) throw DimensionMismatch("sidecar grid and shape disagree");
  f.values = std::move(values);
  f.kind = kind_from_string(meta.at("kind").get<std::string>());
  f.field_tag = meta.at("field_tag").get<std::string>();
  f.time = meta.at("time").get<double>();
  const auto& c = meta.at("constants");
  f.constants = Constants{c.at("hbar").get<double>(), c.at("m").get<double>(), c.at("e").get<double>(),
                          c.at("c").get<double>(), c.at("lambda").get<double>()};
  return f;
}

void write_wavefunction(const fs::path& stem, const WaveFunction& psi) {
  json meta{{"grid", grid_to_json(psi.grid, psi.constants.hbar)}, {"kind", "psi"}, {"field_tag", psi.gauge_tag}};
  write_array(stem, psi.values, psi.grid.shape(), meta);
}

void write_csv_slice(const fs::path& file, const PhaseSpaceFunction& f, double q_fixed, double p_fixed) {
  const PhaseGrid& g = f.grid;
  const Shape shape = g.shape();
  const std::size_t dim = g.dim();
  std::vector<std::size_t> fixed(shape.size(), 0);
  if (dim == 2) {
    fixed[1] = nearest_node(g.q().axis(1), q_fixed);
    fixed[3] = nearest_node(g.p_axis(1), p_fixed);
  }
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw Error("cannot write " + file.string());
  out.precision(17);
  out << "q,p,re,im\n";
  const Axis& qa = g.q().axis(0);
  const Axis& pa = g.p_axis(0);
  for (std::size_t i = 0; i < qa.n; ++i) {
    for (std::size_t j = 0; j < pa.n; ++j) {
      auto idx = fixed;
      idx[0] = i;
      idx[dim] = j;
      std::size_t flat = 0;
      for (std::size_t a = 0; a < shape.size(); ++a) flat = flat * shape[a] + idx[a];
      out << qa.coord(i) << ',' << pa.coord(j) << ',' << f.values[flat].real() << ',' << f.values[flat].imag()
          << '\n';
    }
  }
}

} // namespace gipsp
