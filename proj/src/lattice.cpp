#include "gipsp/lattice.hpp"

#include <fftw3.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

namespace gipsp {

void Constants::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw Error(std::string("constant '") + name + "' must be positive and finite");
    }
  };
  positive(hbar, "hbar");
  positive(m, "m");
  positive(c, "c");
  positive(lambda, "lambda");
  if (!std::isfinite(e)) throw Error("constant 'e' must be finite");
}

double Axis::wavenumber(std::size_t k) const {
  const auto signed_k = k < n / 2 ? static_cast<double>(k) : static_cast<double>(k) - static_cast<double>(n);
  return 2.0 * kPi * signed_k / (static_cast<double>(n) * spacing);
}

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void check_axis(const Axis& a) {
  if (a.n < 8 || !is_power_of_two(a.n)) {
    throw Error("grid axis size must be a power of two >= 8, got " + std::to_string(a.n));
  }
  if (!(a.spacing > 0.0) || !std::isfinite(a.spacing)) throw Error("grid spacing must be positive");
  if (!std::isfinite(a.center)) throw Error("grid center must be finite");
}

} // namespace

QGrid::QGrid(std::vector<Axis> axes) : axes_(std::move(axes)) {
  if (axes_.empty() || axes_.size() > 3) throw Error("grid dimension must be 1, 2 or 3");
  for (const auto& a : axes_) check_axis(a);
}

QGrid QGrid::balanced(std::size_t dim, std::size_t n, double hbar, double center) {
  const double dq = std::sqrt(2.0 * kPi * hbar / static_cast<double>(n));
  return QGrid(std::vector<Axis>(dim, Axis{n, dq, center}));
}

Shape QGrid::shape() const {
  Shape s;
  for (const auto& a : axes_) s.push_back(a.n);
  return s;
}

std::size_t QGrid::size() const { return shape_size(shape()); }

double QGrid::cell_volume() const {
  double v = 1.0;
  for (const auto& a : axes_) v *= a.spacing;
  return v;
}

Vec3 QGrid::point(std::size_t flat) const {
  Vec3 x{0.0, 0.0, 0.0};
  for (std::size_t i = axes_.size(); i-- > 0;) {
    x[i] = axes_[i].coord(flat % axes_[i].n);
    flat /= axes_[i].n;
  }
  return x;
}

bool QGrid::operator==(const QGrid& other) const {
  if (axes_.size() != other.axes_.size()) return false;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].n != other.axes_[i].n || axes_[i].spacing != other.axes_[i].spacing ||
        axes_[i].center != other.axes_[i].center) {
      return false;
    }
  }
  return true;
}

PhaseGrid::PhaseGrid(QGrid qgrid, double hbar) : q_(std::move(qgrid)), hbar_(hbar) {
  if (!(hbar > 0.0)) throw Error("hbar must be positive");
  for (const auto& a : q_.axes()) {
    p_.push_back(Axis{a.n, 2.0 * kPi * hbar / (static_cast<double>(a.n) * a.spacing), 0.0});
  }
}

Shape PhaseGrid::shape() const {
  Shape s = q_.shape();
  for (const auto& a : p_) s.push_back(a.n);
  return s;
}

std::size_t PhaseGrid::size() const { return q_size() * p_size(); }

std::size_t PhaseGrid::p_size() const {
  std::size_t s = 1;
  for (const auto& a : p_) s *= a.n;
  return s;
}

double PhaseGrid::cell_volume() const {
  double v = q_.cell_volume();
  for (const auto& a : p_) v *= a.spacing;
  return v;
}

Vec3 PhaseGrid::momentum(std::size_t p_flat) const {
  Vec3 p{0.0, 0.0, 0.0};
  for (std::size_t i = p_.size(); i-- > 0;) {
    p[i] = p_[i].coord(p_flat % p_[i].n);
    p_flat /= p_[i].n;
  }
  return p;
}

bool PhaseGrid::operator==(const PhaseGrid& other) const {
  return hbar_ == other.hbar_ && q_ == other.q_;
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::size_t stride_of(const Shape& shape, std::size_t axis) {
  std::size_t s = 1;
  for (std::size_t i = axis + 1; i < shape.size(); ++i) s *= shape[i];
  return s;
}

namespace {

struct PlanKey {
  Shape shape;
  std::vector<std::size_t> axes;
  int sign;
  int alignment;
  bool operator<(const PlanKey& o) const {
    return std::tie(shape, axes, sign, alignment) < std::tie(o.shape, o.axes, o.sign, o.alignment);
  }
};

class PlanCache {
public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(const PlanKey& key, fftw_complex* data) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::vector<fftw_iodim64> dims;
    std::vector<fftw_iodim64> loops;
    for (std::size_t i = 0; i < key.shape.size(); ++i) {
      const auto stride = static_cast<std::ptrdiff_t>(stride_of(key.shape, i));
      fftw_iodim64 d{static_cast<std::ptrdiff_t>(key.shape[i]), stride, stride};
      if (std::find(key.axes.begin(), key.axes.end(), i) != key.axes.end()) {
        dims.push_back(d);
      } else {
        loops.push_back(d);
      }
    }
    fftw_plan plan = fftw_plan_guru64_dft(static_cast<int>(dims.size()), dims.data(),
                                          static_cast<int>(loops.size()), loops.data(), data, data,
                                          key.sign, FFTW_ESTIMATE);
    if (plan == nullptr) throw Error("FFTW failed to create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

private:
  std::mutex mutex_;
  std::map<PlanKey, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

} // namespace

void fft(std::span<cplx> data, const Shape& shape, std::span<const std::size_t> axes, int sign) {
  if (data.size() != shape_size(shape)) throw DimensionMismatch("fft: data size does not match shape");
  if (axes.empty() || data.empty()) return;
  for (auto a : axes) {
    if (a >= shape.size()) throw DimensionMismatch("fft: axis out of range");
  }
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  PlanKey key{shape, {axes.begin(), axes.end()}, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
              fftw_alignment_of(reinterpret_cast<double*>(ptr))};
  std::sort(key.axes.begin(), key.axes.end());
  fftw_plan plan = plan_cache().get(key, ptr);
  fftw_execute_dft(plan, ptr, ptr);
}

CArray dft_axis(std::span<const cplx> field, const Shape& shape, std::size_t axis, const Axis& q_axis,
                double hbar, Direction direction) {
  if (axis >= shape.size() || shape[axis] != q_axis.n || field.size() != shape_size(shape)) {
    throw DimensionMismatch("dft_axis: field does not match grid");
  }
  const std::size_t n = q_axis.n;
  const double dq = q_axis.spacing;
  const double dp = 2.0 * kPi * hbar / (static_cast<double>(n) * dq);
  const double half = static_cast<double>(n / 2);
  const double global_sign = (n / 2) % 2 == 0 ? 1.0 : -1.0;
  const std::size_t stride = stride_of(shape, axis);

  CArray out(field.begin(), field.end());
  // (-1)^j pre-modulation centers the input index.
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (((i / stride) % n) % 2 == 1) out[i] = -out[i];
  }
  const std::size_t axes[] = {axis};
  const bool forward = direction == Direction::Forward;
  fft(out, shape, axes, forward ? -1 : +1);

  const double weight = (forward ? dq : dp) / std::sqrt(2.0 * kPi * hbar);
  std::vector<cplx> phase(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double sign_k = k % 2 == 0 ? 1.0 : -1.0;
    if (forward) {
      // p_k = (k - n/2) dp; the grid center contributes exp(-i p_k q_c / hbar).
      const double pk = (static_cast<double>(k) - half) * dp;
      phase[k] = weight * global_sign * sign_k * std::polar(1.0, -pk * q_axis.center / hbar);
    } else {
      phase[k] = weight * global_sign * sign_k;
    }
  }
  if (!forward) {
    // Center phase must be applied on the input side of the inverse transform.
    CArray in(field.begin(), field.end());
    for (std::size_t i = 0; i < in.size(); ++i) {
      const std::size_t k = (i / stride) % n;
      const double pk = (static_cast<double>(k) - half) * dp;
      in[i] *= std::polar(1.0, pk * q_axis.center / hbar);
      if (k % 2 == 1) in[i] = -in[i];
    }
    fft(in, shape, axes, +1);
    for (std::size_t i = 0; i < in.size(); ++i) in[i] *= phase[(i / stride) % n];
    return in;
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= phase[(i / stride) % n];
  return out;
}

namespace {

template <class Multiplier>
void apply_multiplier(std::span<cplx> data, const Shape& shape, std::size_t axis, Multiplier&& mult) {
  const std::size_t axes[] = {axis};
  fft(data, shape, axes, -1);
  const std::size_t n = shape[axis];
  const std::size_t stride = stride_of(shape, axis);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < data.size(); ++i) data[i] *= mult(i, (i / stride) % n) * inv_n;
  fft(data, shape, axes, +1);
}

} // namespace

void spectral_derivative(std::span<cplx> data, const Shape& shape, std::size_t axis, double spacing) {
  const Axis a{shape.at(axis), spacing, 0.0};
  apply_multiplier(data, shape, axis, [&](std::size_t, std::size_t k) {
    return k == a.n / 2 ? cplx{0.0} : cplx{0.0, a.wavenumber(k)};
  });
}

void spectral_shift(std::span<cplx> data, const Shape& shape, std::size_t axis, double cells) {
  const std::size_t n = shape.at(axis);
  const Axis a{n, 1.0, 0.0};
  apply_multiplier(data, shape, axis, [&](std::size_t, std::size_t k) {
    if (k == n / 2) return cplx{std::cos(kPi * cells)};
    return std::polar(1.0, a.wavenumber(k) * cells);
  });
}

void spectral_shear(std::span<cplx> data, const Shape& shape, std::size_t axis, std::size_t shift_axis,
                    std::span<const double> cells) {
  const std::size_t n = shape.at(axis);
  const std::size_t shift_stride = stride_of(shape, shift_axis);
  const std::size_t shift_n = shape.at(shift_axis);
  if (cells.size() != shift_n) throw DimensionMismatch("spectral_shear: shift table size mismatch");
  const Axis a{n, 1.0, 0.0};
  apply_multiplier(data, shape, axis, [&](std::size_t flat, std::size_t k) {
    const double c = cells[(flat / shift_stride) % shift_n];
    if (k == n / 2) return cplx{std::cos(kPi * c)};
    return std::polar(1.0, a.wavenumber(k) * c);
  });
}

cplx integrate(std::span<const cplx> field, double cell_volume) {
  cplx s{0.0};
  for (const auto& v : field) s += v;
  return s * cell_volume;
}

double integrate(std::span<const double> field, double cell_volume) {
  double s = 0.0;
  for (double v : field) s += v;
  return s * cell_volume;
}

double boundary_mass_fraction(std::span<const cplx> field, const Shape& shape, double shell) {
  double total = 0.0;
  double outer = 0.0;
  for (std::size_t i = 0; i < field.size(); ++i) {
    const double w = std::abs(field[i]);
    total += w;
    bool edge = false;
    std::size_t rest = i;
    for (std::size_t a = shape.size(); a-- > 0;) {
      const std::size_t j = rest % shape[a];
      rest /= shape[a];
      const auto cut = static_cast<std::size_t>(std::ceil(shell * static_cast<double>(shape[a])));
      if (j < cut || j >= shape[a] - cut) edge = true;
    }
    if (edge) outer += w;
  }
  return total > 0.0 ? outer / total : 0.0;
}

double max_abs_diff(std::span<const cplx> a, std::span<const cplx> b) {
  if (a.size() != b.size()) throw DimensionMismatch("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(std::span<const cplx> a) {
  double m = 0.0;
  for (const auto& v : a) m = std::max(m, std::abs(v));
  return m;
}

double max_imag(std::span<const cplx> a) {
  double m = 0.0;
  for (const auto& v : a) m = std::max(m, std::abs(v.imag()));
  return m;
}

namespace {
std::atomic<std::size_t> g_threads{1};
}

void set_threads(std::size_t n) { g_threads = std::max<std::size_t>(1, n); }
std::size_t threads() { return g_threads; }

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min(threads(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

} // namespace gipsp
