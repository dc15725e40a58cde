#pragma once

#include "hartree/bessel.hpp"
#include "hartree/errors.hpp"
#include "hartree/quadrature.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace hartree {

using cplx = std::complex<double>;

enum class Side { physical, spectral };

// Surface area of the unit sphere S^{n} in R^{n+1}.
inline double sphere_area(int n)
{
  const double h = 0.5 * (n + 1);
  return 2.0 * std::pow(std::numbers::pi, h) / std::tgamma(h);
}

namespace detail {

// Weights for integrating f(x) x^{dim-1} over [0, x_end] from samples of an
// even function f at the positive nodes x. Each gap between consecutive
// nodes (and the end gaps) is integrated exactly against the local Lagrange
// interpolant through the `degree+1` nearest nodes, mirrored about 0.
inline std::vector<double> interpolatory_weights(const std::vector<double>& x, double x_end, int dim,
                                                 int degree)
{
  const int n = static_cast<int>(x.size());
  const int p = std::min(degree, n - 1);
  const int mirror = std::min(n, p + 1);
  std::vector<double> ext;
  std::vector<int> owner;
  for (int k = mirror - 1; k >= 0; --k) {
    ext.push_back(-x[k]);
    owner.push_back(k);
  }
  for (int k = 0; k < n; ++k) {
    ext.push_back(x[k]);
    owner.push_back(k);
  }
  const int m = static_cast<int>(ext.size());
  const auto gl = quad::gauss_legendre((p + dim) / 2 + 2);
  std::vector<double> w(n, 0.0);
  std::vector<double> ell(p + 1);
  for (int gap = 0; gap <= n; ++gap) {
    const double a = gap == 0 ? 0.0 : x[gap - 1];
    const double b = gap == n ? x_end : x[gap];
    const double c = 0.5 * (a + b);
    // near r_max the stencil shrinks to stay centred on the gap; one-sided
    // high-degree stencils there produce large alternating weights
    const int pg = gap == n ? 0 : std::min(p, 2 * (n - gap) - 1);
    const int pos = static_cast<int>(std::lower_bound(ext.begin(), ext.end(), c) - ext.begin());
    const int start = std::clamp(pos - (pg + 1) / 2, 0, m - (pg + 1));
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double t = c + 0.5 * (b - a) * gl.nodes[q];
      const double wq = 0.5 * (b - a) * gl.weights[q] * std::pow(t, dim - 1);
      for (int j = 0; j <= pg; ++j) {
        double l = 1.0;
        for (int i = 0; i <= pg; ++i)
          if (i != j)
            l *= (t - ext[start + i]) / (ext[start + j] - ext[start + i]);
        ell[j] = l;
      }
      for (int j = 0; j <= pg; ++j)
        w[owner[start + j]] += ell[j] * wq;
    }
  }
  return w;
}

inline std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h = 1469598103934665603ull)
{
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace detail

class RadialGrid {
 public:
  static constexpr int kQuadratureDegree = 16;

  RadialGrid(int dimension, int n_modes, double r_max)
  {
    if (dimension < 5)
      throw InvalidArgument("dimension below 5: " + std::to_string(dimension));
    if (n_modes < 16)
      throw InvalidArgument("n_modes below 16: " + std::to_string(n_modes));
    if (!(r_max > 0.0) || !std::isfinite(r_max))
      throw InvalidArgument("r_max must be positive and finite");
    d_ = dimension;
    n_ = n_modes;
    nu_ = 0.5 * d_ - 1.0;
    R_ = r_max;
    const auto z = special::bessel_zeros(nu_, n_ + 1);
    S_ = z[n_];
    rho_max_ = S_ / R_;
    zeros_.assign(z.begin(), z.begin() + n_);
    r_.resize(n_);
    rho_.resize(n_);
    a_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      r_[k] = zeros_[k] * R_ / S_;
      rho_[k] = zeros_[k] / R_;
      a_[k] = std::abs(special::bessel_j(nu_ + 1.0, zeros_[k]));
    }
    omega_ = sphere_area(d_ - 1);

    kernel_.resize(n_, n_);
    for (int m = 0; m < n_; ++m)
      for (int k = 0; k <= m; ++k) {
        const double v = 2.0 * special::bessel_j(nu_, zeros_[m] * zeros_[k] / S_) / (S_ * a_[m] * a_[k]);
        kernel_(m, k) = v;
        kernel_(k, m) = v;
      }

    fwd_in_.resize(n_);
    fwd_out_.resize(n_);
    inv_in_.resize(n_);
    inv_out_.resize(n_);
    fb_phys_.resize(n_);
    fb_spec_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      fwd_in_[k] = std::pow(r_[k], nu_) * R_ / a_[k];
      fwd_out_[k] = a_[k] / (rho_max_ * std::pow(rho_[k], nu_));
      inv_in_[k] = std::pow(rho_[k], nu_) * rho_max_ / a_[k];
      inv_out_[k] = a_[k] / (R_ * std::pow(r_[k], nu_));
      fb_phys_[k] = 2.0 * std::pow(r_[k], 2.0 * nu_) / (rho_max_ * rho_max_ * a_[k] * a_[k]);
      fb_spec_[k] = 2.0 * std::pow(rho_[k], 2.0 * nu_) / (R_ * R_ * a_[k] * a_[k]);
    }

    // Spectral weights are the Parseval weights of the Fourier-Bessel
    // expansion: sums of |u^|^2 and rho^2 |u^|^2 against them are the exact
    // mass and kinetic energy of the band-limited field.
    auto wp = detail::interpolatory_weights(r_, R_, d_, kQuadratureDegree);
    phys_w_.resize(n_);
    spec_w_.resize(n_);
    for (int k = 0; k < n_; ++k) {
      phys_w_[k] = omega_ * wp[k];
      spec_w_[k] = omega_ * fb_spec_[k];
    }

    std::uint64_t h = detail::fnv1a(&d_, sizeof d_);
    h = detail::fnv1a(&n_, sizeof n_, h);
    h = detail::fnv1a(&R_, sizeof R_, h);
    h = detail::fnv1a(r_.data(), r_.size() * sizeof(double), h);
    h = detail::fnv1a(rho_.data(), rho_.size() * sizeof(double), h);
    h = detail::fnv1a(phys_w_.data(), phys_w_.size() * sizeof(double), h);
    h = detail::fnv1a(spec_w_.data(), spec_w_.size() * sizeof(double), h);
    checksum_ = h;
  }

  int dimension() const { return d_; }
  double order() const { return nu_; }
  int size() const { return n_; }
  double r_max() const { return R_; }
  double rho_max() const { return rho_max_; }
  double last_zero() const { return S_; }
  double sphere() const { return omega_; }
  std::uint64_t checksum() const { return checksum_; }

  const std::vector<double>& r_nodes() const { return r_; }
  const std::vector<double>& rho_nodes() const { return rho_; }
  const std::vector<double>& phys_weights() const { return phys_w_; }
  const std::vector<double>& spec_weights() const { return spec_w_; }
  const std::vector<double>& weights(Side s) const { return s == Side::physical ? phys_w_ : spec_w_; }
  // Discrete Fourier-Bessel norm weights (without the sphere factor).
  const std::vector<double>& fb_phys_weights() const { return fb_phys_; }
  const std::vector<double>& fb_spec_weights() const { return fb_spec_; }
  const std::vector<double>& bessel_zero_table() const { return zeros_; }

  const Eigen::MatrixXd& kernel() const { return kernel_; }
  const Eigen::VectorXd& forward_in() const { return fwd_in_; }
  const Eigen::VectorXd& forward_out() const { return fwd_out_; }
  const Eigen::VectorXd& inverse_in() const { return inv_in_; }
  const Eigen::VectorXd& inverse_out() const { return inv_out_; }

  // Mean node spacing near the origin.
  double spacing() const { return R_ * std::numbers::pi / S_; }

  // Maps spectral coefficients to the radial derivative at the physical nodes.
  const Eigen::MatrixXd& derivative_kernel() const
  {
    std::call_once(deriv_once_, [this] {
      deriv_.resize(n_, n_);
      for (int k = 0; k < n_; ++k)
        for (int m = 0; m < n_; ++m) {
          const double x = r_[k] * rho_[m];
          deriv_(k, m) = -fb_spec_[m] * rho_[m] * std::pow(x, -nu_) * special::bessel_j(nu_ + 1.0, x);
        }
    });
    return deriv_;
  }

  bool same_as(const RadialGrid& o) const { return this == &o || checksum_ == o.checksum_; }

 private:
  int d_ = 0, n_ = 0;
  double nu_ = 0, R_ = 0, S_ = 0, rho_max_ = 0, omega_ = 0;
  std::uint64_t checksum_ = 0;
  std::vector<double> zeros_, r_, rho_, a_, phys_w_, spec_w_, fb_phys_, fb_spec_;
  Eigen::MatrixXd kernel_;
  Eigen::VectorXd fwd_in_, fwd_out_, inv_in_, inv_out_;
  mutable std::once_flag deriv_once_;
  mutable Eigen::MatrixXd deriv_;
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(int dimension, int n_modes, double r_max)
{
  return std::make_shared<const RadialGrid>(dimension, n_modes, r_max);
}

struct PhysicalTag {};
struct SpectralTag {};

template <class Tag>
class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid) : grid_(std::move(grid)), v_(Eigen::VectorXcd::Zero(grid_->size())) {}
  Field(GridPtr grid, Eigen::VectorXcd values) : grid_(std::move(grid)), v_(std::move(values))
  {
    if (!grid_)
      throw InvalidArgument("field without grid");
    if (v_.size() != grid_->size())
      throw InvalidArgument("field length " + std::to_string(v_.size()) + " does not match grid size " +
                            std::to_string(grid_->size()));
  }

  template <class F>
  static Field from_function(GridPtr grid, F&& f)
  {
    const auto& x = std::is_same_v<Tag, PhysicalTag> ? grid->r_nodes() : grid->rho_nodes();
    Eigen::VectorXcd v(grid->size());
    for (int k = 0; k < grid->size(); ++k)
      v[k] = cplx(f(x[k]));
    return Field(grid, std::move(v));
  }

  const GridPtr& grid() const { return grid_; }
  const Eigen::VectorXcd& values() const { return v_; }
  Eigen::VectorXcd& values() { return v_; }
  int size() const { return static_cast<int>(v_.size()); }
  cplx operator[](int k) const { return v_[k]; }
  cplx& operator[](int k) { return v_[k]; }

  bool finite() const { return v_.allFinite(); }

  Field& operator*=(cplx s)
  {
    v_ *= s;
    return *this;
  }
  friend Field operator*(cplx s, Field f) { return f *= s; }
  friend Field operator*(Field f, cplx s) { return f *= s; }
  friend Field operator+(Field a, const Field& b)
  {
    check_same(a, b);
    a.v_ += b.v_;
    return a;
  }
  friend Field operator-(Field a, const Field& b)
  {
    check_same(a, b);
    a.v_ -= b.v_;
    return a;
  }

  static void check_same(const Field& a, const Field& b)
  {
    if (!a.grid_->same_as(*b.grid_))
      throw GridMismatch();
  }

 private:
  GridPtr grid_;
  Eigen::VectorXcd v_;
};

using PhysicalField = Field<PhysicalTag>;
using SpectralField = Field<SpectralTag>;

inline void require_same_grid(const RadialGrid& a, const RadialGrid& b)
{
  if (!a.same_as(b))
    throw GridMismatch();
}

namespace detail {

// Symmetric kernel times a complex vector, handled as a 2 x N real block.
inline Eigen::VectorXcd apply_kernel(const Eigen::MatrixXd& T, const Eigen::VectorXcd& x)
{
  const auto n = x.size();
  Eigen::Map<const Eigen::Matrix<double, 2, Eigen::Dynamic>> X(reinterpret_cast<const double*>(x.data()), 2, n);
  Eigen::VectorXcd y(n);
  Eigen::Map<Eigen::Matrix<double, 2, Eigen::Dynamic>> Y(reinterpret_cast<double*>(y.data()), 2, n);
  Y.noalias() = X * T;
  return y;
}

inline Eigen::VectorXd forward_real(const RadialGrid& g, const Eigen::VectorXd& u)
{
  return (g.kernel() * u.cwiseProduct(g.forward_in())).cwiseProduct(g.forward_out());
}

inline Eigen::VectorXd inverse_real(const RadialGrid& g, const Eigen::VectorXd& v)
{
  return (g.kernel() * v.cwiseProduct(g.inverse_in())).cwiseProduct(g.inverse_out());
}

}  // namespace detail

inline SpectralField transform_forward(const PhysicalField& u)
{
  const auto& g = *u.grid();
  Eigen::VectorXcd v = detail::apply_kernel(g.kernel(), u.values().cwiseProduct(g.forward_in()));
  return SpectralField(u.grid(), v.cwiseProduct(g.forward_out()));
}

inline PhysicalField transform_inverse(const SpectralField& v)
{
  const auto& g = *v.grid();
  Eigen::VectorXcd u = detail::apply_kernel(g.kernel(), v.values().cwiseProduct(g.inverse_in()));
  return PhysicalField(v.grid(), u.cwiseProduct(g.inverse_out()));
}

inline double integrate_radial(std::span<const double> f, const RadialGrid& g, Side side)
{
  const auto& w = g.weights(side);
  if (f.size() != w.size())
    throw InvalidArgument("integrate_radial: sample length does not match grid");
  double s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    s += w[k] * f[k];
  return s;
}

inline cplx integrate_radial(std::span<const cplx> f, const RadialGrid& g, Side side)
{
  const auto& w = g.weights(side);
  if (f.size() != w.size())
    throw InvalidArgument("integrate_radial: sample length does not match grid");
  cplx s = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k)
    s += w[k] * f[k];
  return s;
}

inline double integrate_radial(const Eigen::VectorXd& f, const RadialGrid& g, Side side)
{
  return integrate_radial(std::span<const double>(f.data(), static_cast<std::size_t>(f.size())), g, side);
}

inline double l2_norm_squared(const PhysicalField& u)
{
  return integrate_radial(u.values().cwiseAbs2().eval(), *u.grid(), Side::physical);
}

inline double l2_norm_squared(const SpectralField& v)
{
  return integrate_radial(v.values().cwiseAbs2().eval(), *v.grid(), Side::spectral);
}

// Radial derivative at the physical nodes, differentiated spectrally.
inline Eigen::VectorXcd radial_derivative(const PhysicalField& u)
{
  const auto uh = transform_forward(u);
  const auto& D = u.grid()->derivative_kernel();
  Eigen::VectorXcd out(u.size());
  Eigen::Map<const Eigen::Matrix<double, 2, Eigen::Dynamic>> X(reinterpret_cast<const double*>(uh.values().data()),
                                                              2, u.size());
  Eigen::Map<Eigen::Matrix<double, 2, Eigen::Dynamic>> Y(reinterpret_cast<double*>(out.data()), 2, u.size());
  Y.noalias() = X * D.transpose();
  return out;
}

// Evaluates the band-limited expansion of v at arbitrary radii r >= 0.
inline Eigen::VectorXcd evaluate_at(const SpectralField& v, std::span<const double> radii)
{
  const auto& g = *v.grid();
  const double nu = g.order();
  const double at_zero = 1.0 / (std::pow(2.0, nu) * std::tgamma(nu + 1.0));
  Eigen::VectorXcd c(g.size());
  for (int m = 0; m < g.size(); ++m)
    c[m] = g.fb_spec_weights()[m] * v[m];
  Eigen::VectorXcd out(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    if (r >= g.r_max()) {
      out[i] = 0.0;
      continue;
    }
    cplx s = 0.0;
    for (int m = 0; m < g.size(); ++m) {
      const double x = r * g.rho_nodes()[m];
      const double b = x < 1e-8 ? at_zero : special::bessel_j(nu, x) * std::pow(x, -nu);
      s += c[m] * b;
    }
    out[i] = s;
  }
  return out;
}

// Radial derivative of the band-limited expansion of v at arbitrary radii.
inline Eigen::VectorXcd evaluate_derivative_at(const SpectralField& v, std::span<const double> radii)
{
  const auto& g = *v.grid();
  const double nu = g.order();
  Eigen::VectorXcd c(g.size());
  for (int m = 0; m < g.size(); ++m)
    c[m] = -g.fb_spec_weights()[m] * g.rho_nodes()[m] * v[m];
  Eigen::VectorXcd out(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    if (r >= g.r_max() || r <= 0.0) {
      out[i] = 0.0;
      continue;
    }
    cplx s = 0.0;
    for (int m = 0; m < g.size(); ++m) {
      const double x = r * g.rho_nodes()[m];
      s += c[m] * special::bessel_j(nu + 1.0, x) * std::pow(x, -nu);
    }
    out[i] = s;
  }
  return out;
}

// Local Lagrange interpolation of an even radial profile given on increasing
// positive nodes, vanishing beyond `support`.
class LocalInterpolant {
 public:
  LocalInterpolant(std::vector<double> nodes, std::vector<double> values, double support, int degree = 10)
      : support_(support)
  {
    if (nodes.size() != values.size() || nodes.size() < 2)
      throw InvalidArgument("LocalInterpolant: bad sample table");
    const int n = static_cast<int>(nodes.size());
    p_ = std::min(degree, 2 * n - 1);
    const int mirror = std::min(n, p_ + 1);
    for (int k = mirror - 1; k >= 0; --k) {
      x_.push_back(-nodes[k]);
      y_.push_back(values[k]);
    }
    for (int k = 0; k < n; ++k) {
      x_.push_back(nodes[k]);
      y_.push_back(values[k]);
    }
    if (support > nodes.back()) {
      x_.push_back(support);
      y_.push_back(0.0);
    }
  }

  double operator()(double r) const
  {
    r = std::abs(r);
    if (r >= support_)
      return 0.0;
    const int m = static_cast<int>(x_.size());
    const int pos = static_cast<int>(std::lower_bound(x_.begin(), x_.end(), r) - x_.begin());
    const int start = std::clamp(pos - (p_ + 1) / 2, 0, m - (p_ + 1));
    double s = 0.0;
    for (int j = 0; j <= p_; ++j) {
      double l = 1.0;
      const double xj = x_[start + j];
      if (r == xj)
        return y_[start + j];
      for (int i = 0; i <= p_; ++i)
        if (i != j)
          l *= (r - x_[start + i]) / (xj - x_[start + i]);
      s += l * y_[start + j];
    }
    return s;
  }

  double support() const { return support_; }

 private:
  std::vector<double> x_, y_;
  double support_;
  int p_;
};

// Projection onto the grid's band-limited space: inverse(forward(u)).
inline PhysicalField project(const PhysicalField& u)
{
  return transform_inverse(transform_forward(u));
}

// u(r) -> lambda^{(d-2)/2} u(lambda r), evaluated spectrally on `target`
// (which may differ from the source grid).
inline PhysicalField critical_rescale(const PhysicalField& u, double lambda, GridPtr target = nullptr)
{
  if (!(lambda > 0.0))
    throw InvalidArgument("critical_rescale: lambda must be positive");
  if (!target)
    target = u.grid();
  const auto& tr = target->r_nodes();
  std::vector<double> radii(tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k)
    radii[k] = lambda * tr[k];
  Eigen::VectorXcd v = evaluate_at(transform_forward(u), radii);
  v *= std::pow(lambda, 0.5 * (target->dimension() - 2));
  return PhysicalField(target, std::move(v));
}

}  // namespace hartree
