#pragma once

#include "hartree/functionals.hpp"
#include "hartree/hartree_operator.hpp"
#include "hartree/quadrature.hpp"
#include "hartree/radial_grid.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace hartree {

enum class CutoffKind { plateau, quadratic };

// Value and first four derivatives of a radial function.
using Jet = std::array<double, 5>;

namespace detail {

// Degree-9 smoothstep with four vanishing derivatives at both ends.
inline Jet smoothstep9(double x)
{
  if (x <= 0.0)
    return {0, 0, 0, 0, 0};
  if (x >= 1.0)
    return {1, 0, 0, 0, 0};
  // S = 126x^5 - 420x^6 + 540x^7 - 315x^8 + 70x^9
  static constexpr std::array<double, 10> c = {0, 0, 0, 0, 0, 126, -420, 540, -315, 70};
  Jet out{};
  for (int k = 0; k < 5; ++k) {
    double s = 0.0;
    for (int n = 9; n >= k; --n) {
      double fall = 1.0;
      for (int j = 0; j < k; ++j)
        fall *= n - j;
      s = s * x + c[n] * fall;
    }
    out[k] = s;
  }
  return out;
}

}  // namespace detail

class CutoffShape {
 public:
  CutoffShape() = default;
  CutoffShape(CutoffKind kind, double R) : kind_(kind), R_(R) {}

  CutoffKind kind() const { return kind_; }
  double radius() const { return R_; }

  Jet jet(double r) const
  {
    const double x = r / R_;
    if (kind_ == CutoffKind::plateau) {
      if (x <= 1.0)
        return {1, 0, 0, 0, 0};
      if (x >= 2.0)
        return {0, 0, 0, 0, 0};
      const Jet s = detail::smoothstep9(x - 1.0);
      Jet out{};
      double scale = 1.0;
      for (int k = 0; k < 5; ++k) {
        out[k] = (k == 0 ? 1.0 - s[0] : -s[k]) * scale;
        scale /= R_;
      }
      return out;
    }
    if (x <= 1.0)
      return {r * r, 2.0 * r, 2.0, 0, 0};
    if (x >= 2.0)
      return {0, 0, 0, 0, 0};
    // R^2 psi(x) with psi = x^2 (1 - S(x-1)), product rule in x
    const Jet s = detail::smoothstep9(x - 1.0);
    const Jet q{1.0 - s[0], -s[1], -s[2], -s[3], -s[4]};
    const Jet p{x * x, 2.0 * x, 2.0, 0, 0};
    static constexpr int binom[5][5] = {{1}, {1, 1}, {1, 2, 1}, {1, 3, 3, 1}, {1, 4, 6, 4, 1}};
    Jet out{};
    double scale = R_ * R_;
    for (int k = 0; k < 5; ++k) {
      double v = 0.0;
      for (int j = 0; j <= k; ++j)
        v += binom[k][j] * p[j] * q[k - j];
      out[k] = v * scale;
      scale /= R_;
    }
    return out;
  }

  double laplacian(double r, int d) const
  {
    if (r <= R_)
      return kind_ == CutoffKind::quadratic ? 2.0 * d : 0.0;
    const Jet j = jet(r);
    return j[2] + (d - 1) * j[1] / r;
  }

  double bilaplacian(double r, int d) const
  {
    if (r <= R_ || r >= 2.0 * R_)
      return 0.0;
    const Jet j = jet(r);
    const double g1 = j[3] + (d - 1) * (j[2] / r - j[1] / (r * r));
    const double g2 = j[4] + (d - 1) * (j[3] / r - 2.0 * j[2] / (r * r) + 2.0 * j[1] / (r * r * r));
    return g2 + (d - 1) * g1 / r;
  }

 private:
  CutoffKind kind_ = CutoffKind::plateau;
  double R_ = 1.0;
};

struct CutoffTables {
  CutoffShape shape;
  Eigen::VectorXd phi, dphi, d2phi, laplacian, bilaplacian;
};

inline CutoffTables cutoff_profiles(const GridPtr& grid, double R, CutoffKind kind)
{
  if (!(R > 0.0 && R < 0.5 * grid->r_max()))
    throw InvalidArgument("cutoff radius must lie in (0, r_max/2)");
  CutoffTables t;
  t.shape = CutoffShape(kind, R);
  const int n = grid->size();
  const int d = grid->dimension();
  t.phi.resize(n);
  t.dphi.resize(n);
  t.d2phi.resize(n);
  t.laplacian.resize(n);
  t.bilaplacian.resize(n);
  for (int k = 0; k < n; ++k) {
    const double r = grid->r_nodes()[k];
    const Jet j = t.shape.jet(r);
    t.phi[k] = j[0];
    t.dphi[k] = j[1];
    t.d2phi[k] = j[2];
    t.laplacian[k] = t.shape.laplacian(r, d);
    t.bilaplacian[k] = t.shape.bilaplacian(r, d);
  }
  return t;
}

inline double weighted_mass(const PhysicalField& u, const CutoffTables& c)
{
  return integrate_radial(c.phi.cwiseProduct(u.values().cwiseAbs2()).eval(), *u.grid(), Side::physical);
}

inline double variance(const PhysicalField& u)
{
  const auto& g = *u.grid();
  Eigen::VectorXd f(g.size());
  for (int k = 0; k < g.size(); ++k)
    f[k] = g.r_nodes()[k] * g.r_nodes()[k] * std::norm(u[k]);
  return integrate_radial(f, g, Side::physical);
}

// 2 Im of the integral of conj(u) u_r phi', given the radial derivative.
inline double virial_first(const PhysicalField& u, const Eigen::VectorXcd& du, const CutoffTables& c)
{
  Eigen::VectorXd f(u.size());
  for (int k = 0; k < u.size(); ++k)
    f[k] = 2.0 * std::imag(std::conj(u[k]) * du[k]) * c.dphi[k];
  return integrate_radial(f, *u.grid(), Side::physical);
}

inline double virial_first(const PhysicalField& u, const CutoffTables& c)
{
  return virial_first(u, radial_derivative(u), c);
}

inline double global_virial_rate(const EnergyBreakdown& b)
{
  return 8.0 * (b.kinetic - b.potential);
}

inline double global_virial_rate_from_energy(const EnergyBreakdown& b)
{
  return 8.0 * (4.0 * b.energy - b.kinetic);
}

struct VirialSecond {
  double value = 0.0;
  double bilaplacian_term = 0.0;
  double hessian_term = 0.0;
  double kernel_term = 0.0;
  double kernel_error = 0.0;
  bool converged = true;
};

namespace detail {

// Integral over theta of sin^{d-2} [phi'(r)(r - s c) + phi'(s)(s - r c)] / |x-y|^6.
inline quad::Result virial_angular(int d, double r, double s, double dr, double ds, double rel_tol)
{
  const double rs = r * s;
  const double q = (r - s) * (r - s);
  auto f = [&](double th) {
    const double h = std::sin(0.5 * th);
    const double den = q + 4.0 * rs * h * h;
    // r - s cos = (r - s) + 2 s sin^2(th/2), likewise for s - r cos
    const double num = (r - s) * (dr - ds) + 2.0 * h * h * (dr * s + ds * r);
    return std::pow(std::sin(th), d - 2) * num / (den * den * den);
  };
  std::vector<double> br{0.0};
  if (rs > 0.0) {
    const double eps = std::abs(r - s) / std::sqrt(rs);
    for (double cpt : {4.0 * eps, 40.0 * eps})
      if (cpt < 0.5 * std::numbers::pi && cpt > br.back())
        br.push_back(cpt);
  }
  br.push_back(std::numbers::pi);
  return quad::integrate_pieces(f, br, 0.0, rel_tol);
}

}  // namespace detail

// Full right-hand side of the localized virial identity for radial u:
//   -int (Delta^2 phi)|u|^2 + 4 int phi''|u_r|^2
//   - 4 int int (grad phi(x) - grad phi(y)).(x-y) |x-y|^{-6} |u(x)|^2 |u(y)|^2.
// The double integral uses the shared adaptive quadrature on an interpolated
// density; intended for snapshot times only.
inline VirialSecond virial_second_direct(const PhysicalField& u, const CutoffTables& c, double rel_tol = 1e-7)
{
  const auto& g = *u.grid();
  const int d = g.dimension();
  VirialSecond out;
  // phi'' and Delta^2 phi are only finitely smooth at R_c and 2 R_c, which
  // spoils the node weights; use Gauss panels between the breaks instead.
  {
    const double Rc = c.shape.radius();
    const double top = std::min(2.0 * Rc, g.r_max());
    static const auto gl = quad::gauss_legendre(8);
    std::vector<double> rq, wq;
    for (auto [a, b] : {std::pair{0.0, std::min(Rc, top)}, std::pair{std::min(Rc, top), top}}) {
      const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / g.spacing())));
      const double h = (b - a) / panels;
      for (int p = 0; p < panels && b > a; ++p)
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
          rq.push_back(a + h * (p + 0.5 * (1.0 + gl.nodes[q])));
          wq.push_back(0.5 * h * gl.weights[q]);
        }
    }
    const auto uh = transform_forward(u);
    const Eigen::VectorXcd v = evaluate_at(uh, rq);
    const Eigen::VectorXcd dv = evaluate_derivative_at(uh, rq);
    double bil = 0.0, hess = 0.0;
    for (std::size_t i = 0; i < rq.size(); ++i) {
      const double r = rq[i];
      const double jac = wq[i] * std::pow(r, d - 1);
      bil += jac * c.shape.bilaplacian(r, d) * std::norm(v[i]);
      hess += jac * c.shape.jet(r)[2] * std::norm(dv[i]);
    }
    out.bilaplacian_term = -g.sphere() * bil;
    out.hessian_term = 4.0 * g.sphere() * hess;
  }

  const auto rho = density_interpolant(u);
  const double R = g.r_max();
  const auto& shape = c.shape;
  bool ok = true;
  double max_rho = 0.0;
  for (int k = 0; k < g.size(); ++k)
    max_rho = std::max(max_rho, std::norm(u[k]));
  if (max_rho == 0.0) {
    out.value = out.bilaplacian_term + out.hessian_term;
    return out;
  }
  auto inner = [&](double r) {
    const double rho_r = rho(r);
    if (rho_r == 0.0)
      return 0.0;
    const double dr = shape.jet(r)[1];
    auto h = [&](double t) {
      const double s = r * (1.0 - t * t * t);
      if (s <= 0.0 || s >= r)
        return 0.0;
      const double rho_s = rho(s);
      if (rho_s == 0.0)
        return 0.0;
      const double ds = shape.jet(s)[1];
      const auto a = detail::virial_angular(d, r, s, dr, ds, 1e-3 * rel_tol);
      ok = ok && a.converged;
      return 3.0 * r * t * t * std::pow(s, d - 1) * rho_s * a.value;
    };
    const auto res = quad::integrate(h, 0.0, 1.0, 0.0, 1e-2 * rel_tol, 2000);
    ok = ok && res.converged;
    return std::pow(r, d - 1) * rho_r * res.value;
  };
  std::vector<double> br{0.0};
  for (double b : {shape.radius(), 2.0 * shape.radius()})
    if (b < R)
      br.push_back(b);
  br.push_back(R);
  const auto outer = quad::integrate_pieces(inner, br, 0.0, rel_tol, 2000);
  const double pref = -8.0 * sphere_area(d - 1) * sphere_area(d - 2);
  out.kernel_term = pref * outer.value;
  out.kernel_error = std::abs(pref) * outer.error;
  out.converged = ok && outer.converged;
  out.value = out.bilaplacian_term + out.hessian_term + out.kernel_term;
  return out;
}

// Radius enclosing half of the kinetic energy, from the spectral gradient.
inline double concentration_scale(const PhysicalField& u, const Eigen::VectorXcd& du)
{
  const auto& g = *u.grid();
  const int n = g.size();
  const int d = g.dimension();
  std::vector<double> e(n);
  for (int k = 0; k < n; ++k)
    e[k] = std::norm(du[k]);
  const LocalInterpolant ei(g.r_nodes(), e, g.r_max());
  static const auto gl = quad::gauss_legendre(12);
  auto piece = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      const double t = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[q];
      s += gl.weights[q] * ei(t) * std::pow(t, d - 1);
    }
    return 0.5 * (b - a) * s;
  };
  std::vector<double> edges(n + 2);
  edges[0] = 0.0;
  for (int k = 0; k < n; ++k)
    edges[k + 1] = g.r_nodes()[k];
  edges[n + 1] = g.r_max();
  std::vector<double> cum(n + 2, 0.0);
  for (int k = 1; k < n + 2; ++k)
    cum[k] = cum[k - 1] + piece(edges[k - 1], edges[k]);
  const double half = 0.5 * cum[n + 1];
  if (!(half > 0.0))
    throw InvalidArgument("concentration_scale: zero field");
  int k = 1;
  while (k < n + 1 && cum[k] < half)
    ++k;
  double a = edges[k - 1], b = edges[k];
  const double base = cum[k - 1];
  for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
    const double mid = 0.5 * (a + b);
    if (base + piece(edges[k - 1], mid) < half)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

inline double concentration_scale(const PhysicalField& u)
{
  return concentration_scale(u, radial_derivative(u));
}

inline double xnorm_exponent(int d)
{
  return 6.0 * d / (3.0 * d - 8.0);
}

// ||u(t)||_{L^p}^6 with p = 6d/(3d-8): the integrand of the X-norm in time.
inline double xnorm_increment(const PhysicalField& u)
{
  const auto& g = *u.grid();
  const double p = xnorm_exponent(g.dimension());
  Eigen::VectorXd f(g.size());
  for (int k = 0; k < g.size(); ++k)
    f[k] = std::pow(std::abs(u[k]), p);
  const double lp = integrate_radial(f, g, Side::physical);
  return std::pow(std::max(lp, 0.0), 6.0 / p);
}

// Trapezoid rule in time over snapshot increments, then the sixth root.
inline double xnorm_accumulate(std::span<const double> times, std::span<const double> increments)
{
  if (times.size() != increments.size())
    throw InvalidArgument("xnorm_accumulate: length mismatch");
  if (times.size() < 2)
    throw InvalidArgument("xnorm_accumulate: need at least two snapshots");
  double s = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i)
    s += 0.5 * (times[i] - times[i - 1]) * (increments[i] + increments[i - 1]);
  return std::pow(s, 1.0 / 6.0);
}

struct VirialSample {
  double t = 0.0;
  double variance = 0.0;
  double y_R = 0.0;
  double yprime_R = 0.0;
  double z_R = 0.0;
  double zprime_R = 0.0;
  double virial_rate = 0.0;
  double z_second_direct = std::numeric_limits<double>::quiet_NaN();
  double lambda_conc = 0.0;
  double xnorm_increment = 0.0;
};

inline VirialSample sample_virial(double t, const PhysicalField& u, const Eigen::VectorXcd& du,
                                  const EnergyBreakdown& b, const CutoffTables& plateau,
                                  const CutoffTables& quadratic)
{
  VirialSample s;
  s.t = t;
  s.variance = variance(u);
  s.y_R = weighted_mass(u, plateau);
  s.yprime_R = virial_first(u, du, plateau);
  s.z_R = weighted_mass(u, quadratic);
  s.zprime_R = virial_first(u, du, quadratic);
  s.virial_rate = global_virial_rate(b);
  s.lambda_conc = b.kinetic > 0.0 ? concentration_scale(u, du) : 0.0;
  s.xnorm_increment = xnorm_increment(u);
  return s;
}

}  // namespace hartree
