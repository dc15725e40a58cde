#pragma once

#include "hartree/quadrature.hpp"
#include "hartree/radial_grid.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace hartree {

// Fourier symbol constant of |x|^{-4} under the unitary convention:
// (|x|^{-4} * f)^ = c(d) |xi|^{4-d} f^.
inline double riesz_constant(int d)
{
  return std::pow(std::numbers::pi, 0.5 * d) * std::pow(2.0, d - 4) * std::tgamma(0.5 * d - 2.0);
}

struct RieszMultiplier {
  GridPtr grid;
  Eigen::VectorXd symbol;
  double constant = 0.0;
  double calibration_error = std::numeric_limits<double>::quiet_NaN();
  bool calibrated = false;
};

inline RieszMultiplier riesz_multiplier(GridPtr grid, double constant)
{
  RieszMultiplier m;
  m.grid = std::move(grid);
  m.constant = constant;
  const int d = m.grid->dimension();
  m.symbol.resize(m.grid->size());
  for (int k = 0; k < m.grid->size(); ++k)
    m.symbol[k] = constant * std::pow(m.grid->rho_nodes()[k], 4.0 - d);
  return m;
}

inline RieszMultiplier riesz_multiplier(GridPtr grid)
{
  const int d = grid->dimension();
  return riesz_multiplier(std::move(grid), riesz_constant(d));
}

// V = |x|^{-4} * density for a real density sampled on the physical nodes.
// The pipeline stays in real arithmetic, so V carries no imaginary residue.
inline Eigen::VectorXd potential_of_density(const RieszMultiplier& m, const Eigen::VectorXd& density)
{
  const auto& g = *m.grid;
  Eigen::VectorXd spec = detail::forward_real(g, density).cwiseProduct(m.symbol);
  return detail::inverse_real(g, spec);
}

inline Eigen::VectorXd potential_values(const PhysicalField& u, const RieszMultiplier& m)
{
  require_same_grid(*u.grid(), *m.grid);
  return potential_of_density(m, u.values().cwiseAbs2());
}

inline PhysicalField hartree_potential(const PhysicalField& u, const RieszMultiplier& m)
{
  return PhysicalField(u.grid(), potential_values(u, m).cast<cplx>());
}

inline PhysicalField nonlinearity(const PhysicalField& u, const RieszMultiplier& m)
{
  Eigen::VectorXd V = potential_values(u, m);
  return PhysicalField(u.grid(), -(u.values().array() * V.array()).matrix());
}

// Integral of V[u] |w|^2 over R^d.
inline double hartree_pairing(const PhysicalField& u, const PhysicalField& w, const RieszMultiplier& m)
{
  require_same_grid(*u.grid(), *w.grid());
  Eigen::VectorXd V = potential_values(u, m);
  return integrate_radial(V.cwiseProduct(w.values().cwiseAbs2()).eval(), *u.grid(), Side::physical);
}

struct OracleResult {
  std::vector<double> values;
  std::vector<double> errors;
  int evaluations = 0;
  bool converged = true;
};

using RadialDensity = std::function<double(double)>;

namespace detail {

// Integral over theta in [0, pi] of sin^{d-2}(theta) (r^2+s^2-2rs cos(theta))^{-2}.
inline quad::Result angular_kernel(int d, double r, double s, double rel_tol)
{
  const double rs = r * s;
  const double q = (r - s) * (r - s);
  auto f = [&](double th) {
    const double sn = std::sin(th);
    const double h = std::sin(0.5 * th);
    const double den = q + 4.0 * rs * h * h;
    return std::pow(sn, d - 2) / (den * den);
  };
  std::vector<double> br{0.0};
  if (rs > 0.0) {
    const double eps = std::abs(r - s) / std::sqrt(rs);
    for (double c : {4.0 * eps, 40.0 * eps})
      if (c < 0.5 * std::numbers::pi && c > br.back())
        br.push_back(c);
  }
  br.push_back(std::numbers::pi);
  return quad::integrate_pieces(f, br, 0.0, rel_tol);
}

}  // namespace detail

// Direct angular/radial quadrature of |x|^{-4} * rho at the given radii.
// The radial integrand has a logarithmic singularity at s = r; on each side
// the substitution s = r -/+ |.| t^3 flattens it.
inline OracleResult oracle_potential(const RadialDensity& density, double support, int d,
                                     std::span<const double> radii, double rel_tol = 1e-11)
{
  OracleResult out;
  const double omega = sphere_area(d - 2);
  for (double r : radii) {
    bool inner_ok = true;
    auto integrand = [&](double s) {
      const double rho = density(s);
      if (rho == 0.0 || s == r)
        return 0.0;
      const auto a = detail::angular_kernel(d, r, s, 0.01 * rel_tol);
      inner_ok = inner_ok && a.converged;
      out.evaluations += a.evaluations;
      return rho * std::pow(s, d - 1) * a.value;
    };
    quad::Result res;
    if (r > 0.0 && r < support) {
      const double left = r, right = support - r;
      auto below = [&](double t) { return 3.0 * left * t * t * integrand(r - left * t * t * t); };
      auto above = [&](double t) { return 3.0 * right * t * t * integrand(r + right * t * t * t); };
      const auto a = quad::integrate(below, 0.0, 1.0, 0.0, rel_tol, 4000);
      const auto b = quad::integrate(above, 0.0, 1.0, 0.0, rel_tol, 4000);
      res.value = a.value + b.value;
      res.error = a.error + b.error;
      res.converged = a.converged && b.converged;
    } else {
      res = quad::integrate(integrand, 0.0, support, 0.0, rel_tol, 4000);
    }
    out.values.push_back(omega * res.value);
    out.errors.push_back(omega * res.error);
    out.converged = out.converged && res.converged && inner_ok;
  }
  return out;
}

inline LocalInterpolant density_interpolant(const PhysicalField& u)
{
  const auto& g = *u.grid();
  std::vector<double> rho(g.size());
  for (int k = 0; k < g.size(); ++k)
    rho[k] = std::norm(u[k]);
  return LocalInterpolant(g.r_nodes(), std::move(rho), g.r_max());
}

inline OracleResult oracle_potential(const PhysicalField& u, std::span<const double> radii, double rel_tol = 1e-11)
{
  const auto interp = density_interpolant(u);
  return oracle_potential([&](double s) { return interp(s); }, u.grid()->r_max(), u.grid()->dimension(), radii,
                          rel_tol);
}

// P = integral of V|u|^2 with V from the oracle, integrated adaptively in r.
inline quad::Result oracle_pairing(const RadialDensity& density, double support, int d, double rel_tol = 1e-9)
{
  const double omega = sphere_area(d - 1);
  bool ok = true;
  auto f = [&](double r) {
    const double rho = density(r);
    if (rho == 0.0)
      return 0.0;
    const double rr[1] = {r};
    const auto v = oracle_potential(density, support, d, rr, 0.1 * rel_tol);
    ok = ok && v.converged;
    return omega * std::pow(r, d - 1) * rho * v.values[0];
  };
  auto res = quad::integrate(f, 0.0, support, 0.0, rel_tol, 400);
  res.converged = res.converged && ok;
  return res;
}

struct Calibration {
  double constant = 0.0;
  double relative_error = 0.0;
  double probe_width = 0.0;
};

// Compares the spectral potential of a narrow Gaussian with the oracle at the
// innermost nodes. The width is R/40 so that the truncation of the far field
// at r_max stays well below the tolerance.
inline Calibration calibrate(RieszMultiplier& m, double tol = 1e-6)
{
  const auto& g = *m.grid;
  const double s = g.r_max() / 40.0;
  auto profile = [s](double r) { return std::exp(-0.5 * r * r / (s * s)); };
  const auto u = PhysicalField::from_function(m.grid, profile);
  const Eigen::VectorXd V = potential_values(u, m);
  const std::vector<double> radii{g.r_nodes()[0], g.r_nodes()[1], g.r_nodes()[2]};
  const auto o = oracle_potential([&](double r) { return profile(r) * profile(r); }, 12.0 * s, g.dimension(),
                                  radii, 1e-10);
  double ratio = 0.0, err = 0.0;
  for (int i = 0; i < 3; ++i) {
    ratio += o.values[i] / V[i] / 3.0;
    err = std::max(err, std::abs(V[i] / o.values[i] - 1.0));
  }
  Calibration c{m.constant * ratio, err, s};
  m.calibration_error = err;
  m.calibrated = err <= tol && o.converged;
  return c;
}

}  // namespace hartree
