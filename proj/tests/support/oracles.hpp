#pragma once

// Closed-form reference values used by the tests. Nothing here calls into the
// library's own transforms or potentials.

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/hypergeometric_1F1.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

inline double sphere_area(int d)
{
  return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d);
}

// Unitary Fourier transform of radial functions in R^d:
// exp(-r^2/2) -> exp(-rho^2/2) and r^2 exp(-r^2/2) -> (d - rho^2) exp(-rho^2/2).
inline double gaussian(double r) { return std::exp(-0.5 * r * r); }
inline double gaussian_hat(double rho) { return std::exp(-0.5 * rho * rho); }
inline double r2_gaussian(double r) { return r * r * std::exp(-0.5 * r * r); }
inline double r2_gaussian_hat(double rho, int d) { return (d - rho * rho) * std::exp(-0.5 * rho * rho); }

// Hankel-form Fourier transform by adaptive quadrature.
template <class F>
double hankel(F&& f, double rho, int d, double support)
{
  const double nu = 0.5 * d - 1.0;
  auto g = [&](double r) { return f(r) * boost::math::cyl_bessel_j(nu, rho * r) * std::pow(r, nu + 1.0); };
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(g, 0.0, support, 15, 1e-13);
  return v * std::pow(rho, -nu);
}

// Free evolution i u_t + Delta u = 0 from exp(-r^2/2).
inline cplx free_gaussian(double t, double r, int d)
{
  const cplx s(1.0, 2.0 * t);
  return std::pow(s, -0.5 * d) * std::exp(-0.5 * r * r / s);
}

// |x|^{-4} * exp(-|x|^2) in R^d.
inline double riesz_of_gaussian_density(double r, int d)
{
  return std::pow(pi, 0.5 * d) * std::tgamma(0.5 * d - 2.0) / std::tgamma(0.5 * d) *
         boost::math::hypergeometric_1F1(2.0, 0.5 * d, -r * r);
}

// Ground state in d = 5: the bubble beta (1 + (r/mu)^2)^{-3/2} with
// beta^2 mu^3 = 30 / pi^3. Its integrals follow from Beta functions.
struct Bubble5 {
  double mu = 1.0;
  double beta() const { return std::sqrt(30.0 / (pi * pi * pi) / (mu * mu * mu)); }
  double operator()(double r) const
  {
    const double s = r / mu;
    return beta() * std::pow(1.0 + s * s, -1.5);
  }
  double derivative(double r) const
  {
    const double s = r / mu;
    return -3.0 * beta() * s / mu * std::pow(1.0 + s * s, -2.5);
  }
  static constexpr double kinetic = 225.0 / 16.0;
  static constexpr double potential = 225.0 / 16.0;
  static constexpr double energy = 225.0 / 64.0;
  static constexpr double sobolev_c4 = 16.0 / 225.0;
};

}  // namespace oracle
