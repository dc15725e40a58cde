#pragma once

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace hartree::special {

inline double bessel_j(double nu, double x)
{
  return boost::math::cyl_bessel_j(nu, x);
}

inline double bessel_j_prime(double nu, double x)
{
  return bessel_j(nu - 1.0, x) - nu / x * bessel_j(nu, x);
}

// McMahon expansion for the k-th zero; the first zero of a high order uses
// the large-order expansion instead.
inline double bessel_zero_guess(double nu, int k)
{
  if (k == 1 && nu >= 1.0) {
    const double c = std::cbrt(nu);
    return nu + 1.8557571 * c + 1.033150 / c - 0.00397 / nu;
  }
  const double mu = 4.0 * nu * nu;
  const double b = (k + 0.5 * nu - 0.25) * std::numbers::pi;
  const double e = 8.0 * b;
  return b - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e * e * e)
         - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * std::pow(e, 5));
}

namespace detail {

inline bool polish_zero(double nu, double& x)
{
  for (int it = 0; it < 50; ++it) {
    const double dx = bessel_j(nu, x) / bessel_j_prime(nu, x);
    x -= dx;
    if (!std::isfinite(x))
      return false;
    if (std::abs(dx) <= 1e-15 * x)
      return true;
  }
  return false;
}

inline double bracket_zero(double nu, double lo, double step)
{
  double flo = bessel_j(nu, lo);
  double hi = lo + step;
  double fhi = bessel_j(nu, hi);
  while (flo * fhi > 0.0) {
    lo = hi;
    flo = fhi;
    hi += step;
    fhi = bessel_j(nu, hi);
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = bessel_j(nu, mid);
    if (flo * fm <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
      flo = fm;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// First `count` positive zeros of J_nu, nu >= 1/2, strictly increasing.
inline std::vector<double> bessel_zeros(double nu, int count)
{
  if (nu < 0.5)
    throw std::invalid_argument("bessel_zeros: order below 1/2 is not supported");
  std::vector<double> z;
  z.reserve(count);
  double prev = nu;
  for (int k = 1; k <= count; ++k) {
    double x = bessel_zero_guess(nu, k);
    bool ok = detail::polish_zero(nu, x);
    // consecutive zeros of J_nu with nu >= 1/2 are at least pi apart
    const double floor = (k == 1) ? nu : prev + std::numbers::pi * (1.0 - 1e-12);
    if (!ok || x <= floor || (k > 1 && x > prev + 2.0 * std::numbers::pi)) {
      x = detail::bracket_zero(nu, k == 1 ? nu : prev + std::numbers::pi * (1.0 - 1e-9), 0.05);
      detail::polish_zero(nu, x);
    }
    z.push_back(x);
    prev = x;
  }
  return z;
}

}  // namespace hartree::special
