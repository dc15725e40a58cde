#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hartree::quad {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre nodes and weights on [-1, 1].
inline Rule gauss_legendre(int n)
{
  if (n < 1)
    throw std::invalid_argument("gauss_legendre: n must be positive");
  Rule g{std::vector<double>(n), std::vector<double>(n)};
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16)
        break;
    }
    g.nodes[i] = -x;
    g.nodes[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.weights[i] = w;
    g.weights[n - 1 - i] = w;
  }
  return g;
}

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
  bool converged = true;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a, b, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gk15(F& f, double a, double b)
{
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    kron += kWgk[j] * s;
    if (j % 2 == 1)
      gauss += kWg[j / 2] * s;
  }
  return {a, b, kron * h, std::abs((kron - gauss) * h)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (7/15) quadrature on [a, b]. Bisects the
// segment with the largest error estimate until the summed estimate drops
// below max(abs_tol, rel_tol*|I|).
template <class F>
Result integrate(F&& f, double a, double b, double abs_tol, double rel_tol, int max_segments = 2000)
{
  Result r;
  if (a == b)
    return r;
  std::priority_queue<detail::Segment> heap;
  auto first = detail::gk15(f, a, b);
  r.evaluations = 15;
  heap.push(first);
  double value = first.value, error = first.error;
  int segments = 1;
  while (error > std::max(abs_tol, rel_tol * std::abs(value))) {
    if (segments >= max_segments) {
      r.converged = false;
      break;
    }
    const auto s = heap.top();
    heap.pop();
    const double mid = 0.5 * (s.a + s.b);
    if (!(mid > s.a && mid < s.b)) {
      r.converged = false;
      heap.push(s);
      break;
    }
    const auto left = detail::gk15(f, s.a, mid);
    const auto right = detail::gk15(f, mid, s.b);
    r.evaluations += 30;
    value += left.value + right.value - s.value;
    error += left.error + right.error - s.error;
    heap.push(left);
    heap.push(right);
    ++segments;
  }
  // resum to shed accumulated cancellation in the running totals
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  r.value = value;
  r.error = error;
  if (error > std::max(abs_tol, rel_tol * std::abs(value)))
    r.converged = false;
  return r;
}

// Integrates over consecutive breakpoints. A coarse pass estimates the total
// magnitude so that negligible pieces are not refined toward a relative
// tolerance of their own.
template <class F>
Result integrate_pieces(F&& f, const std::vector<double>& breaks, double abs_tol, double rel_tol,
                        int max_segments = 2000)
{
  Result total;
  if (breaks.size() < 2)
    return total;
  const std::size_t pieces = breaks.size() - 1;
  double magnitude = 0.0;
  for (std::size_t i = 0; i < pieces; ++i)
    if (breaks[i + 1] > breaks[i])
      magnitude += std::abs(detail::gk15(f, breaks[i], breaks[i + 1]).value);
  total.evaluations = 15 * static_cast<int>(pieces);
  const double share = std::max(abs_tol, rel_tol * magnitude) / double(pieces);
  for (std::size_t i = 0; i < pieces; ++i) {
    if (breaks[i + 1] <= breaks[i])
      continue;
    const auto piece = integrate(f, breaks[i], breaks[i + 1], share, rel_tol, max_segments);
    total.value += piece.value;
    total.error += piece.error;
    total.evaluations += piece.evaluations;
    total.converged = total.converged && piece.converged;
  }
  return total;
}

}  // namespace hartree::quad
