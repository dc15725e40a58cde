#pragma once

#include "hartree/diagnostics.hpp"
#include "hartree/functionals.hpp"
#include "hartree/hartree_operator.hpp"
#include "hartree/quadrature.hpp"
#include "hartree/radial_grid.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>

namespace hartree {

enum class GroundStateMethod { fixed_point, closed_form_candidate };

inline const char* to_string(GroundStateMethod m)
{
  return m == GroundStateMethod::fixed_point ? "fixed_point" : "closed_form_candidate";
}

struct GroundStateData {
  PhysicalField profile;
  double kinetic_W = 0.0;
  double potential_W = 0.0;
  double energy_W = 0.0;
  double sobolev_c4 = 0.0;
  double residual = 0.0;
  double half_kinetic_radius = 0.0;
  GroundStateMethod method = GroundStateMethod::fixed_point;
  int iterations = 0;

  Thresholds thresholds() const { return {kinetic_W, energy_W}; }
};

inline Thresholds thresholds(const GroundStateData& gs)
{
  return gs.thresholds();
}

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, GroundStateData partial)
      : Error(what), last_residual(partial.residual), partial(std::move(partial))
  {
  }
  double last_residual;
  GroundStateData partial;
};

struct ResidualReport {
  double value = 0.0;
  bool absolute = false;
};

namespace detail {

inline double physical_l2(const RadialGrid& g, const Eigen::VectorXd& f)
{
  return std::sqrt(std::max(0.0, integrate_radial(f.cwiseAbs2().eval(), g, Side::physical)));
}

struct RealState {
  Eigen::VectorXd w;     // physical samples
  Eigen::VectorXd wh;    // spectral coefficients
  Eigen::VectorXd V;     // Hartree potential of w
  double K = 0.0, P = 0.0;
};

inline RealState make_state(const RieszMultiplier& m, Eigen::VectorXd w, Eigen::VectorXd wh)
{
  const auto& g = *m.grid;
  RealState s;
  s.w = std::move(w);
  s.wh = std::move(wh);
  s.V = potential_of_density(m, s.w.cwiseAbs2());
  Eigen::VectorXd kin(g.size());
  for (int k = 0; k < g.size(); ++k)
    kin[k] = g.rho_nodes()[k] * g.rho_nodes()[k] * s.wh[k] * s.wh[k];
  s.K = integrate_radial(kin, g, Side::spectral);
  s.P = integrate_radial(s.V.cwiseProduct(s.w.cwiseAbs2()).eval(), g, Side::physical);
  return s;
}

// Amplitude renormalization enforcing K = P; V scales with the square.
inline void balance(RealState& s)
{
  const double a2 = s.K / s.P;
  const double a = std::sqrt(a2);
  s.w *= a;
  s.wh *= a;
  s.V *= a2;
  s.K *= a2;
  s.P *= a2 * a2;
}

inline RealState state_from_physical(const RieszMultiplier& m, const Eigen::VectorXd& w)
{
  auto s = make_state(m, w, forward_real(*m.grid, w));
  balance(s);
  return s;
}

inline double residual_of(const RieszMultiplier& m, const RealState& s)
{
  const auto& g = *m.grid;
  Eigen::VectorXd lh(g.size());
  for (int k = 0; k < g.size(); ++k)
    lh[k] = -g.rho_nodes()[k] * g.rho_nodes()[k] * s.wh[k];
  const Eigen::VectorXd lap = inverse_real(g, lh);
  const double den = physical_l2(g, lap);
  const double num = physical_l2(g, lap + s.V.cwiseProduct(s.w));
  return den > 0.0 ? num / den : num;
}

// w <- (-Delta)^{-1}[V[w] w], then K = P.
inline RealState green_step(const RieszMultiplier& m, const RealState& s)
{
  const auto& g = *m.grid;
  Eigen::VectorXd rh = forward_real(g, s.V.cwiseProduct(s.w));
  for (int k = 0; k < g.size(); ++k)
    rh[k] /= g.rho_nodes()[k] * g.rho_nodes()[k];
  Eigen::VectorXd w = inverse_real(g, rh);
  auto next = make_state(m, std::move(w), std::move(rh));
  balance(next);
  return next;
}

inline void check_positive(const Eigen::VectorXd& w)
{
  const double top = w.maxCoeff();
  if (!(top > 0.0) || w.minCoeff() < -1e-8 * top || !w.allFinite())
    throw NumericalAbort("ground-state iterate lost positivity (grid too coarse?)");
}

// Critical rescaling by local interpolation; cheap, used inside the gauge search.
inline Eigen::VectorXd rescale_local(const RadialGrid& g, const Eigen::VectorXd& w, double lambda)
{
  std::vector<double> vals(w.data(), w.data() + w.size());
  const LocalInterpolant f(g.r_nodes(), vals, g.r_max());
  Eigen::VectorXd out(g.size());
  const double amp = std::pow(lambda, 0.5 * (g.dimension() - 2));
  for (int k = 0; k < g.size(); ++k)
    out[k] = amp * f(lambda * g.r_nodes()[k]);
  return out;
}

inline double half_kinetic_radius(const GridPtr& g, const Eigen::VectorXd& w)
{
  return concentration_scale(PhysicalField(g, w.cast<cplx>()));
}

}  // namespace detail

inline ResidualReport elliptic_residual(const PhysicalField& w, const RieszMultiplier& m)
{
  require_same_grid(*w.grid(), *m.grid);
  const auto& g = *w.grid();
  const auto wh = transform_forward(w);
  Eigen::VectorXcd lh(g.size());
  for (int k = 0; k < g.size(); ++k)
    lh[k] = -g.rho_nodes()[k] * g.rho_nodes()[k] * wh[k];
  const auto lap = transform_inverse(SpectralField(w.grid(), lh));
  const Eigen::VectorXd V = potential_values(w, m);
  const PhysicalField res(w.grid(), (lap.values().array() + V.array() * w.values().array()).matrix());
  const double den = std::sqrt(l2_norm_squared(lap));
  const double num = std::sqrt(l2_norm_squared(res));
  if (den == 0.0)
    return {num, true};
  return {num / den, false};
}

struct SolverOptions {
  double tol = 1e-6;
  int max_iter = 500;
  bool gauge_search = true;
  int stall_window = 40;
};

inline PhysicalField gaussian_seed(const GridPtr& g)
{
  const double s = g->r_max() / 64.0;
  return PhysicalField::from_function(g, [s](double r) { return std::exp(-0.5 * r * r / (s * s)); });
}

namespace detail {

inline GroundStateData package(const RieszMultiplier& m, const RealState& s, double residual, int iterations,
                               GroundStateMethod method)
{
  GroundStateData gs;
  gs.profile = PhysicalField(m.grid, s.w.cast<cplx>());
  gs.kinetic_W = s.K;
  gs.potential_W = s.P;
  gs.energy_W = 0.5 * s.K - 0.25 * s.P;
  gs.sobolev_c4 = s.P / (s.K * s.K);
  gs.residual = residual;
  gs.method = method;
  gs.iterations = iterations;
  gs.half_kinetic_radius = half_kinetic_radius(m.grid, s.w);
  return gs;
}

}  // namespace detail

// Normalized Green iteration for Delta W + (|x|^{-4} * W^2) W = 0.
//
// On a truncated ball the critical problem has no exact solution: iterates
// drift slowly in scale, and the residual floor depends on the scale through
// two competing errors (boundary flux at large scales, spectral resolution at
// small ones). The spatial gauge is therefore chosen by a one-parameter search
// minimizing the residual reached after a few relaxation steps.
inline GroundStateData solve_fixed_point(const RieszMultiplier& m, const PhysicalField& seed,
                                         const SolverOptions& opt = {})
{
  require_same_grid(*seed.grid(), *m.grid);
  const auto& g = *m.grid;
  const GridPtr grid = m.grid;
  Eigen::VectorXd w0 = seed.values().real();
  if (seed.values().imag().cwiseAbs().maxCoeff() > 1e-12 * seed.values().cwiseAbs().maxCoeff())
    throw InvalidArgument("solve_fixed_point: seed must be real");
  detail::check_positive(w0);

  auto state = detail::state_from_physical(m, w0);
  double res = detail::residual_of(m, state);
  int iters = 0;
  if (res <= opt.tol)
    return detail::package(m, state, res, 0, GroundStateMethod::fixed_point);

  auto relax = [&](detail::RealState s, int steps, int& used) {
    double r = detail::residual_of(m, s);
    for (int i = 0; i < steps && r > opt.tol; ++i) {
      s = detail::green_step(m, s);
      detail::check_positive(s.w);
      r = detail::residual_of(m, s);
      ++used;
    }
    return std::pair{s, r};
  };

  // shape relaxation at the seed's own scale
  {
    auto [s, r] = relax(state, std::min(60, opt.max_iter), iters);
    state = s;
    res = r;
  }

  if (opt.gauge_search && res > opt.tol && iters < opt.max_iter) {
    const double current = detail::half_kinetic_radius(grid, state.w);
    const Eigen::VectorXd base = state.w;
    // probes that resolve nothing or lose positivity just score as infinitely bad
    auto probe = [&](double log_target, int& used) -> std::pair<detail::RealState, double> {
      const double lambda = current / std::exp(log_target);
      const Eigen::VectorXd w = detail::rescale_local(g, base, lambda);
      if (!(w.maxCoeff() > 0.0))
        return {state, std::numeric_limits<double>::infinity()};
      try {
        return relax(detail::state_from_physical(m, w), 10, used);
      } catch (const NumericalAbort&) {
        return {state, std::numeric_limits<double>::infinity()};
      }
    };
    double lo = std::log(g.r_max() / 1000.0), hi = std::log(g.r_max() / 20.0);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    int search_used = 0;
    auto p1 = probe(x1, search_used), p2 = probe(x2, search_used);
    for (int it = 0; it < 14; ++it) {
      if (p1.second < p2.second) {
        hi = x2;
        x2 = x1;
        p2 = p1;
        x1 = hi - gr * (hi - lo);
        p1 = probe(x1, search_used);
      } else {
        lo = x1;
        x1 = x2;
        p1 = p2;
        x2 = lo + gr * (hi - lo);
        p2 = probe(x2, search_used);
      }
    }
    const auto& best = p1.second < p2.second ? p1 : p2;
    if (best.second < res) {
      state = best.first;
      res = best.second;
    }
    iters += search_used / 4;
  }

  auto best_state = state;
  double best_res = res;
  int since_best = 0;
  while (res > opt.tol && iters < opt.max_iter && since_best < opt.stall_window) {
    state = detail::green_step(m, state);
    detail::check_positive(state.w);
    res = detail::residual_of(m, state);
    ++iters;
    if (res < best_res) {
      best_res = res;
      best_state = state;
      since_best = 0;
    } else {
      ++since_best;
    }
  }
  auto gs = detail::package(m, best_state, best_res, iters, GroundStateMethod::fixed_point);
  if (best_res > opt.tol)
    throw ConvergenceError("ground state did not converge: residual " + std::to_string(best_res) +
                               " after " + std::to_string(iters) + " iterations",
                           std::move(gs));
  return gs;
}

inline GroundStateData solve_fixed_point(const RieszMultiplier& m, const SolverOptions& opt = {})
{
  return solve_fixed_point(m, gaussian_seed(m.grid), opt);
}

// beta (1 + (r/scale)^2)^{-(d-2)/2} on the grid nodes.
inline PhysicalField closed_form_candidate(const GridPtr& grid, double beta, double scale = 1.0)
{
  if (!(beta > 0.0) || !(scale > 0.0))
    throw InvalidArgument("closed_form_candidate: beta and scale must be positive");
  const double e = -0.5 * (grid->dimension() - 2);
  return PhysicalField::from_function(grid, [=](double r) {
    const double x = r / scale;
    return beta * std::pow(1.0 + x * x, e);
  });
}

// Half-kinetic radius of (1 + r^2)^{-(d-2)/2} in R^d.
inline double candidate_half_kinetic_radius(int d)
{
  // |grad|^2 r^{d-1} is proportional to r^{d+1} (1 + r^2)^{-d}
  auto f = [d](double r) { return std::pow(r, d + 1) * std::pow(1.0 + r * r, -double(d)); };
  // r = t/(1-t) maps [0,1) onto [0, inf)
  auto g = [&](double t) {
    const double r = t / (1.0 - t);
    return f(r) / ((1.0 - t) * (1.0 - t));
  };
  auto cumulative = [&](double x) { return quad::integrate(g, 0.0, x / (1.0 + x), 0.0, 1e-13).value; };
  const double total = quad::integrate(g, 0.0, 1.0, 0.0, 1e-13).value;
  double a = 0.0, b = 100.0;
  for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
    const double mid = 0.5 * (a + b);
    if (cumulative(mid) < 0.5 * total)
      a = mid;
    else
      b = mid;
  }
  return 0.5 * (a + b);
}

struct CandidateReport {
  double beta = 0.0;
  double scale = 0.0;
  double residual = 0.0;
  bool passed = false;
  double threshold = 1e-4;
  // relative H^1-seminorm distance to the fixed-point W after gauge alignment
  double distance_to_W = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

// Radial derivative and Laplacian of (1 + (r/scale)^2)^{-(d-2)/2}, in closed form.
inline std::pair<double, double> candidate_derivatives(int d, double scale, double r)
{
  const double a = 0.5 * (d - 2);
  const double x = r / scale;
  const double q = 1.0 + x * x;
  const double c = -2.0 * a / (scale * scale);
  const double d1 = c * r * std::pow(q, -a - 1.0);
  const double lap = c * (d * std::pow(q, -a - 1.0) - 2.0 * (a + 1.0) * x * x * std::pow(q, -a - 2.0));
  return {d1, lap};
}

}  // namespace detail

// Tests the closed-form candidate at the scale of `reference` (same
// half-kinetic radius). Its derivatives are taken in closed form because the
// profile does not vanish at r_max and a spectral Laplacian would ring. beta
// minimizes the relative elliptic residual exactly: the residual is affine in
// beta^2.
inline CandidateReport candidate_test(const RieszMultiplier& m, const GroundStateData& reference,
                                      double threshold = 1e-4)
{
  const auto& g = *m.grid;
  const int d = g.dimension();
  CandidateReport rep;
  rep.threshold = threshold;
  rep.scale = reference.half_kinetic_radius / candidate_half_kinetic_radius(d);
  const Eigen::VectorXd w = closed_form_candidate(m.grid, 1.0, rep.scale).values().real();
  Eigen::VectorXd A(g.size()), D(g.size());
  for (int k = 0; k < g.size(); ++k)
    std::tie(D[k], A[k]) = detail::candidate_derivatives(d, rep.scale, g.r_nodes()[k]);
  const Eigen::VectorXd B = potential_of_density(m, w.cwiseAbs2()).cwiseProduct(w);
  const double ab = integrate_radial(A.cwiseProduct(B).eval(), g, Side::physical);
  const double bb = integrate_radial(B.cwiseAbs2().eval(), g, Side::physical);
  const double b2 = std::max(-ab / bb, 0.0);
  rep.beta = std::sqrt(b2);
  rep.residual = detail::physical_l2(g, A + b2 * B) / detail::physical_l2(g, A);
  rep.passed = rep.residual <= threshold;

  const Eigen::VectorXd dW = radial_derivative(reference.profile).real();
  const Eigen::VectorXd diff = rep.beta * D - dW;
  rep.distance_to_W = detail::physical_l2(g, diff) / detail::physical_l2(g, dW);
  return rep;
}

// Relative H^1-seminorm distance between a and b after rescaling b to the
// half-kinetic radius of a. Derivatives of b are evaluated at the rescaled
// radii directly, so a profile that no longer vanishes at r_max after
// rescaling does not pollute the comparison.
inline double aligned_distance(const GroundStateData& a, const GroundStateData& b)
{
  require_same_grid(*a.profile.grid(), *b.profile.grid());
  const auto& g = *a.profile.grid();
  const double lambda = b.half_kinetic_radius / a.half_kinetic_radius;
  std::vector<double> radii(g.size());
  for (int k = 0; k < g.size(); ++k)
    radii[k] = lambda * g.r_nodes()[k];
  const double amp = std::pow(lambda, 0.5 * g.dimension());
  const Eigen::VectorXd db = amp * evaluate_derivative_at(transform_forward(b.profile), radii).real();
  const Eigen::VectorXd da = radial_derivative(a.profile).real();
  return detail::physical_l2(g, db - da) / detail::physical_l2(g, da);
}

// a * W transplanted onto `target` with half-kinetic radius `radius`. The
// profile is evaluated spectrally at rescaled radii and tapered smoothly to
// zero between 0.5 and 0.9 r_max of the target grid.
inline PhysicalField sample_ground_state(const GroundStateData& gs, const GridPtr& target, double amplitude,
                                         double radius)
{
  if (!(radius > 0.0))
    throw InvalidArgument("sample_ground_state: radius must be positive");
  const double lambda = gs.half_kinetic_radius / radius;
  auto u = critical_rescale(gs.profile, lambda, target);
  const double R = target->r_max();
  for (int k = 0; k < target->size(); ++k) {
    const double x = (target->r_nodes()[k] - 0.5 * R) / (0.4 * R);
    const double chi = 1.0 - detail::smoothstep9(x)[0];
    u.values()[k] *= amplitude * chi;
  }
  return u;
}

}  // namespace hartree
