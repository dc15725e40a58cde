#pragma once

#include "hartree/diagnostics.hpp"
#include "hartree/functionals.hpp"
#include "hartree/hartree_operator.hpp"
#include "hartree/radial_grid.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hartree {

struct Sponge {
  double width = 0.1;     // fraction of r_max
  double strength = 1.0;  // damping rate per unit time at r_max
};

struct EvolutionConfig {
  double dt0 = 1e-3;
  double dt_min = 1e-10;
  double t_end = 1.0;
  double theta_cfl = 0.1;
  int snapshot_stride = 10;
  std::optional<Sponge> absorber;
  double conservation_tol = 1e-6;
  // cutoff radius for y_R and z_R; 0 selects r_max/4
  double cutoff_radius = 0.0;
  int max_checkpoints = 64;

  void validate() const
  {
    if (!(dt0 > 0.0))
      throw InvalidArgument("EvolutionConfig: dt0 must be positive");
    if (!(dt_min > 0.0) || dt_min > dt0)
      throw InvalidArgument("EvolutionConfig: need 0 < dt_min <= dt0");
    if (!(t_end > 0.0))
      throw InvalidArgument("EvolutionConfig: t_end must be positive");
    if (!(theta_cfl > 0.0 && theta_cfl < 1.0))
      throw InvalidArgument("EvolutionConfig: theta_cfl must lie in (0, 1)");
    if (snapshot_stride < 1)
      throw InvalidArgument("EvolutionConfig: snapshot_stride must be >= 1");
    if (absorber && (!(absorber->width > 0.0 && absorber->width < 1.0) || !(absorber->strength >= 0.0)))
      throw InvalidArgument("EvolutionConfig: sponge needs width in (0, 1) and strength >= 0");
    if (!(conservation_tol > 0.0))
      throw InvalidArgument("EvolutionConfig: conservation_tol must be positive");
    if (cutoff_radius < 0.0)
      throw InvalidArgument("EvolutionConfig: cutoff_radius must be >= 0");
    if (max_checkpoints < 2)
      throw InvalidArgument("EvolutionConfig: max_checkpoints must be >= 2");
  }
};

enum class Termination { t_end, blowup_event, dt_underflow, boundary_leak, numerical_abort };

inline const char* to_string(Termination t)
{
  switch (t) {
    case Termination::t_end: return "t_end";
    case Termination::blowup_event: return "blowup_event";
    case Termination::dt_underflow: return "dt_underflow";
    case Termination::boundary_leak: return "boundary_leak";
    case Termination::numerical_abort: return "numerical_abort";
  }
  return "unknown";
}

struct Checkpoint {
  double t = 0.0;
  PhysicalField u;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<EnergyBreakdown> breakdowns;
  std::vector<VirialSample> virials;
  std::vector<double> dt_history;
  std::vector<double> boundary_mass;
  Termination terminated_by = Termination::t_end;

  std::vector<Checkpoint> checkpoints;
  PhysicalField final_state;
  long steps = 0;
  double final_time = 0.0;
  // summed length of the last ten accepted steps
  double recent_step_span = 0.0;
  bool absorber_active = false;
  std::string abort_reason;

  std::size_t size() const { return times.size(); }
  double xnorm() const
  {
    std::vector<double> inc;
    inc.reserve(virials.size());
    for (const auto& v : virials)
      inc.push_back(v.xnorm_increment);
    return times.size() < 2 ? 0.0 : xnorm_accumulate(times, inc);
  }
};

struct SampleView {
  double t;
  double dt;
  const PhysicalField& u;
  const EnergyBreakdown& breakdown;
  const VirialSample& virial;
  double boundary_mass;
};

struct EvolutionHooks {
  // returning true stops the run as a blow-up event
  std::function<bool(const SampleView&)> on_sample;
  std::function<void(const Checkpoint&)> on_checkpoint;
};

inline PhysicalField linear_step(const PhysicalField& u, double dt)
{
  if (dt == 0.0)
    return u;
  auto uh = transform_forward(u);
  const auto& rho = u.grid()->rho_nodes();
  for (int k = 0; k < uh.size(); ++k)
    uh[k] *= std::polar(1.0, -rho[k] * rho[k] * dt);
  return transform_inverse(uh);
}

inline PhysicalField nonlinear_step(const PhysicalField& u, const Eigen::VectorXd& V, double dt)
{
  PhysicalField out = u;
  for (int k = 0; k < u.size(); ++k)
    out[k] *= std::polar(1.0, dt * V[k]);
  return out;
}

inline PhysicalField nonlinear_step(const PhysicalField& u, const RieszMultiplier& m, double dt)
{
  if (dt == 0.0)
    return u;
  return nonlinear_step(u, potential_values(u, m), dt);
}

inline PhysicalField strang_step(const PhysicalField& u, const RieszMultiplier& m, double dt)
{
  return linear_step(nonlinear_step(linear_step(u, 0.5 * dt), m, dt), 0.5 * dt);
}

inline double boundary_mass(const PhysicalField& u, double fraction = 0.9)
{
  const auto& g = *u.grid();
  Eigen::VectorXd f(u.size());
  const double r0 = fraction * g.r_max();
  for (int k = 0; k < u.size(); ++k)
    f[k] = g.r_nodes()[k] > r0 ? std::norm(u[k]) : 0.0;
  return integrate_radial(f, g, Side::physical);
}

namespace detail {

// Per-unit-time damping profile: 0 inside, smooth ramp to 1 at r_max.
inline Eigen::VectorXd sponge_ramp(const RadialGrid& g, const Sponge& s)
{
  Eigen::VectorXd ramp(g.size());
  const double start = (1.0 - s.width) * g.r_max();
  for (int k = 0; k < g.size(); ++k)
    ramp[k] = smoothstep9((g.r_nodes()[k] - start) / (s.width * g.r_max()))[0];
  return ramp;
}

}  // namespace detail

// Strang-split integration with dt = min(dt0, theta_cfl / max|V|). The field
// is projected onto the grid's band-limited space before the first step.
inline TrajectoryRecord evolve(const PhysicalField& u0, const RieszMultiplier& m, const EvolutionConfig& cfg,
                               const EvolutionHooks& hooks = {})
{
  cfg.validate();
  require_same_grid(*u0.grid(), *m.grid);
  const auto& grid = m.grid;
  const auto& g = *grid;
  const double Rc = cfg.cutoff_radius > 0.0 ? cfg.cutoff_radius : 0.25 * g.r_max();
  const auto plateau = cutoff_profiles(grid, Rc, CutoffKind::plateau);
  const auto quadratic = cutoff_profiles(grid, Rc, CutoffKind::quadratic);
  Eigen::VectorXd ramp;
  if (cfg.absorber)
    ramp = detail::sponge_ramp(g, *cfg.absorber);

  TrajectoryRecord rec;
  rec.absorber_active = cfg.absorber.has_value();
  PhysicalField u = project(u0);
  if (!u.finite())
    throw NumericalAbort("evolve: initial data is not finite");
  Eigen::VectorXd V = potential_values(u, m);
  double t = 0.0;
  double dt_last = 0.0;
  const double initial_mass = mass(u);
  const double checkpoint_every = cfg.t_end / (cfg.max_checkpoints - 1);
  double next_checkpoint = 0.0;
  std::vector<double> recent;

  auto take_checkpoint = [&] {
    Checkpoint c{t, u};
    if (hooks.on_checkpoint)
      hooks.on_checkpoint(c);
    rec.checkpoints.push_back(std::move(c));
  };

  auto sample = [&]() -> bool {
    const auto uh = transform_forward(u);
    const double P = integrate_radial(V.cwiseProduct(u.values().cwiseAbs2()).eval(), g, Side::physical);
    const auto b = EnergyBreakdown::from_parts(mass(uh), kinetic(uh), P);
    Eigen::VectorXcd du(u.size());
    {
      const auto& D = g.derivative_kernel();
      Eigen::Map<const Eigen::Matrix<double, 2, Eigen::Dynamic>> X(
          reinterpret_cast<const double*>(uh.values().data()), 2, u.size());
      Eigen::Map<Eigen::Matrix<double, 2, Eigen::Dynamic>> Y(reinterpret_cast<double*>(du.data()), 2, u.size());
      Y.noalias() = X * D.transpose();
    }
    const auto vs = sample_virial(t, u, du, b, plateau, quadratic);
    const double bm = boundary_mass(u);
    rec.times.push_back(t);
    rec.breakdowns.push_back(b);
    rec.virials.push_back(vs);
    rec.dt_history.push_back(dt_last);
    rec.boundary_mass.push_back(bm);
    if (hooks.on_sample)
      return hooks.on_sample(SampleView{t, dt_last, u, b, vs, bm});
    return false;
  };

  auto finish = [&](Termination why) {
    rec.terminated_by = why;
    rec.final_state = u;
    rec.final_time = t;
    rec.recent_step_span = 0.0;
    for (double s : recent)
      rec.recent_step_span += s;
    if (rec.checkpoints.empty() || rec.checkpoints.back().t < t)
      take_checkpoint();
    return rec;
  };

  bool stop = sample();
  take_checkpoint();
  next_checkpoint += checkpoint_every;
  if (stop)
    return finish(Termination::blowup_event);

  long since_sample = 0;
  const double t_stop = cfg.t_end * (1.0 - 1e-14);
  while (t < t_stop) {
    const double vmax = V.cwiseAbs().maxCoeff();
    const double dt_cfl = vmax > 0.0 ? cfg.theta_cfl / vmax : cfg.dt0;
    if (dt_cfl < cfg.dt_min) {
      if (since_sample > 0)
        sample();
      return finish(Termination::dt_underflow);
    }
    double dt = std::min(cfg.dt0, dt_cfl);
    if (cfg.t_end - t < dt * (1.0 + 1e-6))
      dt = cfg.t_end - t;

    PhysicalField half = linear_step(u, 0.5 * dt);
    half = nonlinear_step(half, potential_values(half, m), dt);
    PhysicalField next = linear_step(half, 0.5 * dt);
    if (cfg.absorber) {
      const double rate = cfg.absorber->strength * dt;
      for (int k = 0; k < next.size(); ++k)
        next[k] *= std::exp(-rate * ramp[k]);
    }
    if (!next.finite()) {
      rec.abort_reason = "non-finite field after step " + std::to_string(rec.steps + 1) + " at t = " +
                         std::to_string(t + dt);
      if (since_sample > 0)
        sample();
      return finish(Termination::numerical_abort);
    }
    u = std::move(next);
    V = potential_values(u, m);
    if (!V.allFinite()) {
      rec.abort_reason = "non-finite potential at t = " + std::to_string(t + dt);
      return finish(Termination::numerical_abort);
    }
    t += dt;
    dt_last = dt;
    ++rec.steps;
    ++since_sample;
    recent.push_back(dt);
    if (recent.size() > 10)
      recent.erase(recent.begin());

    if (t >= next_checkpoint * (1.0 - 1e-12) && t < t_stop) {
      take_checkpoint();
      while (next_checkpoint <= t * (1.0 + 1e-12))
        next_checkpoint += checkpoint_every;
    }

    if (since_sample >= cfg.snapshot_stride || t >= t_stop) {
      since_sample = 0;
      if (sample())
        return finish(Termination::blowup_event);
    }
    if (!cfg.absorber && boundary_mass(u) > 0.01 * initial_mass) {
      if (since_sample > 0)
        sample();
      return finish(Termination::boundary_leak);
    }
  }
  return finish(Termination::t_end);
}

}  // namespace hartree
