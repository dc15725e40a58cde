#pragma once

#include "hartree/hartree_operator.hpp"
#include "hartree/radial_grid.hpp"

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>

namespace hartree {

struct EnergyBreakdown {
  double mass = 0.0;
  double kinetic = 0.0;
  double potential = 0.0;
  double energy = 0.0;

  static EnergyBreakdown from_parts(double mass, double kinetic, double potential)
  {
    return {mass, kinetic, potential, 0.5 * kinetic - 0.25 * potential};
  }
};

inline double mass(const SpectralField& uh)
{
  return l2_norm_squared(uh);
}

inline double mass(const PhysicalField& u)
{
  return mass(transform_forward(u));
}

inline double kinetic(const SpectralField& uh)
{
  const auto& g = *uh.grid();
  Eigen::VectorXd f(g.size());
  for (int k = 0; k < g.size(); ++k)
    f[k] = g.rho_nodes()[k] * g.rho_nodes()[k] * std::norm(uh[k]);
  return integrate_radial(f, g, Side::spectral);
}

inline double kinetic(const PhysicalField& u)
{
  return kinetic(transform_forward(u));
}

inline double potential_energy(const PhysicalField& u, const RieszMultiplier& m)
{
  return hartree_pairing(u, u, m);
}

inline EnergyBreakdown energy_breakdown(const PhysicalField& u, const RieszMultiplier& m)
{
  return EnergyBreakdown::from_parts(mass(u), kinetic(u), potential_energy(u, m));
}

inline double weinstein_quotient(double kinetic, double potential)
{
  if (!(kinetic > 0.0))
    throw InvalidArgument("weinstein_quotient: zero field");
  return std::pow(potential, 0.25) / std::sqrt(kinetic);
}

inline double weinstein_quotient(const PhysicalField& u, const RieszMultiplier& m)
{
  const auto b = energy_breakdown(u, m);
  return weinstein_quotient(b.kinetic, b.potential);
}

struct Thresholds {
  double kinetic_W = 0.0;
  double energy_W = 0.0;
};

struct ThresholdReport {
  double delta0 = 0.0;
  double delta_bar = 0.0;
  double kinetic = 0.0;
  double energy = 0.0;
  double coercivity_lhs = 0.0;
  double coercivity_rhs = 0.0;
  double kinetic_cap = 0.0;
  bool applicable = false;
  bool satisfied = false;
};

// 1 - E/E_W clamped to (0, 1]; empty when E >= E_W.
inline std::optional<double> largest_delta0(double energy, double energy_W)
{
  const double d = 1.0 - energy / energy_W;
  if (!(d > 0.0))
    return std::nullopt;
  return std::min(d, 1.0);
}

inline ThresholdReport coercivity_check(const EnergyBreakdown& b, const Thresholds& t, double delta0)
{
  if (!(delta0 > 0.0 && delta0 <= 1.0))
    throw InvalidArgument("coercivity_check: delta0 must lie in (0, 1]");
  ThresholdReport r;
  r.delta0 = delta0;
  r.delta_bar = std::sqrt(delta0);
  r.kinetic = b.kinetic;
  r.energy = b.energy;
  r.coercivity_lhs = b.kinetic - b.potential;
  r.coercivity_rhs = 0.5 * r.delta_bar * b.kinetic;
  r.kinetic_cap = (1.0 - r.delta_bar) * t.kinetic_W;
  r.applicable = b.energy <= (1.0 - delta0) * t.energy_W && b.kinetic < t.kinetic_W;
  r.satisfied = r.applicable && r.coercivity_lhs >= r.coercivity_rhs && b.kinetic <= r.kinetic_cap;
  return r;
}

inline ThresholdReport coercivity_check(const PhysicalField& u, const RieszMultiplier& m, const Thresholds& t,
                                        double delta0)
{
  return coercivity_check(energy_breakdown(u, m), t, delta0);
}

struct ProofPolynomials {
  double f = 0.0;
  double g = 0.0;
};

inline ProofPolynomials proof_polynomials(double x, double c4)
{
  if (x < 0.0 || !(c4 > 0.0))
    throw InvalidArgument("proof_polynomials: need x >= 0 and c4 > 0");
  return {0.5 * x - 0.25 * c4 * x * x, x - c4 * x * x};
}

struct ComparabilityReport {
  bool passed = true;
  double delta_bar = 0.0;
  double worst_lower_margin = 0.0;
  double worst_upper_margin = 0.0;
  std::size_t worst_lower_index = 0;
  std::size_t worst_upper_index = 0;
};

// (2 + delta_bar)/8 K(t) <= E <= K(t)/2 at every sample.
inline ComparabilityReport comparability_check(std::span<const EnergyBreakdown> samples, double delta0)
{
  if (samples.empty())
    throw InvalidArgument("comparability_check: empty trajectory");
  if (!(delta0 > 0.0 && delta0 <= 1.0))
    throw InvalidArgument("comparability_check: delta0 must lie in (0, 1]");
  ComparabilityReport r;
  r.delta_bar = std::sqrt(delta0);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& b = samples[i];
    const double lower = b.energy - (2.0 + r.delta_bar) / 8.0 * b.kinetic;
    const double upper = 0.5 * b.kinetic - b.energy;
    if (i == 0 || lower < r.worst_lower_margin) {
      r.worst_lower_margin = lower;
      r.worst_lower_index = i;
    }
    if (i == 0 || upper < r.worst_upper_margin) {
      r.worst_upper_margin = upper;
      r.worst_upper_index = i;
    }
  }
  r.passed = r.worst_lower_margin >= 0.0 && r.worst_upper_margin >= 0.0;
  return r;
}

}  // namespace hartree
