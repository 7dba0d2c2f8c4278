#ifndef COMBQFI_COLLISION_HPP
#define COMBQFI_COLLISION_HPP

#include "combqfi/comb.hpp"

namespace combqfi {

/// System-environment coupling applied in each step, always composed with the
/// free phase evolution exp(-i omega t |1><1|) on the system.
enum class Interaction { partial_swap, env_cnot, sys_cnot, bitflip };

/// Memory model and control access:
///  - nm_*: one environment survives across all N steps;
///  - m_*: the environment is traced out and reset after every step;
///  - *_control: the N steps are exposed as an N-tooth comb;
///  - *_free: the steps are concatenated into a single effective channel.
enum class Scenario { nm_control, nm_free, m_control, m_free };

struct CollisionParams {
  Interaction interaction = Interaction::partial_swap;
  Scenario scenario = Scenario::nm_control;
  int N = 1;
  double t_tot = 1.0;
  double g = 1.0;
  // per-step evolution and interaction times are t = tau = t_tot / N
};

/// Single-step unitary on environment (x) system, basis |e s> with the
/// environment qubit first.
Mat step_unitary(Interaction kind, double omega, double t, double tau, double g);

/// d/d omega of the single-step unitary.
Mat step_unitary_derivative(Interaction kind, double omega, double t, double tau,
                            double g);

/// Comb family parametrized by the system frequency omega.
CombFamily build_comb_family(const CollisionParams& p);

const char* to_string(Interaction i);
const char* to_string(Scenario s);
bool interaction_from_string(const std::string& s, Interaction& out);
bool scenario_from_string(const std::string& s, Scenario& out);

}  // namespace combqfi

#endif
