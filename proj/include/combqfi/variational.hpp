#ifndef COMBQFI_VARIATIONAL_HPP
#define COMBQFI_VARIATIONAL_HPP

#include "combqfi/collision.hpp"

namespace combqfi {

/// Checkerboard circuit parameters: N+1 layers of 5 angles each.
struct AnsatzParams {
  RVec phi;

  int layers() const { return static_cast<int>(phi.size()) / 5; }
};

/// Computational-basis outcome probabilities on (system, ancilla) and their
/// derivative with respect to the estimated frequency.
struct OutcomeDistribution {
  RVec p;
  RVec dp;
};

/// One control layer on (system, ancilla), system qubit slowest. Gates are
/// applied left to right: R_X(phi0) on S, R_X(phi1) on aux, R_ZZ(phi2),
/// R_X(phi3) on S, R_X(phi4) on aux, with R_sigma(phi) = exp(-i phi sigma / 2).
/// The entangler sits between non-diagonal rotations so that both the prepared
/// state and the effective measurement basis can be entangled; with trailing
/// Z rotations instead, the measurement layer would collapse to a product
/// basis (diagonal gates commute with the computational measurement).
Mat layer_unitary(const Eigen::Ref<const RVec>& phi5);

/// Exact simulation of the probe circuit interleaved with the collision
/// dynamics: layer k then collision step k for k = 1..N, a final layer N+1,
/// then the environment is traced and (S, aux) measured. The environment
/// persists across steps for the nm-control scenario and is reset to its
/// initial state after every step for m-control; free scenarios admit no
/// control layers and are rejected.
OutcomeDistribution output_distribution(const CollisionParams& task, double omega,
                                        const AnsatzParams& params);

/// F = sum over outcomes with p > 1e-12 of dp^2 / p.
double classical_fisher(const OutcomeDistribution& d);

struct OptimizeConfig {
  int restarts = 20;
  int max_iters = 200;
  double fd_step = 1e-5;
  std::uint64_t seed = 1;
};

struct OptimizeResult {
  AnsatzParams best;
  double fisher = 0;
  std::vector<double> trace;  // accepted objective values of the best restart
  bool converged = false;
};

/// Gradient ascent (central finite differences, backtracking line search)
/// from `restarts` seeded random starts; deterministic for a fixed config.
OptimizeResult optimize_probe(const CollisionParams& task, double omega,
                              const OptimizeConfig& cfg = {});

}  // namespace combqfi

#endif
