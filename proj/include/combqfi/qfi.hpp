#ifndef COMBQFI_QFI_HPP
#define COMBQFI_QFI_HPP

#include "combqfi/comb.hpp"
#include "combqfi/sdp.hpp"

namespace combqfi {

struct QfiOptions {
  sdp::SolveOptions solver;
  /// Gauge-reduction rank. -1 derives it from the singular values of the
  /// ensemble matrix; pass the maximum sampled rank of the family when the
  /// rank at the evaluation point could be lower than elsewhere.
  int rank_override = -1;
  double rank_tol = 1e-10;
  /// Outer-loop controls for the entropy-based route.
  int max_outer_iters = 300;
  double grad_tol = 1e-8;
  /// Optional q x q Hermitian warm start for the entropy-route gauge search
  /// (empty = start at zero). The objective is convex, so the minimizer is
  /// unchanged; a good start only saves outer iterations.
  Mat initial_gauge;
};

struct QfiResult {
  double J = 0;
  Mat h_opt;                   // q x q Hermitian gauge at the optimum
  std::vector<Mat> S_blocks;   // scaled chain operators, k = 1..N-1
  double lambda = 0;           // bottom-scale variable; J = 4 lambda
  /// Saddle-point tester on ports 1..2N-1, recovered from the PSD multiplier
  /// of the joint dual (dual route only). Unlike a maximizer of tr[T W(h_opt)]
  /// -- which is generally non-unique -- this tester also keeps h_opt optimal,
  /// so the state QFI of the comb output under it attains J.
  Mat tester;
  double gap = 0;
  int iterations = 0;
  sdp::Status status = sdp::Status::numerical_failure;
};

/// Fisher information of a parametrized comb: single SDP jointly optimizing
/// the gauge (reduced to its effective coordinates) and the dual chain.
QfiResult comb_qfi_dual(const EnsembleDecomposition& d, const ToothStructure& s,
                        const QfiOptions& opts = {});

/// Same quantity via the entropy characterization: for each gauge the scaled
/// dual chain bounding the output-traced performance operator is found by an
/// SDP, and the gauge is minimized over in an outer quasi-Newton loop using
/// the exact gradient supplied by the SDP multiplier.
QfiResult comb_qfi_min_entropy(const EnsembleDecomposition& d, const ToothStructure& s,
                               const QfiOptions& opts = {});

/// Conditional min-entropy of W (on all 2N ports of `s`) relative to the comb
/// cone: -log2 of the least lambda with 1 (x) lambda S >= W for a normalized
/// chain S on ports 1..2N-2.
double conditional_min_entropy(const LabeledOperator& w, const ToothStructure& s,
                               const sdp::SolveOptions& opts = {});

struct ProbeResult {
  LabeledOperator probe;  // optimal input strategy on ports 1..2N-1
  double value = 0;       // attained tr[T W]; equals J at the optimal gauge
  sdp::Status status = sdp::Status::numerical_failure;
};

/// Maximize tr[T W] over input strategies T (normalized combs on the odd
/// ports); W is typically the output-traced performance operator at the
/// optimal gauge.
ProbeResult optimal_probe(const LabeledOperator& w, const ToothStructure& s,
                          const sdp::SolveOptions& opts = {});

/// Rank-factorize a probe strategy into a pure vector on its ports plus an
/// ancilla space labeled "anc".
LabeledVector purify_probe(const LabeledOperator& probe, double rank_tol = 1e-10);

/// Single-tooth specialization (channel estimation).
QfiResult channel_qfi(const EnsembleDecomposition& d, const QfiOptions& opts = {});

}  // namespace combqfi

#endif
