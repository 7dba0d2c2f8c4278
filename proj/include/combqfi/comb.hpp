#ifndef COMBQFI_COMB_HPP
#define COMBQFI_COMB_HPP

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "combqfi/tensor.hpp"

namespace combqfi {

/// Ordered (input, output) port pairs of a causal process. Canonical labels
/// are "1".."2N" with odd = input, even = output.
struct ToothStructure {
  std::vector<std::pair<SpaceLabel, SpaceLabel>> teeth;

  static ToothStructure qubits(int N);
  int N() const { return static_cast<int>(teeth.size()); }
  std::vector<SpaceLabel> all_spaces() const;       // in1 out1 in2 out2 ...
  std::vector<SpaceLabel> spaces_up_to(int count) const;  // first `count` ports
};

struct Comb {
  LabeledOperator op;
  ToothStructure structure;
};

/// Unnormalized vectors with sum of dyads equal to the comb operator, plus
/// (optionally) their derivatives with respect to the parameter.
struct EnsembleDecomposition {
  std::vector<LabeledVector> vectors;
  std::vector<LabeledVector> derivatives;
  int rank = 0;

  int q() const { return static_cast<int>(vectors.size()); }
  bool has_derivatives() const { return !derivatives.empty(); }
};

/// Hermitian matrix parametrizing equivalent ensemble decompositions.
struct GaugeMatrix {
  Mat h;
};

struct PerformanceOperator {
  LabeledOperator op;
  GaugeMatrix gauge;
};

struct CombFamily {
  enum class Differentiability { analytic, finite_difference };

  ToothStructure structure;
  std::function<std::pair<Comb, EnsembleDecomposition>(double)> evaluate;
  Differentiability differentiability = Differentiability::analytic;
  std::pair<double, double> domain{0.0, 1.0};  // parameter range for rank sampling
};

struct ValidationReport {
  bool passed = false;
  bool psd_ok = false;
  double max_residual = 0.0;
  std::vector<std::string> messages;
};

ValidationReport validate_comb(const LabeledOperator& c, const ToothStructure& s,
                               double tol);

/// Composition of two Choi-type operators over their shared spaces.
LabeledOperator link_product(const LabeledOperator& e, const LabeledOperator& f);

/// Eigen-based decomposition of a PSD operator; derivatives left unset.
EnsembleDecomposition ensemble_decomposition(const Comb& c, double rank_tol = 1e-10);

/// Omega(h) = 4 sum_i (|v_i><v_i|)^{T over all spaces but the last output},
/// with v_i = dC_i - i sum_j h_ij C_j.
PerformanceOperator performance_operator(const EnsembleDecomposition& d,
                                         const GaugeMatrix& h,
                                         const ToothStructure& s);

/// Vectors v_i of the performance operator (before dyad sum / transpose).
std::vector<LabeledVector> gauged_derivatives(const EnsembleDecomposition& d,
                                              const GaugeMatrix& h);

double state_qfi(const LabeledOperator& rho, const LabeledOperator& drho);

/// 1/(nu J); returns +infinity when J == 0.
double cramer_rao_bound(double J, unsigned nu);
inline constexpr double kUnboundedVariance = std::numeric_limits<double>::infinity();

EnsembleDecomposition finite_difference_derivatives(const CombFamily& f, double theta,
                                                    double step);

/// Max ensemble rank over 3 sample points of the family domain; `consistent`
/// is false when the sampled ranks disagree (constant-rank assumption broken).
struct RankEstimate {
  int rank = 0;
  bool consistent = true;
};
RankEstimate estimate_rank(const CombFamily& f, double rank_tol = 1e-10);

void write_comb(std::ostream& os, const Comb& c);
Comb read_comb(std::istream& is);

}  // namespace combqfi

#endif
