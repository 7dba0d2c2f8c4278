#ifndef COMBQFI_SDP_HPP
#define COMBQFI_SDP_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "combqfi/tensor.hpp"

namespace combqfi::sdp {

// Linear SDP over real scalar variables x:
//   minimize  c.x
//   s.t.      E x = b            (sparse equality rows)
//             F0_b + sum_i x_i F_b,i  PSD   for every block b
// Complex Hermitian constraints enter through HermBlock, which realifies
// H = X + iY into [[X, -Y], [Y, X]].

struct SparseEntry {
  int row = 0, col = 0;
  double coeff = 0;
};

/// Symmetric low-rank coefficient contribution a b^T + b a^T.
struct DyadPair {
  RVec a, b;
};

struct VarCoeff {
  int var = -1;
  std::vector<SparseEntry> entries;  // both triangles listed explicitly
  std::vector<DyadPair> dyads;
};

struct Block {
  int dim = 0;
  RMat F0;
  std::vector<VarCoeff> coeffs;
};

struct EqTerm {
  int var = -1;
  double coeff = 0;
};

struct EqRow {
  std::vector<EqTerm> terms;
  double rhs = 0;
};

struct Problem {
  int nvars = 0;
  std::vector<double> objective;
  std::vector<EqRow> eqs;
  std::vector<Block> blocks;

  int add_var(double obj_coeff = 0.0) {
    objective.push_back(obj_coeff);
    return nvars++;
  }
  void dump(std::ostream& os) const;
};

/// Builder for a complex Hermitian PSD constraint F0 + sum x_i F_i >= 0.
/// add_entry(var, r, c, z) contributes z at (r,c) and conj(z) at (c,r);
/// diagonal entries must be real. add_dyad(var, a, b) contributes
/// a b^dag + b a^dag. realify() produces the doubled real symmetric block.
class HermBlock {
 public:
  explicit HermBlock(int cdim);

  int cdim() const { return cdim_; }
  Mat& F0() { return F0_; }
  void add_entry(int var, int r, int c, Complex z);
  void add_dyad(int var, const Vec& a, const Vec& b);
  Block realify() const;

  /// Map a realified dual block back to the complex Hermitian multiplier.
  static Mat complex_dual(const RMat& xreal);

 private:
  struct CEntry {
    int var, row, col;
    Complex z;
  };
  struct CDyad {
    int var;
    Vec a, b;
  };
  int cdim_;
  Mat F0_;
  std::vector<CEntry> entries_;
  std::vector<CDyad> dyads_;
};

enum class Status { optimal, infeasible, unbounded, numerical_failure };

std::string to_string(Status s);

struct Solution {
  Status status = Status::numerical_failure;
  RVec x;
  RVec eq_multipliers;
  std::vector<RMat> block_duals;  // PSD multiplier per block (realified)
  double objective = 0;
  double dual_objective = 0;
  double gap = 0;           // |primal - dual| at termination
  double max_residual = 0;  // worst equality / cone-slack residual
  int iterations = 0;
};

struct SolveOptions {
  double gap_tol = 1e-8;
  double feas_tol = 1e-8;
  int max_iters = 100;
  bool use_serial_schur = false;  // reference path, for tests/bench
};

Solution solve(const Problem& p, const SolveOptions& opts = {});

/// Schur matrix M_ij = sum_b tr(F_i W_b F_j W_b) for given symmetric W per
/// block. Exposed for the serial/OpenMP agreement tests and the benchmark.
RMat schur_matrix_serial(const Problem& p, const std::vector<RMat>& W);
RMat schur_matrix_omp(const Problem& p, const std::vector<RMat>& W);

}  // namespace combqfi::sdp

#endif
