#ifndef COMBQFI_TENSOR_HPP
#define COMBQFI_TENSOR_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace combqfi {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// Error in the structure of a request (bad labels, dimension mismatch, ...).
struct structural_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input data fails a numerical validity check (non-Hermitian, not a state, ...).
struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A labeled finite-dimensional Hilbert space factor.
struct SpaceLabel {
  std::string id;
  int dim = 2;

  bool operator==(const SpaceLabel& o) const { return id == o.id && dim == o.dim; }
  bool operator!=(const SpaceLabel& o) const { return !(*this == o); }
};

inline SpaceLabel qubit(const std::string& id) { return SpaceLabel{id, 2}; }

/// Numbered qubit spaces "1".."n" (teeth ports use odd = input, even = output).
std::vector<SpaceLabel> qubit_spaces(int n);

int total_dim(const std::vector<SpaceLabel>& spaces);

/// Operator on an ordered tensor product of labeled spaces.
/// Basis convention: the flat index is big-endian in the listed space order,
/// i.e. the first listed space varies slowest.
struct LabeledOperator {
  std::vector<SpaceLabel> spaces;
  Mat m;

  LabeledOperator() = default;
  LabeledOperator(std::vector<SpaceLabel> s, Mat mat);

  int dim() const { return static_cast<int>(m.rows()); }
  int find_space(const std::string& id) const;  // -1 if absent
  bool has_space(const std::string& id) const { return find_space(id) >= 0; }

  bool is_hermitian(double rel_tol = 1e-10) const;
  /// PSD check: Hermitian and min eigenvalue >= -abs_floor - rel_tol * lambda_max.
  bool is_psd(double rel_tol = 1e-9, double abs_floor = 1e-12) const;
  double trace_real() const { return m.trace().real(); }
};

/// Vector on an ordered tensor product of labeled spaces (same basis convention).
struct LabeledVector {
  std::vector<SpaceLabel> spaces;
  Vec v;

  LabeledVector() = default;
  LabeledVector(std::vector<SpaceLabel> s, Vec vec);

  int dim() const { return static_cast<int>(v.size()); }
};

LabeledOperator identity_on(const std::vector<SpaceLabel>& spaces);

LabeledOperator tensor_product(const LabeledOperator& a, const LabeledOperator& b);

LabeledOperator partial_trace(const LabeledOperator& a,
                              const std::vector<std::string>& traced);

LabeledOperator partial_transpose(const LabeledOperator& a,
                                  const std::vector<std::string>& transposed);

LabeledOperator permute_systems(const LabeledOperator& a,
                                const std::vector<std::string>& new_order);

/// Eigendecomposition of a Hermitian labeled operator, eigenvalues descending.
struct HermitianEig {
  std::vector<double> eigenvalues;
  std::vector<LabeledVector> eigenvectors;
};

HermitianEig hermitian_eig(const LabeledOperator& a, double herm_tol = 1e-10);

}  // namespace combqfi

#endif
