#include "combqfi/tensor.hpp"

#include <algorithm>
#include <set>

#include "combqfi/kernels.hpp"

namespace combqfi {

namespace {

void check_unique(const std::vector<SpaceLabel>& spaces) {
  std::set<std::string> seen;
  for (const auto& s : spaces) {
    if (s.dim < 1) throw structural_error("space dim must be >= 1: " + s.id);
    if (!seen.insert(s.id).second)
      throw structural_error("duplicate space label: " + s.id);
  }
}

// stride[i] = product of dims of spaces listed after i (big-endian layout)
std::vector<long> strides(const std::vector<SpaceLabel>& spaces) {
  std::vector<long> st(spaces.size());
  long acc = 1;
  for (int i = static_cast<int>(spaces.size()) - 1; i >= 0; --i) {
    st[i] = acc;
    acc *= spaces[i].dim;
  }
  return st;
}

std::vector<int> find_subset(const LabeledOperator& a,
                             const std::vector<std::string>& ids) {
  std::vector<int> idx;
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) throw structural_error("repeated label: " + id);
    int p = a.find_space(id);
    if (p < 0) throw structural_error("unknown space label: " + id);
    idx.push_back(p);
  }
  return idx;
}

// For each flat index, the additive contribution of the digits of the given
// subset of spaces.
std::vector<int> subset_contrib(const std::vector<SpaceLabel>& spaces,
                                const std::vector<int>& subset) {
  auto st = strides(spaces);
  int dim = total_dim(spaces);
  std::vector<char> in(spaces.size(), 0);
  for (int i : subset) in[i] = 1;
  std::vector<int> contrib(dim);
  for (int x = 0; x < dim; ++x) {
    long rest = x, c = 0;
    for (size_t i = 0; i < spaces.size(); ++i) {
      long digit = rest / st[i];
      rest %= st[i];
      if (in[i]) c += digit * st[i];
    }
    contrib[x] = static_cast<int>(c);
  }
  return contrib;
}

}  // namespace

std::vector<SpaceLabel> qubit_spaces(int n) {
  std::vector<SpaceLabel> s;
  for (int i = 1; i <= n; ++i) s.push_back(qubit(std::to_string(i)));
  return s;
}

int total_dim(const std::vector<SpaceLabel>& spaces) {
  long d = 1;
  for (const auto& s : spaces) d *= s.dim;
  return static_cast<int>(d);
}

LabeledOperator::LabeledOperator(std::vector<SpaceLabel> s, Mat mat)
    : spaces(std::move(s)), m(std::move(mat)) {
  check_unique(spaces);
  if (m.rows() != m.cols() || m.rows() != total_dim(spaces))
    throw structural_error("matrix size does not match space dimensions");
}

int LabeledOperator::find_space(const std::string& id) const {
  for (size_t i = 0; i < spaces.size(); ++i)
    if (spaces[i].id == id) return static_cast<int>(i);
  return -1;
}

bool LabeledOperator::is_hermitian(double rel_tol) const {
  double scale = std::max(1.0, m.norm());
  return (m - m.adjoint()).norm() <= rel_tol * scale;
}

bool LabeledOperator::is_psd(double rel_tol, double abs_floor) const {
  if (!is_hermitian(1e-8)) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.adjoint()),
                                        Eigen::EigenvaluesOnly);
  double lmax = std::max(0.0, es.eigenvalues().maxCoeff());
  return es.eigenvalues().minCoeff() >= -(abs_floor + rel_tol * lmax);
}

LabeledVector::LabeledVector(std::vector<SpaceLabel> s, Vec vec)
    : spaces(std::move(s)), v(std::move(vec)) {
  check_unique(spaces);
  if (v.size() != total_dim(spaces))
    throw structural_error("vector size does not match space dimensions");
}

LabeledOperator identity_on(const std::vector<SpaceLabel>& spaces) {
  int d = total_dim(spaces);
  return LabeledOperator(spaces, Mat::Identity(d, d));
}

LabeledOperator tensor_product(const LabeledOperator& a, const LabeledOperator& b) {
  for (const auto& s : b.spaces)
    if (a.has_space(s.id)) throw structural_error("label collision: " + s.id);
  std::vector<SpaceLabel> spaces = a.spaces;
  spaces.insert(spaces.end(), b.spaces.begin(), b.spaces.end());
  int da = a.dim(), db = b.dim();
  Mat out(da * db, da * db);
  for (int i = 0; i < da; ++i)
    for (int j = 0; j < da; ++j)
      out.block(i * db, j * db, db, db) = a.m(i, j) * b.m;
  return LabeledOperator(std::move(spaces), std::move(out));
}

LabeledOperator partial_trace(const LabeledOperator& a,
                              const std::vector<std::string>& traced) {
  auto subset = find_subset(a, traced);
  std::vector<char> in(a.spaces.size(), 0);
  for (int i : subset) in[i] = 1;

  std::vector<SpaceLabel> kept_spaces, traced_spaces;
  std::vector<int> kept_idx, traced_idx;
  for (size_t i = 0; i < a.spaces.size(); ++i) {
    if (in[i]) {
      traced_spaces.push_back(a.spaces[i]);
      traced_idx.push_back(static_cast<int>(i));
    } else {
      kept_spaces.push_back(a.spaces[i]);
      kept_idx.push_back(static_cast<int>(i));
    }
  }

  // Flat source offsets for every kept-index value and traced-index value.
  auto st = strides(a.spaces);
  auto offsets = [&](const std::vector<SpaceLabel>& sub, const std::vector<int>& idx) {
    int d = total_dim(sub);
    auto sub_st = strides(sub);
    std::vector<int> off(d);
    for (int x = 0; x < d; ++x) {
      long rest = x, o = 0;
      for (size_t i = 0; i < sub.size(); ++i) {
        long digit = rest / sub_st[i];
        rest %= sub_st[i];
        o += digit * st[idx[i]];
      }
      off[x] = static_cast<int>(o);
    }
    return off;
  };

  Mat out;
  kernels::ptrace_omp(out, a.m, offsets(kept_spaces, kept_idx),
                      offsets(traced_spaces, traced_idx));
  return LabeledOperator(std::move(kept_spaces), std::move(out));
}

LabeledOperator partial_transpose(const LabeledOperator& a,
                                  const std::vector<std::string>& transposed) {
  auto subset = find_subset(a, transposed);
  Mat out;
  kernels::ptranspose_omp(out, a.m, subset_contrib(a.spaces, subset));
  return LabeledOperator(a.spaces, std::move(out));
}

LabeledOperator permute_systems(const LabeledOperator& a,
                                const std::vector<std::string>& new_order) {
  if (new_order.size() != a.spaces.size())
    throw structural_error("permutation must list every space exactly once");
  auto idx = find_subset(a, new_order);  // throws on repeats/unknowns

  std::vector<SpaceLabel> spaces;
  for (int i : idx) spaces.push_back(a.spaces[i]);

  auto old_st = strides(a.spaces);
  auto new_st = strides(spaces);
  int dim = a.dim();
  std::vector<int> p(dim);
  for (int x = 0; x < dim; ++x) {
    long rest = x, o = 0;
    for (size_t i = 0; i < spaces.size(); ++i) {
      long digit = rest / new_st[i];
      rest %= new_st[i];
      o += digit * old_st[idx[i]];
    }
    p[x] = static_cast<int>(o);
  }
  Mat out;
  kernels::permute_omp(out, a.m, p);
  return LabeledOperator(std::move(spaces), std::move(out));
}

HermitianEig hermitian_eig(const LabeledOperator& a, double herm_tol) {
  if (!a.is_hermitian(herm_tol))
    throw validation_error("hermitian_eig: input is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (a.m + a.m.adjoint()));
  HermitianEig out;
  int n = a.dim();
  for (int i = n - 1; i >= 0; --i) {  // descending
    out.eigenvalues.push_back(es.eigenvalues()(i));
    out.eigenvectors.emplace_back(a.spaces, es.eigenvectors().col(i));
  }
  return out;
}

}  // namespace combqfi
