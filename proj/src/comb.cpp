#include "combqfi/comb.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace combqfi {

ToothStructure ToothStructure::qubits(int N) {
  ToothStructure s;
  for (int k = 1; k <= N; ++k)
    s.teeth.emplace_back(qubit(std::to_string(2 * k - 1)), qubit(std::to_string(2 * k)));
  return s;
}

std::vector<SpaceLabel> ToothStructure::all_spaces() const {
  return spaces_up_to(2 * N());
}

std::vector<SpaceLabel> ToothStructure::spaces_up_to(int count) const {
  std::vector<SpaceLabel> out;
  for (const auto& [in, outp] : teeth) {
    if (static_cast<int>(out.size()) == count) break;
    out.push_back(in);
    if (static_cast<int>(out.size()) == count) break;
    out.push_back(outp);
  }
  return out;
}

namespace {

std::vector<std::string> ids(const std::vector<SpaceLabel>& spaces) {
  std::vector<std::string> out;
  for (const auto& s : spaces) out.push_back(s.id);
  return out;
}

LabeledOperator to_canonical_order(const LabeledOperator& c, const ToothStructure& s) {
  auto want = s.all_spaces();
  if (c.spaces.size() != want.size())
    throw structural_error("operator does not live on the comb's spaces");
  for (const auto& w : want) {
    int p = c.find_space(w.id);
    if (p < 0 || c.spaces[p].dim != w.dim)
      throw structural_error("operator does not live on the comb's spaces");
  }
  return permute_systems(c, ids(want));
}

}  // namespace

ValidationReport validate_comb(const LabeledOperator& c, const ToothStructure& s,
                               double tol) {
  ValidationReport rep;
  LabeledOperator cur = to_canonical_order(c, s);
  const int N = s.N();

  rep.psd_ok = cur.is_psd(1e-9, tol);
  if (!rep.psd_ok) rep.messages.push_back("operator is not PSD");

  // Recursively trace out the last tooth; the reduced operator must factor as
  // identity on the last input tensor the next comb in the chain.
  for (int k = N; k >= 1; --k) {
    const auto& [in_k, out_k] = s.teeth[k - 1];
    LabeledOperator traced = partial_trace(cur, {out_k.id});
    LabeledOperator next = partial_trace(traced, {in_k.id});
    next.m /= in_k.dim;
    double res;
    if (k == 1) {
      res = std::abs(next.m(0, 0) - 1.0);
      LabeledOperator idm = identity_on({in_k});
      res = std::max(res, (traced.m - idm.m).cwiseAbs().maxCoeff());
    } else {
      LabeledOperator expect = tensor_product(identity_on({in_k}), next);
      expect = permute_systems(expect, ids(traced.spaces));
      res = (traced.m - expect.m).cwiseAbs().maxCoeff();
      if (!next.is_psd(1e-9, tol)) {
        rep.messages.push_back("reduced operator at tooth " + std::to_string(k - 1) +
                               " is not PSD");
        rep.psd_ok = false;
      }
    }
    rep.max_residual = std::max(rep.max_residual, res);
    if (res >= tol)
      rep.messages.push_back("causality residual " + std::to_string(res) +
                             " at tooth " + std::to_string(k));
    cur = std::move(next);
  }

  rep.passed = rep.psd_ok && rep.max_residual < tol;
  return rep;
}

LabeledOperator link_product(const LabeledOperator& e, const LabeledOperator& f) {
  std::vector<std::string> shared;
  for (const auto& s : e.spaces) {
    int p = f.find_space(s.id);
    if (p >= 0) {
      if (f.spaces[p].dim != s.dim)
        throw structural_error("link_product: dim mismatch on label " + s.id);
      shared.push_back(s.id);
    }
  }
  std::set<std::string> shared_set(shared.begin(), shared.end());

  std::vector<SpaceLabel> e_only, f_only;
  for (const auto& s : e.spaces)
    if (!shared_set.count(s.id)) e_only.push_back(s);
  for (const auto& s : f.spaces)
    if (!shared_set.count(s.id)) f_only.push_back(s);

  LabeledOperator et = partial_transpose(e, shared);

  // order both factors as [e_only, shared, f_only]
  std::vector<SpaceLabel> shared_spaces;
  for (const auto& id : shared) shared_spaces.push_back(e.spaces[e.find_space(id)]);
  std::vector<SpaceLabel> full = e_only;
  full.insert(full.end(), shared_spaces.begin(), shared_spaces.end());
  full.insert(full.end(), f_only.begin(), f_only.end());

  LabeledOperator a = et;
  if (!f_only.empty())
    a = tensor_product(et, identity_on(f_only));
  a = permute_systems(a, ids(full));

  LabeledOperator b = f;
  if (!e_only.empty())
    b = tensor_product(identity_on(e_only), f);
  b = permute_systems(b, ids(full));

  LabeledOperator prod(full, a.m * b.m);
  if (shared.empty()) return prod;
  return partial_trace(prod, shared);
}

EnsembleDecomposition ensemble_decomposition(const Comb& c, double rank_tol) {
  auto eig = hermitian_eig(c.op);
  double lmax = eig.eigenvalues.empty() ? 0.0 : std::max(0.0, eig.eigenvalues[0]);
  EnsembleDecomposition d;
  for (size_t i = 0; i < eig.eigenvalues.size(); ++i) {
    double lam = eig.eigenvalues[i];
    if (lam < -rank_tol * std::max(1.0, lmax))
      throw validation_error("ensemble_decomposition: operator is not PSD");
    if (lam > rank_tol * std::max(1.0, lmax)) {
      LabeledVector v = eig.eigenvectors[i];
      v.v *= std::sqrt(lam);
      d.vectors.push_back(std::move(v));
    }
  }
  d.rank = d.q();
  return d;
}

std::vector<LabeledVector> gauged_derivatives(const EnsembleDecomposition& d,
                                              const GaugeMatrix& h) {
  const int q = d.q();
  if (h.h.rows() != q || h.h.cols() != q)
    throw structural_error("gauge matrix size does not match ensemble size");
  if (!d.has_derivatives() || static_cast<int>(d.derivatives.size()) != q)
    throw structural_error("ensemble decomposition lacks derivatives");
  std::vector<LabeledVector> out;
  const Complex im(0, 1);
  for (int i = 0; i < q; ++i) {
    LabeledVector v = d.derivatives[i];
    for (int j = 0; j < q; ++j) v.v -= im * h.h(i, j) * d.vectors[j].v;
    out.push_back(std::move(v));
  }
  return out;
}

PerformanceOperator performance_operator(const EnsembleDecomposition& d,
                                         const GaugeMatrix& h,
                                         const ToothStructure& s) {
  auto vs = gauged_derivatives(d, h);
  auto spaces = s.all_spaces();
  int dim = total_dim(spaces);
  Mat sum = Mat::Zero(dim, dim);
  for (const auto& v : vs) sum += v.v * v.v.adjoint();
  LabeledOperator pre(spaces, 4.0 * sum);
  auto transpose_over = ids(s.spaces_up_to(2 * s.N() - 1));
  return PerformanceOperator{partial_transpose(pre, transpose_over), h};
}

double state_qfi(const LabeledOperator& rho, const LabeledOperator& drho) {
  if (!rho.is_psd(1e-8, 1e-8) || std::abs(rho.m.trace() - 1.0) > 1e-8)
    throw validation_error("state_qfi: rho is not a unit-trace PSD state");
  if (rho.dim() != drho.dim())
    throw structural_error("state_qfi: dimension mismatch");
  double dscale = std::max(1.0, drho.m.norm());
  if ((drho.m - drho.m.adjoint()).norm() > 1e-8 * dscale ||
      std::abs(drho.m.trace()) > 1e-8 * dscale)
    throw validation_error("state_qfi: drho is not Hermitian traceless");

  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (rho.m + rho.m.adjoint()));
  const auto& lam = es.eigenvalues();
  Mat d = es.eigenvectors().adjoint() * drho.m * es.eigenvectors();
  double lmax = lam.maxCoeff();
  double eps = 1e-12 * lmax;
  double J = 0;
  for (int j = 0; j < lam.size(); ++j)
    for (int k = 0; k < lam.size(); ++k) {
      double denom = lam(j) + lam(k);
      if (denom > eps) J += 2.0 * std::norm(d(j, k)) / denom;
    }
  return J;
}

double cramer_rao_bound(double J, unsigned nu) {
  if (nu == 0) throw structural_error("cramer_rao_bound: nu must be positive");
  if (J < 0) throw validation_error("cramer_rao_bound: J must be nonnegative");
  if (J == 0) return kUnboundedVariance;
  return 1.0 / (nu * J);
}

EnsembleDecomposition finite_difference_derivatives(const CombFamily& f, double theta,
                                                    double step) {
  auto [compb, base] = f.evaluate(theta);
  auto lo = f.evaluate(theta - step).second;
  auto hi = f.evaluate(theta + step).second;
  if (lo.q() != base.q() || hi.q() != base.q())
    throw validation_error(
        "finite_difference_derivatives: ensemble size changes across theta (gauge "
        "mismatch)");
  EnsembleDecomposition out = base;
  out.derivatives.clear();
  for (int i = 0; i < base.q(); ++i) {
    LabeledVector d = base.vectors[i];
    d.v = (hi.vectors[i].v - lo.vectors[i].v) / (2.0 * step);
    out.derivatives.push_back(std::move(d));
  }
  return out;
}

RankEstimate estimate_rank(const CombFamily& f, double rank_tol) {
  RankEstimate est;
  auto [lo, hi] = f.domain;
  double pts[3] = {lo, 0.5 * (lo + hi), hi};
  int first = -1;
  for (double th : pts) {
    auto [c, d] = f.evaluate(th);
    auto eig = hermitian_eig(c.op);
    double lmax = std::max(1.0, eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues[0]);
    int r = 0;
    for (double l : eig.eigenvalues)
      if (l > rank_tol * lmax) ++r;
    if (first < 0) first = r;
    if (r != first) est.consistent = false;
    est.rank = std::max(est.rank, r);
  }
  return est;
}

void write_comb(std::ostream& os, const Comb& c) {
  os.precision(17);
  os << "combqfi-comb 1\n" << c.structure.N() << "\n";
  for (const auto& s : c.structure.all_spaces()) os << s.dim << " ";
  os << "\n";
  LabeledOperator canon = to_canonical_order(c.op, c.structure);
  int d = canon.dim();
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j)
      os << canon.m(i, j).real() << " " << canon.m(i, j).imag() << (j + 1 < d ? " " : "");
    os << "\n";
  }
}

Comb read_comb(std::istream& is) {
  std::string magic;
  int version = 0, N = 0;
  is >> magic >> version >> N;
  if (!is || magic != "combqfi-comb" || version != 1 || N < 1)
    throw structural_error("bad comb file header");
  ToothStructure s = ToothStructure::qubits(N);
  auto spaces = s.all_spaces();
  for (auto& sp : spaces) {
    int d;
    is >> d;
    if (!is || d < 1) throw structural_error("bad comb file dims");
    sp.dim = d;
  }
  for (int k = 0; k < N; ++k) {
    s.teeth[k].first = spaces[2 * k];
    s.teeth[k].second = spaces[2 * k + 1];
  }
  int dim = total_dim(spaces);
  Mat m(dim, dim);
  for (int i = 0; i < dim; ++i)
    for (int j = 0; j < dim; ++j) {
      double re, imag;
      is >> re >> imag;
      if (!is) throw structural_error("bad comb file matrix data");
      m(i, j) = Complex(re, imag);
    }
  return Comb{LabeledOperator(spaces, std::move(m)), s};
}

}  // namespace combqfi
