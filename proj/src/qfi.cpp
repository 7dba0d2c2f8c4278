#include "combqfi/qfi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace combqfi {

namespace {

using sdp::HermBlock;
using sdp::Problem;
using sdp::Solution;

Vec canonical_vec(const LabeledVector& v, const std::vector<SpaceLabel>& want) {
  const int k = static_cast<int>(want.size());
  if (static_cast<int>(v.spaces.size()) != k)
    throw structural_error("ensemble vector does not live on the comb's ports");
  std::vector<int> pos(k);
  for (int i = 0; i < k; ++i) {
    int p = -1;
    for (int j = 0; j < k; ++j)
      if (v.spaces[j].id == want[i].id && v.spaces[j].dim == want[i].dim) p = j;
    if (p < 0) throw structural_error("ensemble vector does not live on the comb's ports");
    pos[i] = p;
  }
  std::vector<int> src_stride(k, 1);
  for (int j = k - 2; j >= 0; --j)
    src_stride[j] = src_stride[j + 1] * v.spaces[j + 1].dim;
  Vec out(v.dim());
  std::vector<int> digit(k, 0);
  for (int idx = 0; idx < v.dim(); ++idx) {
    int rem = idx, src = 0;
    for (int i = k - 1; i >= 0; --i) {
      digit[i] = rem % want[i].dim;
      rem /= want[i].dim;
    }
    for (int i = 0; i < k; ++i) src += digit[i] * src_stride[pos[i]];
    out(idx) = v.v(src);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gauge reduction: the reachable derivative perturbations A h (h Hermitian
// q x q) equal A0p (ht Vr^dag + F Vperp^dag) with ht Hermitian r x r and F
// complex r x (q-r), where A = U S V^dag and A0p = A Vr. Real coordinates:
// first ht (diag, then re/im per upper off-diagonal), then re/im of F.
struct GaugeBasis {
  int q = 0, r = 0;
  Mat Vr, Vperp, A0p;
  struct Pair {
    Vec u;      // column-space factor (length D)
    Vec wconj;  // weight of ensemble column i is wconj[i]
  };
  std::vector<std::vector<Pair>> params;  // dM/dp_k = sum_s u_s wconj_s^T

  int np() const { return static_cast<int>(params.size()); }

  Mat h_from(const RVec& p) const {
    Mat ht = Mat::Zero(r, r);
    int k = 0;
    for (int a = 0; a < r; ++a) ht(a, a) = p(k++);
    for (int a = 0; a < r; ++a)
      for (int b = a + 1; b < r; ++b) {
        double re = p(k++), im = p(k++);
        ht(a, b) += Complex(re, im);
        ht(b, a) += Complex(re, -im);
      }
    Mat f = Mat::Zero(r, q - r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < q - r; ++b) {
        double re = p(k++), im = p(k++);
        f(a, b) = Complex(re, im);
      }
    Mat h = Vr * ht * Vr.adjoint();
    if (q > r) {
      Mat cross = Vr * f * Vperp.adjoint();
      h += cross + cross.adjoint();
    }
    return h;
  }
};

GaugeBasis make_gauge_basis(const Mat& a, int rank_override, double tol) {
  GaugeBasis g;
  g.q = static_cast<int>(a.cols());
  Eigen::JacobiSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol * std::max(1.0, sv(0))) ++r;
  if (rank_override > 0) r = std::min(rank_override, g.q);
  r = std::max(r, 1);
  g.r = r;
  g.Vr = svd.matrixV().leftCols(r);
  g.Vperp = svd.matrixV().rightCols(g.q - r);
  g.A0p = a * g.Vr;

  const Complex mi(0, -1);
  for (int aa = 0; aa < r; ++aa)
    g.params.push_back({{mi * g.A0p.col(aa), g.Vr.col(aa).conjugate()}});
  for (int aa = 0; aa < r; ++aa)
    for (int bb = aa + 1; bb < r; ++bb) {
      g.params.push_back({{mi * g.A0p.col(aa), g.Vr.col(bb).conjugate()},
                          {mi * g.A0p.col(bb), g.Vr.col(aa).conjugate()}});
      g.params.push_back({{Vec(g.A0p.col(aa)), g.Vr.col(bb).conjugate()},
                          {Vec(-g.A0p.col(bb)), g.Vr.col(aa).conjugate()}});
    }
  for (int aa = 0; aa < r; ++aa)
    for (int bb = 0; bb < g.q - r; ++bb) {
      g.params.push_back({{mi * g.A0p.col(aa), g.Vperp.col(bb).conjugate()}});
      g.params.push_back({{Vec(g.A0p.col(aa)), g.Vperp.col(bb).conjugate()}});
    }
  return g;
}

// ---------------------------------------------------------------------------
// Hermitian matrix variables and trace-down equality rows.
struct HermVarIds {
  int dim = 0;
  std::vector<std::vector<int>> re, im;
};

HermVarIds add_herm_vars(Problem& p, int dim) {
  HermVarIds h;
  h.dim = dim;
  h.re.assign(dim, std::vector<int>(dim, -1));
  h.im.assign(dim, std::vector<int>(dim, -1));
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      h.re[i][j] = p.add_var(0.0);
      if (i != j) h.im[i][j] = p.add_var(0.0);
    }
  return h;
}

Mat herm_value(const HermVarIds& h, const RVec& x) {
  Mat m(h.dim, h.dim);
  for (int i = 0; i < h.dim; ++i)
    for (int j = i; j < h.dim; ++j) {
      Complex z(x(h.re[i][j]), i == j ? 0.0 : x(h.im[i][j]));
      m(i, j) = z;
      m(j, i) = std::conj(z);
    }
  return m;
}

/// tr over the last factor (dim traced_dim) of `top` must equal
/// I_{id_dim} (x) lower, with the identity factor ordered last in the
/// remaining product. lower == nullptr means lower is the scalar lambda.
void add_trace_down_eqs(Problem& p, const HermVarIds& top, const HermVarIds* lower,
                        int lambda_var, int id_dim, int traced_dim) {
  const int nl = lower ? lower->dim : 1;
  const int n = nl * id_dim;
  for (int mu = 0; mu < n; ++mu)
    for (int nu = mu; nu < n; ++nu) {
      int rho = mu / id_dim, j = mu % id_dim;
      int sigma = nu / id_dim, jp = nu % id_dim;
      sdp::EqRow rr, ri;
      for (int s = 0; s < traced_dim; ++s) {
        int r = mu * traced_dim + s, c = nu * traced_dim + s;
        rr.terms.push_back({top.re[r][c], 1.0});
        if (mu < nu) ri.terms.push_back({top.im[r][c], 1.0});
      }
      if (j == jp) {
        if (lower) {
          rr.terms.push_back({lower->re[rho][sigma], -1.0});
          if (rho < sigma) ri.terms.push_back({lower->im[rho][sigma], -1.0});
        } else {
          rr.terms.push_back({lambda_var, -1.0});
        }
      }
      p.eqs.push_back(std::move(rr));
      if (mu < nu) p.eqs.push_back(std::move(ri));
    }
}

/// Attach the Hermitian variable `s` tensor the identity of dimension id_dim
/// to a block, at the given row/column offset.
void add_tensor_identity(HermBlock& hb, const HermVarIds& s, int id_dim, int offset) {
  for (int rho = 0; rho < s.dim; ++rho)
    for (int sigma = rho; sigma < s.dim; ++sigma)
      for (int j = 0; j < id_dim; ++j) {
        int r = offset + rho * id_dim + j, c = offset + sigma * id_dim + j;
        hb.add_entry(s.re[rho][sigma], r, c, 1.0);
        if (rho < sigma) hb.add_entry(s.im[rho][sigma], r, c, Complex(0, 1));
      }
}

struct CanonicalEnsemble {
  Mat a, adot;  // D x q, columns in canonical port order
  std::vector<SpaceLabel> ports;
  std::vector<int> dims;  // d_1 .. d_{2N}
  int N = 0, D = 0, q = 0;
};

CanonicalEnsemble canonicalize(const EnsembleDecomposition& d, const ToothStructure& s) {
  if (!d.has_derivatives())
    throw structural_error("ensemble decomposition lacks derivatives");
  CanonicalEnsemble ce;
  ce.N = s.N();
  ce.ports = s.all_spaces();
  for (const auto& sp : ce.ports) ce.dims.push_back(sp.dim);
  ce.D = total_dim(ce.ports);
  ce.q = d.q();
  ce.a.resize(ce.D, ce.q);
  ce.adot.resize(ce.D, ce.q);
  for (int i = 0; i < ce.q; ++i) {
    ce.a.col(i) = canonical_vec(d.vectors[i], ce.ports);
    ce.adot.col(i) = canonical_vec(d.derivatives[i], ce.ports);
  }
  return ce;
}

struct ChainSetup {
  int lambda_var = -1;
  std::vector<HermVarIds> s;  // scaled chain operators, levels 1..N-1
};

/// Variables and equalities for the scaled dual chain on ports 1..2(N-1):
/// tr_2 S1 = lambda I, tr_{2k} Sk = I (x) S{k-1}.
ChainSetup add_dual_chain(Problem& p, const std::vector<int>& dims, int N,
                          double lambda_obj) {
  ChainSetup cs;
  cs.lambda_var = p.add_var(lambda_obj);
  int dim = 1;
  for (int k = 1; k <= N - 1; ++k) {
    dim *= dims[2 * k - 2] * dims[2 * k - 1];
    cs.s.push_back(add_herm_vars(p, dim));
  }
  for (int k = 1; k <= N - 1; ++k)
    add_trace_down_eqs(p, cs.s[k - 1], k >= 2 ? &cs.s[k - 2] : nullptr, cs.lambda_var,
                       dims[2 * k - 2], dims[2 * k - 1]);
  return cs;
}

/// Add the bottom of the constraint block: S{N-1} (x) I_{d_{2N-1}} for N >= 2,
/// or lambda I_{d_1} for N = 1.
void add_bottom(HermBlock& hb, const ChainSetup& cs, const std::vector<int>& dims,
                int N, int offset) {
  if (N == 1) {
    for (int j = 0; j < dims[0]; ++j)
      hb.add_entry(cs.lambda_var, offset + j, offset + j, 1.0);
  } else {
    add_tensor_identity(hb, cs.s.back(), dims[2 * N - 3], offset);
  }
}

QfiResult package_result(const Solution& sol, const ChainSetup& cs,
                         const GaugeBasis* gauge, const RVec* gauge_p) {
  QfiResult res;
  res.status = sol.status;
  res.gap = sol.gap;
  res.iterations = sol.iterations;
  if (sol.status != sdp::Status::optimal) return res;
  res.J = sol.objective;
  res.lambda = sol.x(cs.lambda_var);
  for (const auto& s : cs.s) res.S_blocks.push_back(herm_value(s, sol.x));
  if (gauge && gauge_p) res.h_opt = gauge->h_from(*gauge_p);
  return res;
}

}  // namespace

namespace {

// J grows like the squared derivative norm (~ t_tot^2 for the collision
// families), which leaves the SDP badly scaled at large times. Both routes
// therefore solve with unit-scale derivatives and rescale the result:
// J and lambda by s^2, the gauge by s, the chain blocks by s^2.
double derivative_scale(const EnsembleDecomposition& d) {
  double s = 0;
  for (const auto& dv : d.derivatives) s = std::max(s, dv.v.norm());
  return s > 1e-12 ? s : 1.0;
}

EnsembleDecomposition scaled_ensemble(const EnsembleDecomposition& d, double s) {
  EnsembleDecomposition e = d;
  for (auto& dv : e.derivatives) dv.v /= s;
  return e;
}

void rescale_result(QfiResult& r, double s) {
  const double s2 = s * s;
  r.J *= s2;
  r.lambda *= s2;
  r.gap *= s2;
  for (auto& b : r.S_blocks) b *= s2;
  if (r.h_opt.size() > 0) r.h_opt *= s;
}

QfiResult comb_qfi_dual_unit(const EnsembleDecomposition& d, const ToothStructure& s,
                             const QfiOptions& opts) {
  CanonicalEnsemble ce = canonicalize(d, s);
  GaugeBasis gauge = make_gauge_basis(ce.a, opts.rank_override, opts.rank_tol);

  const int d2n = ce.dims[2 * ce.N - 1];
  const int db = ce.D / d2n;           // ports 1..2N-1
  const int tq = ce.q * d2n;           // border columns, one per (i, m)

  Problem p;
  ChainSetup cs = add_dual_chain(p, ce.dims, ce.N, 4.0);
  std::vector<int> gvars;
  for (int k = 0; k < gauge.np(); ++k) gvars.push_back(p.add_var(0.0));

  HermBlock hb(tq + db);
  for (int t = 0; t < tq; ++t) hb.F0()(t, t) = 1.0;
  for (int i = 0; i < ce.q; ++i)
    for (int m = 0; m < d2n; ++m)
      for (int mu = 0; mu < db; ++mu) {
        Complex z = std::conj(ce.adot(mu * d2n + m, i));
        hb.F0()(tq + mu, i * d2n + m) = z;
        hb.F0()(i * d2n + m, tq + mu) = std::conj(z);
      }
  add_bottom(hb, cs, ce.dims, ce.N, tq);
  for (int k = 0; k < gauge.np(); ++k)
    for (const auto& pr : gauge.params[k])
      for (int m = 0; m < d2n; ++m) {
        Vec a = Vec::Zero(tq + db), b = Vec::Zero(tq + db);
        for (int mu = 0; mu < db; ++mu) a(tq + mu) = std::conj(pr.u(mu * d2n + m));
        for (int i = 0; i < ce.q; ++i) b(i * d2n + m) = pr.wconj(i);
        hb.add_dyad(gvars[k], a, b);
      }
  p.blocks.push_back(hb.realify());

  Solution sol = sdp::solve(p, opts.solver);
  RVec gp(gauge.np());
  for (int k = 0; k < gauge.np(); ++k) gp(k) = sol.x.size() ? sol.x(gvars[k]) : 0.0;
  QfiResult res = package_result(sol, cs, &gauge, &gp);
  if (res.status == sdp::Status::optimal) {
    // The multiplier of the Schur block carries the saddle-point tester in its
    // bottom-right corner; the lambda coefficient fixes the normalization.
    Mat xc = HermBlock::complex_dual(sol.block_duals.back());
    res.tester = xc.bottomRightCorner(db, db) / 2.0;
  }
  return res;
}

}  // namespace

QfiResult comb_qfi_dual(const EnsembleDecomposition& d, const ToothStructure& s,
                        const QfiOptions& opts) {
  const double sc = derivative_scale(d);
  QfiResult r = comb_qfi_dual_unit(scaled_ensemble(d, sc), s, opts);
  rescale_result(r, sc);
  return r;
}

namespace {

/// The scaled-chain bound on the output-traced performance operator at fixed
/// gauge coordinates: value is 4 lambda*, gradient comes from the PSD
/// multiplier of the bound.
struct EntropyEval {
  double f = 0;
  RVec grad;
  Solution sol;
  ChainSetup cs;
};

EntropyEval eval_entropy_bound(const CanonicalEnsemble& ce, const GaugeBasis& gauge,
                               const RVec& pvec, const sdp::SolveOptions& sopts,
                               bool want_grad) {
  const int d2n = ce.dims[2 * ce.N - 1];
  const int db = ce.D / d2n;

  // M(p) = Adot - i A0p (ht Vr^dag + F Vperp^dag); columns M_i.
  Mat h = gauge.h_from(pvec);
  Mat m = ce.adot - Complex(0, 1) * (ce.a * h);

  // c_{i,m}[mu] = conj(M_i[mu d + m]);  W = 4 sum c c^dag = tr_out Omega.
  std::vector<std::vector<Vec>> c(ce.q, std::vector<Vec>(d2n, Vec(db)));
  Mat w = Mat::Zero(db, db);
  for (int i = 0; i < ce.q; ++i)
    for (int mm = 0; mm < d2n; ++mm) {
      for (int mu = 0; mu < db; ++mu) c[i][mm](mu) = std::conj(m(mu * d2n + mm, i));
      w += 4.0 * c[i][mm] * c[i][mm].adjoint();
    }

  Problem p;
  ChainSetup cs = add_dual_chain(p, ce.dims, ce.N, 4.0);
  HermBlock hb(db);
  hb.F0() = -0.25 * w;
  add_bottom(hb, cs, ce.dims, ce.N, 0);
  p.blocks.push_back(hb.realify());

  EntropyEval ev;
  ev.cs = cs;
  ev.sol = sdp::solve(p, sopts);
  ev.f = ev.sol.objective;
  if (ev.sol.status != sdp::Status::optimal || !want_grad) return ev;

  Mat xc = HermBlock::complex_dual(ev.sol.block_duals[0]);
  ev.grad.resize(gauge.np());
  for (int k = 0; k < gauge.np(); ++k) {
    double g = 0;
    for (const auto& pr : gauge.params[k])
      for (int mm = 0; mm < d2n; ++mm) {
        Vec ut(db);
        for (int mu = 0; mu < db; ++mu) ut(mu) = std::conj(pr.u(mu * d2n + mm));
        Vec y = Vec::Zero(db);
        for (int i = 0; i < ce.q; ++i) y += pr.wconj(i) * c[i][mm];
        g += 4.0 * (y.adjoint() * xc * ut).value().real();
      }
    ev.grad(k) = g;
  }
  return ev;
}

}  // namespace

namespace {

QfiResult comb_qfi_min_entropy_unit(const EnsembleDecomposition& d,
                                    const ToothStructure& s, const QfiOptions& opts) {
  CanonicalEnsemble ce = canonicalize(d, s);
  GaugeBasis gauge = make_gauge_basis(ce.a, opts.rank_override, opts.rank_tol);

  const int np = gauge.np();
  RVec p = RVec::Zero(np);
  if (opts.initial_gauge.size() > 0) {
    if (opts.initial_gauge.rows() != gauge.q || opts.initial_gauge.cols() != gauge.q)
      throw structural_error("initial gauge has wrong dimensions");
    // Invert h_from: project the start onto the reachable coordinates.
    const Mat ht = gauge.Vr.adjoint() * opts.initial_gauge * gauge.Vr;
    int k = 0;
    for (int a = 0; a < gauge.r; ++a) p(k++) = ht(a, a).real();
    for (int a = 0; a < gauge.r; ++a)
      for (int b = a + 1; b < gauge.r; ++b) {
        p(k++) = ht(a, b).real();
        p(k++) = ht(a, b).imag();
      }
    if (gauge.q > gauge.r) {
      const Mat f = gauge.Vr.adjoint() * opts.initial_gauge * gauge.Vperp;
      for (int a = 0; a < gauge.r; ++a)
        for (int b = 0; b < gauge.q - gauge.r; ++b) {
          p(k++) = f(a, b).real();
          p(k++) = f(a, b).imag();
        }
    }
  }
  EntropyEval cur = eval_entropy_bound(ce, gauge, p, opts.solver, true);
  if (cur.sol.status != sdp::Status::optimal)
    return package_result(cur.sol, cur.cs, nullptr, nullptr);

  RMat hinv = RMat::Identity(np, np);
  const bool dbg = std::getenv("COMBQFI_SDP_DEBUG") != nullptr;
  int outer = 0;
  for (; outer < opts.max_outer_iters; ++outer) {
    if (dbg)
      std::fprintf(stderr, "outer %3d  f=%.14g  |g|=%.3e\n", outer, cur.f,
                   cur.grad.cwiseAbs().maxCoeff());
    if (cur.grad.cwiseAbs().maxCoeff() <= opts.grad_tol * (1.0 + std::abs(cur.f)))
      break;
    RVec dir = -(hinv * cur.grad);
    if (dir.dot(cur.grad) >= 0) {
      hinv.setIdentity();
      dir = -cur.grad;
    }
    double t = 1.0;
    EntropyEval next;
    bool ok = false;
    for (int ls = 0; ls < 50; ++ls) {
      next = eval_entropy_bound(ce, gauge, RVec(p + t * dir), opts.solver, true);
      if (next.sol.status == sdp::Status::optimal &&
          next.f <= cur.f + 1e-4 * t * cur.grad.dot(dir)) {
        ok = true;
        break;
      }
      t *= 0.5;
    }
    if (!ok) break;
    RVec step = t * dir;
    RVec yvec = next.grad - cur.grad;
    double sy = step.dot(yvec);
    if (sy > 1e-12 * step.norm() * yvec.norm()) {
      RVec hy = hinv * yvec;
      double yhy = yvec.dot(hy);
      hinv += ((sy + yhy) / (sy * sy)) * (step * step.transpose()) -
              (hy * step.transpose() + step * hy.transpose()) / sy;
    }
    p += step;
    const double improvement = cur.f - next.f;
    cur = std::move(next);
    // The gradient from the inner multiplier has a noise floor well above
    // machine precision; stop once f stalls at inner-solver accuracy.
    if (improvement <= 1e-12 * (1.0 + std::abs(cur.f))) break;
  }

  QfiResult res = package_result(cur.sol, cur.cs, &gauge, &p);
  res.iterations = outer;
  return res;
}

}  // namespace

QfiResult comb_qfi_min_entropy(const EnsembleDecomposition& d, const ToothStructure& s,
                               const QfiOptions& opts) {
  const double sc = derivative_scale(d);
  QfiOptions scaled_opts = opts;
  if (scaled_opts.initial_gauge.size() > 0) scaled_opts.initial_gauge /= sc;
  QfiResult r = comb_qfi_min_entropy_unit(scaled_ensemble(d, sc), s, scaled_opts);
  rescale_result(r, sc);
  return r;
}

double conditional_min_entropy(const LabeledOperator& w, const ToothStructure& s,
                               const sdp::SolveOptions& opts) {
  const int n = s.N();
  auto ports = s.all_spaces();
  std::vector<int> dims;
  for (const auto& sp : ports) dims.push_back(sp.dim);
  std::vector<std::string> ids;
  for (const auto& sp : ports) ids.push_back(sp.id);
  LabeledOperator wc = permute_systems(w, ids);
  if (!wc.is_hermitian(1e-9))
    throw validation_error("conditional_min_entropy: operator is not Hermitian");

  Problem p;
  ChainSetup cs = add_dual_chain(p, dims, n, 1.0);
  HermBlock hb(wc.dim());
  hb.F0() = -wc.m;
  if (n == 1) {
    for (int j = 0; j < wc.dim(); ++j) hb.add_entry(cs.lambda_var, j, j, 1.0);
  } else {
    add_tensor_identity(hb, cs.s.back(), dims[2 * n - 2] * dims[2 * n - 1], 0);
  }
  p.blocks.push_back(hb.realify());

  Solution sol = sdp::solve(p, opts);
  if (sol.status != sdp::Status::optimal)
    throw validation_error("conditional_min_entropy: solver did not converge (" +
                           sdp::to_string(sol.status) + ")");
  if (sol.objective <= 0)
    throw validation_error("conditional_min_entropy: nonpositive scale");
  return -std::log2(sol.objective);
}

ProbeResult optimal_probe(const LabeledOperator& w, const ToothStructure& s,
                          const sdp::SolveOptions& opts) {
  const int n = s.N();
  auto ports = s.spaces_up_to(2 * n - 1);
  std::vector<int> dims;
  for (const auto& sp : ports) dims.push_back(sp.dim);
  std::vector<std::string> ids;
  for (const auto& sp : ports) ids.push_back(sp.id);
  LabeledOperator wc = permute_systems(w, ids);

  Problem p;
  std::vector<HermVarIds> t;
  int dim = 1;
  for (int k = 1; k <= n; ++k) {
    dim *= dims[2 * k - 2];
    if (k >= 2) dim *= dims[2 * k - 3];
    t.push_back(add_herm_vars(p, dim));
  }
  // maximize tr(T W) over the top-level strategy
  const auto& top = t.back();
  for (int r = 0; r < top.dim; ++r) {
    p.objective[top.re[r][r]] = -wc.m(r, r).real();
    for (int c = r + 1; c < top.dim; ++c) {
      p.objective[top.re[r][c]] = -2.0 * wc.m(r, c).real();
      p.objective[top.im[r][c]] = -2.0 * wc.m(r, c).imag();
    }
  }
  sdp::EqRow norm;
  for (int a = 0; a < t[0].dim; ++a) norm.terms.push_back({t[0].re[a][a], 1.0});
  norm.rhs = 1.0;
  p.eqs.push_back(std::move(norm));
  for (int k = 2; k <= n; ++k)
    add_trace_down_eqs(p, t[k - 1], &t[k - 2], -1, dims[2 * k - 3], dims[2 * k - 2]);

  HermBlock hb(top.dim);
  for (int r = 0; r < top.dim; ++r)
    for (int c = r; c < top.dim; ++c) {
      hb.add_entry(top.re[r][c], r, c, 1.0);
      if (r < c) hb.add_entry(top.im[r][c], r, c, Complex(0, 1));
    }
  p.blocks.push_back(hb.realify());

  Solution sol = sdp::solve(p, opts);
  ProbeResult res;
  res.status = sol.status;
  if (sol.status != sdp::Status::optimal) return res;
  res.value = -sol.objective;
  res.probe = LabeledOperator(ports, herm_value(top, sol.x));
  return res;
}

LabeledVector purify_probe(const LabeledOperator& probe, double rank_tol) {
  auto eig = hermitian_eig(probe);
  double lmax = eig.eigenvalues.empty() ? 0.0 : std::max(0.0, eig.eigenvalues[0]);
  std::vector<int> keep;
  for (size_t i = 0; i < eig.eigenvalues.size(); ++i)
    if (eig.eigenvalues[i] > rank_tol * std::max(1.0, lmax))
      keep.push_back(static_cast<int>(i));
  if (keep.empty()) throw validation_error("purify_probe: operator has no support");
  const int k = static_cast<int>(keep.size());
  const int dd = probe.dim();
  Vec v(dd * k);
  v.setZero();
  for (int j = 0; j < k; ++j) {
    double root = std::sqrt(eig.eigenvalues[keep[j]]);
    for (int mu = 0; mu < dd; ++mu) v(mu * k + j) = root * eig.eigenvectors[keep[j]].v(mu);
  }
  auto spaces = probe.spaces;
  spaces.push_back(SpaceLabel{"anc", k});
  return LabeledVector(spaces, std::move(v));
}

QfiResult channel_qfi(const EnsembleDecomposition& d, const QfiOptions& opts) {
  if (d.q() == 0 || d.vectors[0].spaces.size() != 2)
    throw structural_error("channel_qfi: expected vectors on a single (in, out) pair");
  ToothStructure s;
  s.teeth.emplace_back(d.vectors[0].spaces[0], d.vectors[0].spaces[1]);
  return comb_qfi_dual(d, s, opts);
}

}  // namespace combqfi
