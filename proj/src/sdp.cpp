#include "combqfi/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <ostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace combqfi::sdp {

std::string to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    default: return "numerical-failure";
  }
}

HermBlock::HermBlock(int cdim) : cdim_(cdim), F0_(Mat::Zero(cdim, cdim)) {}

void HermBlock::add_entry(int var, int r, int c, Complex z) {
  if (r == c && std::abs(z.imag()) > 1e-12 * (1 + std::abs(z.real())))
    throw structural_error("HermBlock: diagonal coefficient must be real");
  entries_.push_back({var, r, c, z});
}

void HermBlock::add_dyad(int var, const Vec& a, const Vec& b) {
  if (a.size() != cdim_ || b.size() != cdim_)
    throw structural_error("HermBlock: dyad size mismatch");
  dyads_.push_back({var, a, b});
}

Block HermBlock::realify() const {
  const int d = cdim_;
  Block blk;
  blk.dim = 2 * d;
  blk.F0.setZero(2 * d, 2 * d);
  Mat H = 0.5 * (F0_ + F0_.adjoint());
  blk.F0.topLeftCorner(d, d) = H.real();
  blk.F0.bottomRightCorner(d, d) = H.real();
  blk.F0.topRightCorner(d, d) = -H.imag();
  blk.F0.bottomLeftCorner(d, d) = H.imag();

  std::vector<VarCoeff> coeffs;
  auto coeff_for = [&](int var) -> VarCoeff& {
    for (auto& c : coeffs)
      if (c.var == var) return c;
    coeffs.push_back(VarCoeff{var, {}, {}});
    return coeffs.back();
  };

  for (const auto& e : entries_) {
    auto& c = coeff_for(e.var);
    double x = e.z.real(), y = e.z.imag();
    int r = e.row, cc = e.col;
    if (r == cc) {
      c.entries.push_back({r, r, x});
      c.entries.push_back({r + d, r + d, x});
      continue;
    }
    c.entries.push_back({r, cc, x});
    c.entries.push_back({cc, r, x});
    c.entries.push_back({r + d, cc + d, x});
    c.entries.push_back({cc + d, r + d, x});
    if (y != 0.0) {
      c.entries.push_back({r, cc + d, -y});
      c.entries.push_back({cc, r + d, y});
      c.entries.push_back({r + d, cc, y});
      c.entries.push_back({cc + d, r, -y});
    }
  }
  for (const auto& dy : dyads_) {
    auto& c = coeff_for(dy.var);
    RVec u1(2 * d), v1(2 * d), u2(2 * d), v2(2 * d);
    u1 << dy.a.real(), dy.a.imag();
    v1 << dy.b.real(), dy.b.imag();
    u2 << -dy.a.imag(), dy.a.real();
    v2 << -dy.b.imag(), dy.b.real();
    c.dyads.push_back({u1, v1});
    c.dyads.push_back({u2, v2});
  }
  blk.coeffs = std::move(coeffs);
  return blk;
}

Mat HermBlock::complex_dual(const RMat& xr) {
  const int d = static_cast<int>(xr.rows()) / 2;
  Mat h = 0.5 * ((xr.topLeftCorner(d, d) + xr.bottomRightCorner(d, d)).cast<Complex>() +
                 Complex(0, 1) * (xr.bottomLeftCorner(d, d) - xr.topRightCorner(d, d))
                                     .cast<Complex>());
  return h;
}

void Problem::dump(std::ostream& os) const {
  os.precision(17);
  os << "sdp-problem\nnvars " << nvars << "\nobjective";
  for (double c : objective) os << " " << c;
  os << "\nequalities " << eqs.size() << "\n";
  for (const auto& e : eqs) {
    os << "  rhs " << e.rhs << " terms";
    for (const auto& t : e.terms) os << " (" << t.var << "," << t.coeff << ")";
    os << "\n";
  }
  os << "blocks " << blocks.size() << "\n";
  for (const auto& b : blocks) {
    os << "block dim " << b.dim << "\nF0\n" << b.F0 << "\n";
    for (const auto& c : b.coeffs) {
      RMat f = RMat::Zero(b.dim, b.dim);
      for (const auto& e : c.entries) f(e.row, e.col) += e.coeff;
      for (const auto& dd : c.dyads)
        f += dd.a * dd.b.transpose() + dd.b * dd.a.transpose();
      os << "F var " << c.var << "\n" << f << "\n";
    }
  }
}

namespace {

RMat dense_coeff(const Block& b, const VarCoeff& c) {
  RMat f = RMat::Zero(b.dim, b.dim);
  for (const auto& e : c.entries) f(e.row, e.col) += e.coeff;
  for (const auto& dd : c.dyads) f += dd.a * dd.b.transpose() + dd.b * dd.a.transpose();
  return f;
}

double trace_with_coeff(const VarCoeff& c, const RMat& X) {
  double v = 0;
  for (const auto& e : c.entries) v += e.coeff * X(e.col, e.row);
  for (const auto& dd : c.dyads) v += 2.0 * dd.a.dot(X * dd.b);
  return v;
}

struct BlockWork {
  // per active var: W-transformed dyad vectors
  std::vector<std::vector<RVec>> wa, wb;
};

double schur_pair(const Block& blk, const RMat& W, const BlockWork& wk, int ia,
                  int ib) {
  const VarCoeff& A = blk.coeffs[ia];
  const VarCoeff& B = blk.coeffs[ib];
  double v = 0;
  for (const auto& e : A.entries)
    for (const auto& f : B.entries)
      v += e.coeff * f.coeff * W(e.col, f.row) * W(f.col, e.row);
  for (const auto& e : A.entries)
    for (size_t l = 0; l < B.dyads.size(); ++l)
      v += e.coeff * (wk.wa[ib][l](e.col) * wk.wb[ib][l](e.row) +
                      wk.wb[ib][l](e.col) * wk.wa[ib][l](e.row));
  for (const auto& f : B.entries)
    for (size_t k = 0; k < A.dyads.size(); ++k)
      v += f.coeff * (wk.wa[ia][k](f.col) * wk.wb[ia][k](f.row) +
                      wk.wb[ia][k](f.col) * wk.wa[ia][k](f.row));
  for (size_t k = 0; k < A.dyads.size(); ++k)
    for (size_t l = 0; l < B.dyads.size(); ++l)
      v += 2.0 * (wk.wb[ia][k].dot(B.dyads[l].a) * wk.wa[ia][k].dot(B.dyads[l].b) +
                  wk.wa[ia][k].dot(B.dyads[l].a) * wk.wb[ia][k].dot(B.dyads[l].b));
  return v;
}

void schur_accumulate(const Problem& p, const std::vector<RMat>& W, RMat& M,
                      bool parallel) {
  for (size_t bi = 0; bi < p.blocks.size(); ++bi) {
    const Block& blk = p.blocks[bi];
    const RMat& Wb = W[bi];
    BlockWork wk;
    const int na = static_cast<int>(blk.coeffs.size());
    wk.wa.resize(na);
    wk.wb.resize(na);
    for (int i = 0; i < na; ++i)
      for (const auto& dd : blk.coeffs[i].dyads) {
        wk.wa[i].push_back(Wb * dd.a);
        wk.wb[i].push_back(Wb * dd.b);
      }
#pragma omp parallel for schedule(dynamic, 8) if (parallel)
    for (int i = 0; i < na; ++i) {
      for (int j = i; j < na; ++j) {
        double v = schur_pair(blk, Wb, wk, i, j);
        int vi = blk.coeffs[i].var, vj = blk.coeffs[j].var;
#pragma omp atomic
        M(vi, vj) += v;
        if (vi != vj) {
#pragma omp atomic
          M(vj, vi) += v;
        }
      }
    }
  }
}

// Largest step alpha with P + alpha dP still PSD (up to the full step 1).
double max_step(const RMat& P, const RMat& dP) {
  Eigen::LLT<RMat> llt(P);
  RMat L = llt.matrixL();
  RMat tmp = L.triangularView<Eigen::Lower>().solve(dP);
  RMat G = L.triangularView<Eigen::Lower>().solve(tmp.transpose());
  Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (G + G.transpose()),
                                         Eigen::EigenvaluesOnly);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin >= -1e-14) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

}  // namespace

RMat schur_matrix_serial(const Problem& p, const std::vector<RMat>& W) {
  RMat M = RMat::Zero(p.nvars, p.nvars);
  for (size_t bi = 0; bi < p.blocks.size(); ++bi) {
    const Block& blk = p.blocks[bi];
    std::vector<RMat> fd;
    for (const auto& c : blk.coeffs) fd.push_back(dense_coeff(blk, c));
    for (size_t j = 0; j < fd.size(); ++j) {
      RMat T = W[bi] * fd[j] * W[bi];
      for (size_t i = 0; i <= j; ++i) {
        double v = (fd[i].array() * T.array()).sum();
        int vi = blk.coeffs[i].var, vj = blk.coeffs[j].var;
        M(vi, vj) += v;
        if (vi != vj) M(vj, vi) += v;
      }
    }
  }
  return M;
}

RMat schur_matrix_omp(const Problem& p, const std::vector<RMat>& W) {
  RMat M = RMat::Zero(p.nvars, p.nvars);
  schur_accumulate(p, W, M, true);
  return M;
}

Solution solve(const Problem& p, const SolveOptions& opts) {
  const int m = p.nvars;
  const int peq = static_cast<int>(p.eqs.size());
  const int nb = static_cast<int>(p.blocks.size());

  Solution sol;
  sol.x = RVec::Zero(m);
  sol.eq_multipliers = RVec::Zero(peq);

  RVec c = Eigen::Map<const RVec>(p.objective.data(), m);
  RVec b(peq);
  for (int i = 0; i < peq; ++i) b(i) = p.eqs[i].rhs;

  auto eq_apply = [&](const RVec& x) {
    RVec r = RVec::Zero(peq);
    for (int i = 0; i < peq; ++i)
      for (const auto& t : p.eqs[i].terms) r(i) += t.coeff * x(t.var);
    return r;
  };
  auto eq_apply_t = [&](const RVec& nu) {
    RVec r = RVec::Zero(m);
    for (int i = 0; i < peq; ++i)
      for (const auto& t : p.eqs[i].terms) r(t.var) += t.coeff * nu(i);
    return r;
  };
  auto adjoint = [&](const std::vector<RMat>& X) {
    RVec r = RVec::Zero(m);
    for (int bi = 0; bi < nb; ++bi)
      for (const auto& cf : p.blocks[bi].coeffs)
        r(cf.var) += trace_with_coeff(cf, X[bi]);
    return r;
  };
  auto lin_value = [&](int bi, const RVec& x) {
    RMat f = p.blocks[bi].F0;
    for (const auto& cf : p.blocks[bi].coeffs) {
      double xv = x(cf.var);
      if (xv == 0.0) continue;
      for (const auto& e : cf.entries) f(e.row, e.col) += xv * e.coeff;
      for (const auto& dd : cf.dyads)
        f += xv * (dd.a * dd.b.transpose() + dd.b * dd.a.transpose());
    }
    return f;
  };

  // initial point
  RVec x = RVec::Zero(m), nu = RVec::Zero(peq);
  std::vector<RMat> Z(nb), X(nb);
  int ntot = 0;
  for (int bi = 0; bi < nb; ++bi) {
    double eta = 1.0 + p.blocks[bi].F0.norm();
    Z[bi] = eta * RMat::Identity(p.blocks[bi].dim, p.blocks[bi].dim);
    X[bi] = Z[bi];
    ntot += p.blocks[bi].dim;
  }
  double scale_obj = 1.0 + c.cwiseAbs().maxCoeff();
  double scale_b = 1.0 + (peq ? b.cwiseAbs().maxCoeff() : 0.0);

  const double tau = 0.98;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    sol.iterations = iter;
    // residuals
    std::vector<RMat> Fx(nb), R(nb);
    double prim_inf = 0;
    for (int bi = 0; bi < nb; ++bi) {
      Fx[bi] = lin_value(bi, x);
      R[bi] = Z[bi] - Fx[bi];
      prim_inf = std::max(prim_inf, R[bi].cwiseAbs().maxCoeff() /
                                        (1.0 + p.blocks[bi].F0.cwiseAbs().maxCoeff()));
    }
    RVec re = eq_apply(x) - b;
    if (peq) prim_inf = std::max(prim_inf, re.cwiseAbs().maxCoeff() / scale_b);
    RVec rd = c - eq_apply_t(nu) - adjoint(X);
    double dual_inf = rd.cwiseAbs().maxCoeff() / scale_obj;

    double mu = 0;
    for (int bi = 0; bi < nb; ++bi) mu += (X[bi].array() * Z[bi].array()).sum();
    double comp = mu;
    mu /= ntot;

    double pobj = c.dot(x);
    double dobj = (peq ? b.dot(nu) : 0.0);
    for (int bi = 0; bi < nb; ++bi)
      dobj -= (p.blocks[bi].F0.array() * X[bi].array()).sum();
    double gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));

    sol.x = x;
    sol.eq_multipliers = nu;
    sol.block_duals = X;
    sol.objective = pobj;
    sol.dual_objective = dobj;
    sol.gap = std::abs(pobj - dobj);
    sol.max_residual = std::max(prim_inf, (peq ? (eq_apply(x) - b).cwiseAbs().maxCoeff() : 0.0));

    if (std::getenv("COMBQFI_SDP_DEBUG"))
      std::fprintf(stderr, "it %3d mu %.3e gap %.3e pinf %.3e dinf %.3e obj %.9e\n",
                   iter, mu, gap, prim_inf, dual_inf, pobj);

    if (prim_inf <= opts.feas_tol && dual_inf <= 100 * opts.feas_tol &&
        (gap <= opts.gap_tol || comp / (1.0 + std::abs(pobj)) <= opts.gap_tol)) {
      sol.status = Status::optimal;
      return sol;
    }

    // infeasibility certificates on the (scaled) dual / primal iterates
    {
      double xnorm = x.norm(), dualnorm = nu.norm();
      for (int bi = 0; bi < nb; ++bi) dualnorm += X[bi].norm();
      if (dualnorm > 1e5) {
        RVec viol = (eq_apply_t(nu) + adjoint(X)) / dualnorm;
        double gain = ((peq ? b.dot(nu) : 0.0));
        for (int bi = 0; bi < nb; ++bi)
          gain -= (p.blocks[bi].F0.array() * X[bi].array()).sum();
        gain /= dualnorm;
        if (viol.cwiseAbs().maxCoeff() < 1e-7 && gain > 1e-7) {
          sol.status = Status::infeasible;
          return sol;
        }
      }
      if (xnorm > 1e5 && c.dot(x) / xnorm < -1e-7) {
        RVec xe = x / xnorm;
        double cone_viol = peq ? eq_apply(xe).cwiseAbs().maxCoeff() : 0.0;
        for (int bi = 0; bi < nb; ++bi) {
          RMat dir = lin_value(bi, xe) - p.blocks[bi].F0;  // pure linear part
          Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (dir + dir.transpose()),
                                                 Eigen::EigenvaluesOnly);
          cone_viol = std::max(cone_viol, -es.eigenvalues().minCoeff());
        }
        if (cone_viol < 1e-7) {
          sol.status = Status::unbounded;
          return sol;
        }
      }
    }

    // NT scaling W per block: W Z W = X
    std::vector<RMat> W(nb), Zi(nb), Wh(nb), Whi(nb), Vq(nb);
    std::vector<RVec> vv(nb);
    bool scale_ok = true;
    for (int bi = 0; bi < nb; ++bi) {
      Eigen::SelfAdjointEigenSolver<RMat> ez(Z[bi]);
      double zmax = ez.eigenvalues().maxCoeff();
      if (zmax <= 0) {
        scale_ok = false;
        break;
      }
      RVec zev = ez.eigenvalues().cwiseMax(1e-14 * zmax);
      RVec zs = zev.cwiseSqrt();
      RMat Zh = ez.eigenvectors() * zs.asDiagonal() * ez.eigenvectors().transpose();
      RMat Zih = ez.eigenvectors() * zs.cwiseInverse().asDiagonal() *
                 ez.eigenvectors().transpose();
      Zi[bi] = ez.eigenvectors() * zev.cwiseInverse().asDiagonal() *
               ez.eigenvectors().transpose();
      RMat S = Zh * X[bi] * Zh;
      Eigen::SelfAdjointEigenSolver<RMat> es(0.5 * (S + S.transpose()));
      double smax = es.eigenvalues().maxCoeff();
      if (smax <= 0) {
        scale_ok = false;
        break;
      }
      RVec sev = es.eigenvalues().cwiseMax(1e-14 * smax);
      RMat Sh = es.eigenvectors() * sev.cwiseSqrt().asDiagonal() *
                es.eigenvectors().transpose();
      W[bi] = Zih * Sh * Zih;
      W[bi] = 0.5 * (W[bi] + W[bi].transpose());
      Eigen::SelfAdjointEigenSolver<RMat> ew(W[bi]);
      RVec wev = ew.eigenvalues().cwiseMax(1e-14 * ew.eigenvalues().maxCoeff());
      Wh[bi] = ew.eigenvectors() * wev.cwiseSqrt().asDiagonal() *
               ew.eigenvectors().transpose();
      Whi[bi] = ew.eigenvectors() * wev.cwiseSqrt().cwiseInverse().asDiagonal() *
                ew.eigenvectors().transpose();
      // scaled variable V = W^{-1/2} X W^{-1/2} = W^{1/2} Z W^{1/2}
      RMat V = Whi[bi] * X[bi] * Whi[bi];
      Eigen::SelfAdjointEigenSolver<RMat> ev(0.5 * (V + V.transpose()));
      Vq[bi] = ev.eigenvectors();
      vv[bi] = ev.eigenvalues().cwiseMax(1e-14 * ev.eigenvalues().maxCoeff());
    }
    if (!scale_ok) { sol.status = Status::numerical_failure; return sol; }

    RMat M = RMat::Zero(m, m);
    schur_accumulate(p, W, M, !opts.use_serial_schur);
    if (opts.use_serial_schur) M = schur_matrix_serial(p, W);

    // regularized factorization of the Schur system
    double reg = 1e-13 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
    Eigen::LLT<RMat> llt;
    for (int attempt = 0; attempt < 6; ++attempt) {
      llt.compute(M + reg * RMat::Identity(m, m));
      if (llt.info() == Eigen::Success) break;
      reg *= 100;
    }
    if (llt.info() != Eigen::Success) {
      sol.status = Status::numerical_failure;
      return sol;
    }

    RMat Et(m, peq);
    if (peq) {
      Et.setZero();
      for (int i = 0; i < peq; ++i)
        for (const auto& t : p.eqs[i].terms) Et(t.var, i) = t.coeff;
    }
    RMat MiEt;
    Eigen::LLT<RMat> slt;
    if (peq) {
      MiEt = llt.solve(Et);
      RMat S = Et.transpose() * MiEt;
      double sreg = 1e-13 * (1.0 + S.diagonal().cwiseAbs().maxCoeff());
      for (int attempt = 0; attempt < 6; ++attempt) {
        slt.compute(S + sreg * RMat::Identity(peq, peq));
        if (slt.info() == Eigen::Success) break;
        sreg *= 100;
      }
      if (slt.info() != Eigen::Success) {
        sol.status = Status::numerical_failure;
        return sol;
      }
    }

    auto solve_dir = [&](const std::vector<RMat>& Dc, RVec& dx, RVec& dnu,
                         std::vector<RMat>& dZ, std::vector<RMat>& dX) {
      RVec g = RVec::Zero(m);
      for (int bi = 0; bi < nb; ++bi) {
        RMat t = Dc[bi] + W[bi] * R[bi] * W[bi];
        for (const auto& cf : p.blocks[bi].coeffs) g(cf.var) += trace_with_coeff(cf, t);
      }
      RVec rhs1 = g - rd;
      if (peq) {
        RVec mirhs = llt.solve(rhs1);
        dnu = slt.solve(-re - Et.transpose() * mirhs);
        dx = llt.solve(rhs1 + Et * dnu);
      } else {
        dnu = RVec();
        dx = llt.solve(rhs1);
      }
      dZ.resize(nb);
      dX.resize(nb);
      for (int bi = 0; bi < nb; ++bi) {
        RMat lz = RMat::Zero(p.blocks[bi].dim, p.blocks[bi].dim);
        for (const auto& cf : p.blocks[bi].coeffs) {
          double xv = dx(cf.var);
          if (xv == 0.0) continue;
          for (const auto& e : cf.entries) lz(e.row, e.col) += xv * e.coeff;
          for (const auto& dd : cf.dyads)
            lz += xv * (dd.a * dd.b.transpose() + dd.b * dd.a.transpose());
        }
        dZ[bi] = lz - R[bi];
        dX[bi] = Dc[bi] - W[bi] * dZ[bi] * W[bi];
        dX[bi] = 0.5 * (dX[bi] + dX[bi].transpose());
        dZ[bi] = 0.5 * (dZ[bi] + dZ[bi].transpose());
      }
    };

    // predictor
    std::vector<RMat> Dc(nb);
    for (int bi = 0; bi < nb; ++bi) Dc[bi] = -X[bi];
    RVec dx_a, dnu_a;
    std::vector<RMat> dZ_a, dX_a;
    solve_dir(Dc, dx_a, dnu_a, dZ_a, dX_a);

    double ap_a = 1.0, ad_a = 1.0;
    for (int bi = 0; bi < nb; ++bi) {
      ap_a = std::min(ap_a, tau * max_step(Z[bi], dZ_a[bi]));
      ad_a = std::min(ad_a, tau * max_step(X[bi], dX_a[bi]));
    }
    double mu_aff = 0;
    for (int bi = 0; bi < nb; ++bi)
      mu_aff += ((X[bi] + ad_a * dX_a[bi]).array() *
                 (Z[bi] + ap_a * dZ_a[bi]).array())
                    .sum();
    mu_aff /= ntot;
    double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 1e-10, 1.0);

    // corrected direction: in the scaled space solve the Lyapunov-form
    // complementarity equation sym(V (dXh + dZh)) = sigma mu I - V^2 - corr
    auto make_dc = [&](bool with_corr) {
      for (int bi = 0; bi < nb; ++bi) {
        const int nd = p.blocks[bi].dim;
        RMat rh = RMat::Zero(nd, nd);
        if (with_corr) {
          RMat prod = (Whi[bi] * dX_a[bi] * Whi[bi]) * (Wh[bi] * dZ_a[bi] * Wh[bi]);
          rh = -0.5 * (prod + prod.transpose());
        }
        rh = Vq[bi].transpose() * rh * Vq[bi];
        for (int i = 0; i < nd; ++i) rh(i, i) += sigma * mu - vv[bi](i) * vv[bi](i);
        for (int i = 0; i < nd; ++i)
          for (int j = 0; j < nd; ++j) rh(i, j) *= 2.0 / (vv[bi](i) + vv[bi](j));
        Dc[bi] = Wh[bi] * (Vq[bi] * rh * Vq[bi].transpose()) * Wh[bi];
        Dc[bi] = 0.5 * (Dc[bi] + Dc[bi].transpose());
      }
    };
    make_dc(true);
    RVec dx, dnu;
    std::vector<RMat> dZ, dX;
    solve_dir(Dc, dx, dnu, dZ, dX);

    double ap = 1.0, ad = 1.0;
    for (int bi = 0; bi < nb; ++bi) {
      ap = std::min(ap, tau * max_step(Z[bi], dZ[bi]));
      ad = std::min(ad, tau * max_step(X[bi], dX[bi]));
    }
    if (std::min(ap, ad) < 0.2 * std::min(ap_a, ad_a)) {
      // second-order term hurt; retry with plain centering
      make_dc(false);
      solve_dir(Dc, dx, dnu, dZ, dX);
      ap = ad = 1.0;
      for (int bi = 0; bi < nb; ++bi) {
        ap = std::min(ap, tau * max_step(Z[bi], dZ[bi]));
        ad = std::min(ad, tau * max_step(X[bi], dX[bi]));
      }
    }

    // the eigenvalue-based bound can overshoot on ill-conditioned blocks;
    // shrink until the stepped matrices are genuinely positive definite
    auto ensure_pd = [&](double& a, const std::vector<RMat>& base,
                         const std::vector<RMat>& dir) {
      for (int tries = 0; tries < 60; ++tries) {
        bool ok = true;
        for (int bi = 0; bi < nb && ok; ++bi) {
          Eigen::LLT<RMat> chk(RMat(base[bi] + a * dir[bi]));
          if (chk.info() != Eigen::Success) ok = false;
        }
        if (ok) return true;
        a *= 0.8;
      }
      return false;
    };
    if (!ensure_pd(ap, Z, dZ) || !ensure_pd(ad, X, dX)) {
      sol.status = Status::numerical_failure;
      return sol;
    }

    if (std::getenv("COMBQFI_SDP_DEBUG"))
      std::fprintf(stderr, "    aff (%.3e, %.3e) sigma %.3e step (%.3e, %.3e) |dx| %.3e\n",
                   ap_a, ad_a, sigma, ap, ad, dx.norm());

    x += ap * dx;
    if (peq) nu += ad * dnu;
    for (int bi = 0; bi < nb; ++bi) {
      Z[bi] += ap * dZ[bi];
      X[bi] += ad * dX[bi];
    }
  }

  sol.status = Status::numerical_failure;
  return sol;
}

}  // namespace combqfi::sdp
