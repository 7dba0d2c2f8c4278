#include "combqfi/variational.hpp"

#include <cmath>
#include <random>

namespace combqfi {

namespace {

Mat kron2(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat rx(double phi) {
  Mat m(2, 2);
  m << std::cos(phi / 2), Complex(0, -std::sin(phi / 2)),
      Complex(0, -std::sin(phi / 2)), std::cos(phi / 2);
  return m;
}

Mat rzz(double phi) {
  Mat m = Mat::Zero(4, 4);
  const Complex a = std::exp(Complex(0, -phi / 2)), b = std::exp(Complex(0, phi / 2));
  m(0, 0) = a;
  m(1, 1) = b;
  m(2, 2) = b;
  m(3, 3) = a;
  return m;
}

Mat env_initial_state(Interaction kind) {
  if (kind == Interaction::bitflip) return 0.5 * Mat::Identity(2, 2);
  Mat m = Mat::Zero(2, 2);
  m(0, 0) = 1;
  return m;
}

/// Trace the environment (slowest qubit) of an 8x8 state on E (x) S (x) aux.
Mat trace_env(const Mat& rho) {
  return rho.block(0, 0, 4, 4) + rho.block(4, 4, 4, 4);
}

}  // namespace

Mat layer_unitary(const Eigen::Ref<const RVec>& phi5) {
  if (phi5.size() != 5) throw structural_error("layer needs exactly 5 angles");
  const Mat id = Mat::Identity(2, 2);
  Mat u = kron2(rx(phi5(0)), id);
  u = kron2(id, rx(phi5(1))) * u;
  u = rzz(phi5(2)) * u;
  u = kron2(rx(phi5(3)), id) * u;
  u = kron2(id, rx(phi5(4))) * u;
  return u;
}

OutcomeDistribution output_distribution(const CollisionParams& task, double omega,
                                        const AnsatzParams& params) {
  if (task.scenario != Scenario::nm_control && task.scenario != Scenario::m_control)
    throw structural_error("variational probe needs a scenario with control");
  if (params.phi.size() != 5 * (task.N + 1))
    throw structural_error("ansatz needs 5(N+1) angles");
  const bool markovian = task.scenario == Scenario::m_control;
  const double t = task.t_tot / task.N;
  const Mat id2 = Mat::Identity(2, 2);
  const Mat env0 = env_initial_state(task.interaction);
  const Mat step = kron2(step_unitary(task.interaction, omega, t, t, task.g), id2);
  const Mat dstep =
      kron2(step_unitary_derivative(task.interaction, omega, t, t, task.g), id2);

  // State on E (x) S (x) aux; the derivative is propagated alongside.
  Mat sa0 = Mat::Zero(4, 4);
  sa0(0, 0) = 1;
  Mat rho = kron2(env0, sa0);
  Mat drho = Mat::Zero(8, 8);
  for (int k = 0; k <= task.N; ++k) {
    const Mat layer = kron2(id2, layer_unitary(params.phi.segment(5 * k, 5)));
    rho = layer * rho * layer.adjoint();
    drho = layer * drho * layer.adjoint();
    if (k == task.N) break;
    drho = step * drho * step.adjoint() + dstep * rho * step.adjoint() +
           step * rho * dstep.adjoint();
    rho = step * rho * step.adjoint();
    if (markovian && k + 1 < task.N) {
      rho = kron2(env0, trace_env(rho));
      drho = kron2(env0, trace_env(drho));
    }
  }
  const Mat sa = trace_env(rho), dsa = trace_env(drho);
  OutcomeDistribution out;
  out.p = RVec(4);
  out.dp = RVec(4);
  for (int m = 0; m < 4; ++m) {
    out.p(m) = sa(m, m).real();
    out.dp(m) = dsa(m, m).real();
  }
  return out;
}

double classical_fisher(const OutcomeDistribution& d) {
  double f = 0;
  for (int m = 0; m < d.p.size(); ++m)
    if (d.p(m) > 1e-12) f += d.dp(m) * d.dp(m) / d.p(m);
  return f;
}

OptimizeResult optimize_probe(const CollisionParams& task, double omega,
                              const OptimizeConfig& cfg) {
  const int np = 5 * (task.N + 1);
  auto objective = [&](const RVec& phi) {
    return classical_fisher(output_distribution(task, omega, AnsatzParams{phi}));
  };
  auto gradient = [&](const RVec& phi) {
    RVec g(np);
    RVec probe = phi;
    for (int i = 0; i < np; ++i) {
      probe(i) = phi(i) + cfg.fd_step;
      const double fp = objective(probe);
      probe(i) = phi(i) - cfg.fd_step;
      g(i) = (fp - objective(probe)) / (2 * cfg.fd_step);
      probe(i) = phi(i);
    }
    return g;
  };

  OptimizeResult best;
  std::vector<OptimizeResult> results(cfg.restarts);
#pragma omp parallel for schedule(dynamic)
  for (int r = 0; r < cfg.restarts; ++r) {
    std::mt19937_64 rng(cfg.seed * 1000003 + static_cast<std::uint64_t>(r));
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    RVec phi(np);
    for (int i = 0; i < np; ++i) phi(i) = angle(rng);
    OptimizeResult res;
    double f = objective(phi);
    res.trace.push_back(f);
    double alpha = 1.0;
    for (int it = 0; it < cfg.max_iters; ++it) {
      const RVec g = gradient(phi);
      const double gnorm2 = g.squaredNorm();
      if (gnorm2 < 1e-16) {
        res.converged = true;
        break;
      }
      alpha = std::min(alpha * 2, 1.0);
      bool accepted = false;
      for (int bt = 0; bt < 40; ++bt) {
        const double fn = objective(phi + alpha * g);
        if (fn >= f + 1e-4 * alpha * gnorm2) {
          phi += alpha * g;
          f = fn;
          res.trace.push_back(f);
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        res.converged = true;
        break;
      }
    }
    res.best = AnsatzParams{phi};
    res.fisher = f;
    results[r] = std::move(res);
  }
  for (const auto& res : results)
    if (res.fisher > best.fisher ||
        (best.trace.empty() && res.fisher >= best.fisher))
      best = res;
  return best;
}

}  // namespace combqfi
