#include "combqfi/collision.hpp"

#include <cmath>

namespace combqfi {

namespace {

Mat kron2(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat free_phase(double omega, double t) {
  Mat f = Mat::Identity(2, 2);
  f(1, 1) = std::exp(Complex(0, -omega * t));
  return kron2(Mat::Identity(2, 2), f);
}

/// exp(-i g tau P) for an involution P (P^2 = 1).
Mat involution_exp(const Mat& p, double gtau) {
  return std::cos(gtau) * Mat::Identity(p.rows(), p.cols()) -
         Complex(0, std::sin(gtau)) * p;
}

Mat swap_matrix() {
  Mat s = Mat::Zero(4, 4);
  s(0, 0) = s(3, 3) = 1;
  s(1, 2) = s(2, 1) = 1;
  return s;
}

// Environment-controlled NOT on the system, basis |e s>.
Mat cnot_env_control() {
  Mat c = Mat::Identity(4, 4);
  c(2, 2) = c(3, 3) = 0;
  c(2, 3) = c(3, 2) = 1;
  return c;
}

// System-controlled NOT on the environment.
Mat cnot_sys_control() {
  Mat c = Mat::Identity(4, 4);
  c(1, 1) = c(3, 3) = 0;
  c(1, 3) = c(3, 1) = 1;
  return c;
}

Mat xx_matrix() {
  Mat x = Mat::Zero(2, 2);
  x(0, 1) = x(1, 0) = 1;
  return kron2(x, x);
}

Mat hadamard_env() {
  Mat h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  return kron2(h, Mat::Identity(2, 2));
}

/// Embed a two-qubit operator acting on (environment, system k) into the
/// N+1-qubit space ordered E, S_1, ..., S_N (big-endian, E slowest).
Mat embed_pair(const Mat& u, int N, int k) {
  const int dim = 1 << (N + 1);
  const int ebit = N;
  const int sbit = N - k;
  const int mask = (1 << ebit) | (1 << sbit);
  Mat out = Mat::Zero(dim, dim);
  for (int c = 0; c < dim; ++c) {
    const int ce = (c >> ebit) & 1;
    const int cs = (c >> sbit) & 1;
    const int rest = c & ~mask;
    for (int re = 0; re < 2; ++re)
      for (int rs = 0; rs < 2; ++rs)
        out(rest | (re << ebit) | (rs << sbit), c) = u(re * 2 + rs, ce * 2 + cs);
  }
  return out;
}

struct StepData {
  Mat u;   // single-step unitary on E (x) S
  Mat du;  // its omega-derivative
  std::vector<int> env_inits;
  double init_weight = 1.0;
};

StepData make_step(const CollisionParams& p, double omega) {
  const double t = p.t_tot / p.N;
  StepData s;
  s.u = step_unitary(p.interaction, omega, t, t, p.g);
  s.du = step_unitary_derivative(p.interaction, omega, t, t, p.g);
  if (p.interaction == Interaction::bitflip) {
    s.env_inits = {0, 1};
    s.init_weight = 1.0 / std::sqrt(2.0);
  } else {
    s.env_inits = {0};
  }
  return s;
}

/// Kraus operators <i|U|b> of one step together with their derivatives,
/// weighted so that sum_l K_l^dag K_l = 1.
struct KrausSet {
  std::vector<Mat> k, dk;
};

KrausSet step_kraus(const StepData& s) {
  KrausSet ks;
  for (int b : s.env_inits)
    for (int i = 0; i < 2; ++i) {
      ks.k.push_back(s.init_weight * s.u.block(2 * i, 2 * b, 2, 2));
      ks.dk.push_back(s.init_weight * s.du.block(2 * i, 2 * b, 2, 2));
    }
  return ks;
}

/// Choi vector of a 2x2 operator block on one (input, output) port pair:
/// v[mi * 2 + mo] = K(mo, mi).
Vec choi_vec(const Mat& k) {
  Vec v(4);
  for (int mi = 0; mi < 2; ++mi)
    for (int mo = 0; mo < 2; ++mo) v(mi * 2 + mo) = k(mo, mi);
  return v;
}

Vec kron_vec(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (int i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// N-tooth comb vector from the full-register matrix element
/// M(s', s) = U_tot((i << N) | s', (b << N) | s): port index m1..m2N
/// (big-endian) with odd ports forming s and even ports forming s'.
Vec comb_vec_from_register(const Mat& utot, int N, int env_out, int env_in) {
  const int D = 1 << (2 * N);
  Vec v(D);
  for (int f = 0; f < D; ++f) {
    int s_in = 0, s_out = 0;
    for (int k = 1; k <= N; ++k) {
      s_in |= ((f >> (2 * N - (2 * k - 1))) & 1) << (N - k);
      s_out |= ((f >> (2 * N - 2 * k)) & 1) << (N - k);
    }
    v(f) = utot((env_out << N) | s_out, (env_in << N) | s_in);
  }
  return v;
}

void push_vector(EnsembleDecomposition& d, const std::vector<SpaceLabel>& spaces,
                 const Vec& v, const Vec& dv) {
  d.vectors.push_back(LabeledVector(spaces, v));
  d.derivatives.push_back(LabeledVector(spaces, dv));
}

EnsembleDecomposition build_nm_control(const CollisionParams& p, double omega,
                                       const std::vector<SpaceLabel>& spaces) {
  const StepData s = make_step(p, omega);
  const int N = p.N;
  std::vector<Mat> steps(N), dsteps(N);
  for (int k = 1; k <= N; ++k) {
    steps[k - 1] = embed_pair(s.u, N, k);
    dsteps[k - 1] = embed_pair(s.du, N, k);
  }
  const int dim = 1 << (N + 1);
  // prefix[k] = U_k ... U_1 applied so far; utot and its derivative by the
  // product rule over the N steps.
  Mat utot = Mat::Identity(dim, dim);
  Mat dutot = Mat::Zero(dim, dim);
  for (int k = 0; k < N; ++k) {
    dutot = steps[k] * dutot + dsteps[k] * utot;
    utot = steps[k] * utot;
  }
  EnsembleDecomposition d;
  for (int b : s.env_inits)
    for (int i = 0; i < 2; ++i)
      push_vector(d, spaces,
                  s.init_weight * comb_vec_from_register(utot, N, i, b),
                  s.init_weight * comb_vec_from_register(dutot, N, i, b));
  d.rank = d.q();
  return d;
}

EnsembleDecomposition build_nm_free(const CollisionParams& p, double omega,
                                    const std::vector<SpaceLabel>& spaces) {
  const StepData s = make_step(p, omega);
  Mat upow = Mat::Identity(4, 4);
  Mat dupow = Mat::Zero(4, 4);
  for (int k = 0; k < p.N; ++k) {
    dupow = s.u * dupow + s.du * upow;
    upow = s.u * upow;
  }
  EnsembleDecomposition d;
  for (int b : s.env_inits)
    for (int i = 0; i < 2; ++i)
      push_vector(d, spaces,
                  s.init_weight * choi_vec(upow.block(2 * i, 2 * b, 2, 2)),
                  s.init_weight * choi_vec(dupow.block(2 * i, 2 * b, 2, 2)));
  d.rank = d.q();
  return d;
}

EnsembleDecomposition build_m_control(const CollisionParams& p, double omega,
                                      const std::vector<SpaceLabel>& spaces) {
  const KrausSet ks = step_kraus(make_step(p, omega));
  const int L = static_cast<int>(ks.k.size());
  std::vector<Vec> v(L), dv(L);
  for (int l = 0; l < L; ++l) {
    v[l] = choi_vec(ks.k[l]);
    dv[l] = choi_vec(ks.dk[l]);
  }
  EnsembleDecomposition d;
  std::vector<int> idx(p.N, 0);
  while (true) {
    Vec c = Vec::Ones(1), dc = Vec::Zero(1);
    for (int k = 0; k < p.N; ++k) {
      dc = kron_vec(dc, v[idx[k]]) + kron_vec(c, dv[idx[k]]);
      c = kron_vec(c, v[idx[k]]);
    }
    push_vector(d, spaces, c, dc);
    int k = p.N - 1;
    while (k >= 0 && ++idx[k] == L) idx[k--] = 0;
    if (k < 0) break;
  }
  d.rank = d.q();
  return d;
}

EnsembleDecomposition build_m_free(const CollisionParams& p, double omega,
                                   const std::vector<SpaceLabel>& spaces) {
  const KrausSet ks = step_kraus(make_step(p, omega));
  const int L = static_cast<int>(ks.k.size());
  EnsembleDecomposition d;
  std::vector<int> idx(p.N, 0);
  while (true) {
    // Step 1 acts first, so its Kraus factor sits rightmost in the product.
    Mat prod = Mat::Identity(2, 2), dprod = Mat::Zero(2, 2);
    for (int k = 0; k < p.N; ++k) {
      dprod = ks.k[idx[k]] * dprod + ks.dk[idx[k]] * prod;
      prod = ks.k[idx[k]] * prod;
    }
    push_vector(d, spaces, choi_vec(prod), choi_vec(dprod));
    int k = p.N - 1;
    while (k >= 0 && ++idx[k] == L) idx[k--] = 0;
    if (k < 0) break;
  }
  d.rank = d.q();
  return d;
}

}  // namespace

Mat step_unitary(Interaction kind, double omega, double t, double tau, double g) {
  const Mat f = free_phase(omega, t);
  switch (kind) {
    case Interaction::partial_swap:
      return involution_exp(swap_matrix(), g * tau) * f;
    case Interaction::env_cnot: {
      const Mat b = hadamard_env();
      return b.adjoint() * involution_exp(cnot_env_control(), g * tau) * f * b;
    }
    case Interaction::sys_cnot:
      return involution_exp(cnot_sys_control(), g * tau) * f;
    case Interaction::bitflip:
      return involution_exp(xx_matrix(), g * tau) * f;
  }
  throw structural_error("unknown interaction");
}

Mat step_unitary_derivative(Interaction kind, double omega, double t, double tau,
                            double g) {
  // The free phase generator |1><1| on the system commutes with everything
  // acting on the environment, so dU/domega = U (1 (x) -i t |1><1|).
  Mat gen = Mat::Zero(2, 2);
  gen(1, 1) = Complex(0, -t);
  return step_unitary(kind, omega, t, tau, g) * kron2(Mat::Identity(2, 2), gen);
}

CombFamily build_comb_family(const CollisionParams& p) {
  if (p.N < 1) throw structural_error("collision model needs at least one step");
  if (p.t_tot < 0) throw structural_error("negative total time");
  const bool control =
      p.scenario == Scenario::nm_control || p.scenario == Scenario::m_control;
  CombFamily fam;
  fam.structure = ToothStructure::qubits(control ? p.N : 1);
  fam.domain = {M_PI / 16, M_PI / 3};
  const std::vector<SpaceLabel> spaces = fam.structure.all_spaces();
  fam.evaluate = [p, spaces, structure = fam.structure](double omega) {
    EnsembleDecomposition d;
    switch (p.scenario) {
      case Scenario::nm_control: d = build_nm_control(p, omega, spaces); break;
      case Scenario::nm_free: d = build_nm_free(p, omega, spaces); break;
      case Scenario::m_control: d = build_m_control(p, omega, spaces); break;
      case Scenario::m_free: d = build_m_free(p, omega, spaces); break;
    }
    Mat c = Mat::Zero(d.vectors[0].dim(), d.vectors[0].dim());
    for (const auto& v : d.vectors) c += v.v * v.v.adjoint();
    Comb comb{LabeledOperator(spaces, std::move(c)), structure};
    return std::make_pair(std::move(comb), std::move(d));
  };
  return fam;
}

const char* to_string(Interaction i) {
  switch (i) {
    case Interaction::partial_swap: return "swap";
    case Interaction::env_cnot: return "env-cnot";
    case Interaction::sys_cnot: return "sys-cnot";
    case Interaction::bitflip: return "bitflip";
  }
  return "?";
}

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::nm_control: return "nm-control";
    case Scenario::nm_free: return "nm-free";
    case Scenario::m_control: return "m-control";
    case Scenario::m_free: return "m-free";
  }
  return "?";
}

bool interaction_from_string(const std::string& s, Interaction& out) {
  for (Interaction i : {Interaction::partial_swap, Interaction::env_cnot,
                        Interaction::sys_cnot, Interaction::bitflip})
    if (s == to_string(i)) {
      out = i;
      return true;
    }
  return false;
}

bool scenario_from_string(const std::string& s, Scenario& out) {
  for (Scenario sc : {Scenario::nm_control, Scenario::nm_free,
                      Scenario::m_control, Scenario::m_free})
    if (s == to_string(sc)) {
      out = sc;
      return true;
    }
  return false;
}

}  // namespace combqfi
