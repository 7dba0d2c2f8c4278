#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "combqfi/comb.hpp"

using namespace combqfi;

namespace {

// Choi operator of a single-qubit unitary channel on labels (in, out):
// component (m_in m_out) = U(m_out, m_in).
LabeledOperator choi_of_unitary(const Mat& u, const std::string& in,
                                const std::string& out) {
  Vec c(4);
  for (int mi = 0; mi < 2; ++mi)
    for (int mo = 0; mo < 2; ++mo) c(2 * mi + mo) = u(mo, mi);
  return LabeledOperator({qubit(in), qubit(out)}, c * c.adjoint());
}

Mat pauli_x() { return (Mat(2, 2) << 0, 1, 1, 0).finished(); }
Mat pauli_z() { return (Mat(2, 2) << 1, 0, 0, -1).finished(); }

LabeledVector phase_choi_vector(double omega, double t) {
  Vec c = Vec::Zero(4);
  c(0) = 1;
  c(3) = std::exp(Complex(0, -omega * t));
  return LabeledVector(qubit_spaces(2), c);
}

LabeledVector phase_choi_derivative(double omega, double t) {
  Vec c = Vec::Zero(4);
  c(3) = Complex(0, -t) * std::exp(Complex(0, -omega * t));
  return LabeledVector(qubit_spaces(2), c);
}

EnsembleDecomposition phase_ensemble(double omega, double t) {
  EnsembleDecomposition d;
  d.vectors.push_back(phase_choi_vector(omega, t));
  d.derivatives.push_back(phase_choi_derivative(omega, t));
  d.rank = 1;
  return d;
}

Mat random_hermitian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
  return 0.5 * (a + a.adjoint());
}

}  // namespace

TEST_CASE("validate_comb base cases") {
  auto s = ToothStructure::qubits(1);
  auto c = choi_of_unitary(Mat::Identity(2, 2), "1", "2");
  auto rep = validate_comb(c, s, 1e-8);
  CHECK(rep.passed);
  CHECK(rep.max_residual < 1e-12);

  LabeledOperator half = c;
  half.m *= 0.5;
  auto rep2 = validate_comb(half, s, 1e-8);
  CHECK(!rep2.passed);
  CHECK(rep2.max_residual == doctest::Approx(0.5));
}

TEST_CASE("link_product identity channel acts as identity") {
  std::mt19937_64 rng(1);
  Mat r = random_hermitian(2, rng);
  r = r * r;  // PSD
  r /= r.trace().real();
  auto rho = LabeledOperator({qubit("1")}, r);
  auto c = choi_of_unitary(Mat::Identity(2, 2), "1", "2");
  auto out = link_product(c, rho);
  REQUIRE(out.spaces.size() == 1);
  CHECK(out.spaces[0].id == "2");
  CHECK((out.m - r).norm() < 1e-12);
}

TEST_CASE("link_product composes channels") {
  auto cx = choi_of_unitary(pauli_x(), "1", "m");
  auto cz = choi_of_unitary(pauli_z(), "m", "2");
  auto composed = link_product(cx, cz);
  auto expect = choi_of_unitary(pauli_z() * pauli_x(), "1", "2");
  auto aligned = permute_systems(composed, {"1", "2"});
  CHECK((aligned.m - expect.m).norm() < 1e-10);
}

TEST_CASE("link_product associativity on a three-link chain") {
  std::mt19937_64 rng(2);
  auto mk = [&](const std::string& a, const std::string& b) {
    Mat h = random_hermitian(4, rng);
    return LabeledOperator({qubit(a), qubit(b)}, h);
  };
  auto e = mk("a", "b"), f = mk("b", "c"), g = mk("c", "d");
  auto left = link_product(link_product(e, f), g);
  auto right = link_product(e, link_product(f, g));
  right = permute_systems(right, {left.spaces[0].id, left.spaces[1].id});
  CHECK((left.m - right.m).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("link_product of comb and probe state is a unit-trace state") {
  // identity channel comb linked with a pure input probe
  auto c = choi_of_unitary(Mat::Identity(2, 2), "1", "2");
  Vec plus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  auto probe = LabeledOperator({qubit("1")}, plus * plus.adjoint());
  auto out = link_product(c, probe);
  CHECK(out.is_psd());
  CHECK(out.m.trace().real() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ensemble_decomposition") {
  auto s = ToothStructure::qubits(1);
  auto v = phase_choi_vector(0.3, 1.7);
  Comb pure{LabeledOperator(qubit_spaces(2), v.v * v.v.adjoint()), s};
  auto d = ensemble_decomposition(pure);
  REQUIRE(d.q() == 1);
  // equal up to global phase
  Complex ip = d.vectors[0].v.dot(v.v);
  CHECK(std::abs(std::abs(ip) - v.v.squaredNorm()) < 1e-9);

  ToothStructure s1;
  s1.teeth.emplace_back(SpaceLabel{"x", 1}, qubit("y"));
  Comb eye{LabeledOperator({SpaceLabel{"x", 1}, qubit("y")}, Mat::Identity(2, 2)), s1};
  auto di = ensemble_decomposition(eye);
  REQUIRE(di.q() == 2);
  CHECK(di.vectors[0].v.squaredNorm() == doctest::Approx(1.0));
  CHECK(di.vectors[1].v.squaredNorm() == doctest::Approx(1.0));

  std::mt19937_64 rng(9);
  for (int rep = 0; rep < 5; ++rep) {
    Mat h = random_hermitian(4, rng);
    Comb rc{LabeledOperator(qubit_spaces(2), h * h), ToothStructure::qubits(1)};
    auto dd = ensemble_decomposition(rc);
    Mat sum = Mat::Zero(4, 4);
    for (const auto& w : dd.vectors) sum += w.v * w.v.adjoint();
    CHECK((sum - rc.op.m).cwiseAbs().maxCoeff() < 1e-10);
  }

  Comb neg{LabeledOperator(qubit_spaces(2), -Mat::Identity(4, 4)),
           ToothStructure::qubits(1)};
  CHECK_THROWS_AS(ensemble_decomposition(neg), validation_error);
}

TEST_CASE("performance_operator on the phase channel") {
  double omega = 0.4, t = 1.3;
  auto s = ToothStructure::qubits(1);
  auto d = phase_ensemble(omega, t);

  GaugeMatrix h0{Mat::Zero(1, 1)};
  auto om0 = performance_operator(d, h0, s);
  Mat expect = Mat::Zero(4, 4);
  expect(3, 3) = 4 * t * t;
  CHECK((om0.op.m - expect).cwiseAbs().maxCoeff() < 1e-12);

  // zero derivatives, h = 0
  auto dz = d;
  dz.derivatives[0].v.setZero();
  CHECK(performance_operator(dz, h0, s).op.m.norm() == doctest::Approx(0.0));

  // scalar gauge h = -t/2 gives tr_2 Omega = t^2 I
  GaugeMatrix hg{Mat::Constant(1, 1, -t / 2)};
  auto omg = performance_operator(d, hg, s);
  auto tr2 = partial_trace(omg.op, {"2"});
  CHECK((tr2.m - t * t * Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  Mat wrong = Mat::Zero(2, 2);
  CHECK_THROWS_AS(performance_operator(d, GaugeMatrix{wrong}, s), structural_error);
}

TEST_CASE("performance_operator is Hermitian with PSD last-output trace") {
  // The operator itself is generally indefinite (it is a partial transpose of
  // a PSD sum); Hermiticity and positivity of the trace over the last output
  // hold for every gauge.
  std::mt19937_64 rng(31);
  auto s = ToothStructure::qubits(2);
  for (int rep = 0; rep < 100; ++rep) {
    Mat h = random_hermitian(3, rng);
    EnsembleDecomposition d;
    std::normal_distribution<double> g;
    for (int i = 0; i < 3; ++i) {
      Vec v(16), w(16);
      for (int k = 0; k < 16; ++k) {
        v(k) = Complex(g(rng), g(rng));
        w(k) = Complex(g(rng), g(rng));
      }
      d.vectors.emplace_back(qubit_spaces(4), v);
      d.derivatives.emplace_back(qubit_spaces(4), w);
    }
    d.rank = 3;
    auto om = performance_operator(d, GaugeMatrix{h}, s);
    CHECK(om.op.is_hermitian());
    CHECK(partial_trace(om.op, {"4"}).is_psd(1e-9, 1e-9));
  }
}

TEST_CASE("gauged derivative vectors are linear in h") {
  std::mt19937_64 rng(33);
  auto d = phase_ensemble(0.2, 2.0);
  // extend to q = 2 with a second random vector pair
  std::normal_distribution<double> g;
  Vec v(4), w(4);
  for (int k = 0; k < 4; ++k) {
    v(k) = Complex(g(rng), g(rng));
    w(k) = Complex(g(rng), g(rng));
  }
  d.vectors.emplace_back(qubit_spaces(2), v);
  d.derivatives.emplace_back(qubit_spaces(2), w);

  Mat h1 = random_hermitian(2, rng), h2 = random_hermitian(2, rng);
  auto a = gauged_derivatives(d, GaugeMatrix{h1 + h2});
  auto b = gauged_derivatives(d, GaugeMatrix{Mat::Zero(2, 2)});
  auto c1 = gauged_derivatives(d, GaugeMatrix{h1});
  auto c2 = gauged_derivatives(d, GaugeMatrix{h2});
  for (int i = 0; i < 2; ++i)
    CHECK((a[i].v + b[i].v - c1[i].v - c2[i].v).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("state_qfi") {
  double omega = 0.9, t = 1.7;
  Vec psi(2), dpsi(2);
  psi << 1 / std::sqrt(2.0), std::exp(Complex(0, -omega * t)) / std::sqrt(2.0);
  dpsi << 0, Complex(0, -t) * std::exp(Complex(0, -omega * t)) / std::sqrt(2.0);
  Mat rho = psi * psi.adjoint();
  Mat drho = dpsi * psi.adjoint() + psi * dpsi.adjoint();
  double J = state_qfi(LabeledOperator({qubit("s")}, rho),
                       LabeledOperator({qubit("s")}, drho));
  CHECK(J == doctest::Approx(t * t).epsilon(1e-9));

  // pure-state identity J = 4(<dpsi|dpsi> - |<psi|dpsi>|^2)
  double Jpure = 4 * (dpsi.squaredNorm() - std::norm(psi.dot(dpsi)));
  CHECK(J == doctest::Approx(Jpure).epsilon(1e-9));

  CHECK(state_qfi(LabeledOperator({qubit("s")}, rho),
                  LabeledOperator({qubit("s")}, Mat::Zero(2, 2))) ==
        doctest::Approx(0.0));

  // classical coin (p, 1-p)
  double p = 0.3, pdot = 0.41;
  Mat diag = Mat::Zero(2, 2), ddiag = Mat::Zero(2, 2);
  diag(0, 0) = p;
  diag(1, 1) = 1 - p;
  ddiag(0, 0) = pdot;
  ddiag(1, 1) = -pdot;
  double Jc = state_qfi(LabeledOperator({qubit("s")}, diag),
                        LabeledOperator({qubit("s")}, ddiag));
  CHECK(Jc == doctest::Approx(pdot * pdot / (p * (1 - p))).epsilon(1e-9));

  CHECK_THROWS_AS(state_qfi(LabeledOperator({qubit("s")}, 2 * rho),
                            LabeledOperator({qubit("s")}, drho)),
                  validation_error);
}

TEST_CASE("state_qfi of random pure families matches the overlap formula") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> g;
  for (int rep = 0; rep < 20; ++rep) {
    Vec psi(4), dpsi(4);
    for (int k = 0; k < 4; ++k) {
      psi(k) = Complex(g(rng), g(rng));
      dpsi(k) = Complex(g(rng), g(rng));
    }
    psi.normalize();
    // keep norm constant to first order: remove the real part of <psi|dpsi>
    dpsi -= psi * psi.dot(dpsi).real();
    Mat rho = psi * psi.adjoint();
    Mat drho = dpsi * psi.adjoint() + psi * dpsi.adjoint();
    double J = state_qfi(LabeledOperator(qubit_spaces(2), rho),
                         LabeledOperator(qubit_spaces(2), drho));
    double Jpure = 4 * (dpsi.squaredNorm() - std::norm(psi.dot(dpsi)));
    CHECK(J == doctest::Approx(Jpure).epsilon(1e-8));
  }
}

TEST_CASE("cramer_rao_bound") {
  CHECK(cramer_rao_bound(4.0, 1) == doctest::Approx(0.25));
  double t = 3.0;
  CHECK(cramer_rao_bound(t * t, 100) == doctest::Approx(1.0 / (100 * t * t)));
  CHECK(cramer_rao_bound(0.0, 5) == kUnboundedVariance);
  CHECK_THROWS_AS(cramer_rao_bound(1.0, 0), structural_error);
}

TEST_CASE("finite_difference_derivatives") {
  CombFamily fam;
  fam.structure = ToothStructure::qubits(1);
  fam.differentiability = CombFamily::Differentiability::finite_difference;
  fam.domain = {0.1, 1.0};
  double t = 1.3;
  fam.evaluate = [t](double omega) {
    EnsembleDecomposition d;
    d.vectors.push_back(phase_choi_vector(omega, t));
    d.rank = 1;
    Comb c{LabeledOperator(qubit_spaces(2),
                           d.vectors[0].v * d.vectors[0].v.adjoint()),
           ToothStructure::qubits(1)};
    return std::make_pair(c, d);
  };
  auto d = finite_difference_derivatives(fam, 0.5, 1e-6);
  auto exact = phase_choi_derivative(0.5, t);
  CHECK((d.derivatives[0].v - exact.v).cwiseAbs().maxCoeff() < 1e-8);

  CombFamily constant = fam;
  constant.evaluate = [t](double) {
    EnsembleDecomposition d;
    d.vectors.push_back(phase_choi_vector(0.7, t));
    d.rank = 1;
    Comb c{LabeledOperator(qubit_spaces(2),
                           d.vectors[0].v * d.vectors[0].v.adjoint()),
           ToothStructure::qubits(1)};
    return std::make_pair(c, d);
  };
  auto dc = finite_difference_derivatives(constant, 0.5, 1e-6);
  CHECK(dc.derivatives[0].v.norm() == doctest::Approx(0.0));

  CombFamily bad = fam;
  bad.evaluate = [t](double omega) {
    EnsembleDecomposition d;
    d.vectors.push_back(phase_choi_vector(omega, t));
    if (omega > 0.5) d.vectors.push_back(phase_choi_vector(omega, 2 * t));
    d.rank = d.q();
    Comb c{LabeledOperator(qubit_spaces(2),
                           d.vectors[0].v * d.vectors[0].v.adjoint()),
           ToothStructure::qubits(1)};
    return std::make_pair(c, d);
  };
  CHECK_THROWS_AS(finite_difference_derivatives(bad, 0.5, 0.01), validation_error);
}

TEST_CASE("comb serialization round trip") {
  std::mt19937_64 rng(55);
  Mat h = random_hermitian(4, rng);
  Comb c{LabeledOperator(qubit_spaces(2), h), ToothStructure::qubits(1)};
  std::stringstream ss;
  write_comb(ss, c);
  Comb back = read_comb(ss);
  CHECK(back.structure.N() == 1);
  CHECK((back.op.m - c.op.m).cwiseAbs().maxCoeff() < 1e-15);
}
