#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "combqfi/kernels.hpp"
#include "combqfi/sdp.hpp"

using namespace combqfi;
using Clock = std::chrono::steady_clock;

namespace {

double time_ms(const std::function<void()>& f, int reps) {
  f();  // warm up
  const auto start = Clock::now();
  for (int i = 0; i < reps; ++i) f();
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count() /
         reps;
}

void report(const char* name, double serial_ms, double omp_ms) {
  std::printf("%-22s serial %9.3f ms   parallel %9.3f ms   speedup %.2fx\n", name,
              serial_ms, omp_ms, serial_ms / omp_ms);
}

kernels::CMat random_cmat(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  kernels::CMat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = {g(rng), g(rng)};
  return m;
}

void bench_index_kernels(int qubits, int reps, std::mt19937_64& rng) {
  const int dim = 1 << qubits;
  const kernels::CMat src = random_cmat(dim, rng);
  kernels::CMat dst(dim, dim);

  std::vector<int> perm(dim);
  for (int i = 0; i < dim; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  report("permute",
         time_ms([&] { kernels::permute_serial(dst, src, perm); }, reps),
         time_ms([&] { kernels::permute_omp(dst, src, perm); }, reps));

  // Transpose the low half of the qubits.
  const int low = dim / (1 << (qubits / 2));
  std::vector<int> tmask(dim);
  for (int i = 0; i < dim; ++i) tmask[i] = i % low;
  report("partial transpose",
         time_ms([&] { kernels::ptranspose_serial(dst, src, tmask); }, reps),
         time_ms([&] { kernels::ptranspose_omp(dst, src, tmask); }, reps));

  const int keep = dim / low;
  std::vector<int> kidx(keep), tidx(low);
  for (int a = 0; a < keep; ++a) kidx[a] = a * low;
  for (int s = 0; s < low; ++s) tidx[s] = s;
  kernels::CMat small(keep, keep);
  report("partial trace",
         time_ms([&] { kernels::ptrace_serial(small, src, kidx, tidx); }, reps),
         time_ms([&] { kernels::ptrace_omp(small, src, kidx, tidx); }, reps));
}

void bench_schur(int nvars, int cdim, int reps, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  sdp::Problem p;
  for (int i = 0; i < nvars; ++i) p.add_var(g(rng));
  sdp::HermBlock hb(cdim);
  std::uniform_int_distribution<int> pick(0, cdim - 1);
  for (int v = 0; v < nvars; ++v) {
    for (int e = 0; e < 6; ++e) {
      const int r = pick(rng), c = pick(rng);
      if (r == c)
        hb.add_entry(v, r, c, {g(rng), 0});
      else
        hb.add_entry(v, r, c, {g(rng), g(rng)});
    }
    Eigen::VectorXcd a(cdim), b(cdim);
    for (int i = 0; i < cdim; ++i) {
      a(i) = {g(rng), g(rng)};
      b(i) = {g(rng), g(rng)};
    }
    hb.add_dyad(v, a, b);
  }
  p.blocks.push_back(hb.realify());

  const int rdim = p.blocks[0].dim;
  Eigen::MatrixXd m(rdim, rdim);
  for (int i = 0; i < rdim; ++i)
    for (int j = 0; j < rdim; ++j) m(i, j) = g(rng);
  std::vector<Eigen::MatrixXd> w = {m * m.transpose() +
                                    Eigen::MatrixXd::Identity(rdim, rdim)};
  report("schur assembly",
         time_ms([&] { sdp::schur_matrix_serial(p, w); }, reps),
         time_ms([&] { sdp::schur_matrix_omp(p, w); }, reps));
}

}  // namespace

int main(int argc, char** argv) {
  int qubits = 10, reps = 5, nvars = 80, cdim = 48;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const int val = std::atoi(argv[i + 1]);
    if (flag == "--qubits") qubits = val;
    else if (flag == "--reps") reps = val;
    else if (flag == "--vars") nvars = val;
    else if (flag == "--block") cdim = val;
  }
  std::printf("threads: %d, matrix: %d x %d, schur: %d vars, block %d\n",
              kernels::num_threads(), 1 << qubits, 1 << qubits, nvars, cdim);
  std::mt19937_64 rng(42);
  bench_index_kernels(qubits, reps, rng);
  bench_schur(nvars, cdim, reps, rng);
  return 0;
}
