#include "combqfi/kernels.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace combqfi::kernels {

int num_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void permute_serial(CMat& dst, CMatRef src, const std::vector<int>& p) {
  const int n = static_cast<int>(p.size());
  dst.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dst(i, j) = src(p[i], p[j]);
}

void permute_omp(CMat& dst, CMatRef src, const std::vector<int>& p) {
  const int n = static_cast<int>(p.size());
  dst.resize(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dst(i, j) = src(p[i], p[j]);
}

void ptranspose_serial(CMat& dst, CMatRef src, const std::vector<int>& t) {
  const int n = static_cast<int>(t.size());
  dst.resize(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dst(i, j) = src(i - t[i] + t[j], j - t[j] + t[i]);
}

void ptranspose_omp(CMat& dst, CMatRef src, const std::vector<int>& t) {
  const int n = static_cast<int>(t.size());
  dst.resize(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) dst(i, j) = src(i - t[i] + t[j], j - t[j] + t[i]);
}

void ptrace_serial(CMat& dst, CMatRef src, const std::vector<int>& k,
                   const std::vector<int>& tr) {
  const int n = static_cast<int>(k.size());
  dst.setZero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      std::complex<double> acc = 0;
      for (int s : tr) acc += src(k[a] + s, k[b] + s);
      dst(a, b) = acc;
    }
}

void ptrace_omp(CMat& dst, CMatRef src, const std::vector<int>& k,
                const std::vector<int>& tr) {
  const int n = static_cast<int>(k.size());
  dst.setZero(n, n);
#pragma omp parallel for schedule(static)
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      std::complex<double> acc = 0;
      for (int s : tr) acc += src(k[a] + s, k[b] + s);
      dst(a, b) = acc;
    }
}

}  // namespace combqfi::kernels
