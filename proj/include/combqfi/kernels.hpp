#ifndef COMBQFI_KERNELS_HPP
#define COMBQFI_KERNELS_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

// Data-parallel index-remap kernels behind the tensor operations. Each kernel
// has an OpenMP variant and a serial reference; the public tensor API calls
// the OpenMP variant, tests compare the two, bench/ times them.

namespace combqfi::kernels {

using CMatRef = const Eigen::MatrixXcd&;
using CMat = Eigen::MatrixXcd;

/// dst(i,j) = src(p[i], p[j])
void permute_serial(CMat& dst, CMatRef src, const std::vector<int>& p);
void permute_omp(CMat& dst, CMatRef src, const std::vector<int>& p);

/// Partial transpose via additive index contributions of the transposed
/// subgroup: dst(i,j) = src(i - t[i] + t[j], j - t[j] + t[i]).
void ptranspose_serial(CMat& dst, CMatRef src, const std::vector<int>& t);
void ptranspose_omp(CMat& dst, CMatRef src, const std::vector<int>& t);

/// Partial trace: dst(a,b) = sum_s src(k[a] + tr[s], k[b] + tr[s]).
void ptrace_serial(CMat& dst, CMatRef src, const std::vector<int>& k,
                   const std::vector<int>& tr);
void ptrace_omp(CMat& dst, CMatRef src, const std::vector<int>& k,
                const std::vector<int>& tr);

int num_threads();

}  // namespace combqfi::kernels

#endif
