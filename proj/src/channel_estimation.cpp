#include "combqfi/channel_estimation.hpp"

#include <cmath>
#include <string>

namespace combqfi {

namespace {

void check_channel(const EnsembleDecomposition& channel, int n) {
  if (n < 1) throw structural_error("need at least one channel copy");
  if (n > 4) throw structural_error("more than 4 channel copies is not supported");
  if (channel.vectors.empty())
    throw structural_error("empty channel ensemble");
  if (channel.vectors[0].spaces.size() != 2)
    throw structural_error("channel ensemble must live on one input and one output port");
  if (!channel.has_derivatives())
    throw structural_error("channel ensemble carries no derivatives");
}

Vec kron_vec(const Vec& a, const Vec& b) {
  Vec out(a.size() * b.size());
  for (int i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

Mat kron_mat(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

}  // namespace

ToothStructure copies_structure(const EnsembleDecomposition& channel, int n) {
  check_channel(channel, n);
  const auto& base = channel.vectors[0].spaces;
  ToothStructure s;
  for (int k = 1; k <= n; ++k)
    s.teeth.push_back({SpaceLabel{std::to_string(2 * k - 1), base[0].dim},
                       SpaceLabel{std::to_string(2 * k), base[1].dim}});
  return s;
}

EnsembleDecomposition tensor_channel_copies(const EnsembleDecomposition& channel,
                                            int n) {
  check_channel(channel, n);
  const std::vector<SpaceLabel> spaces = copies_structure(channel, n).all_spaces();
  const int L = channel.q();
  EnsembleDecomposition out;
  std::vector<int> idx(n, 0);
  while (true) {
    Vec c = Vec::Ones(1), dc = Vec::Zero(1);
    for (int k = 0; k < n; ++k) {
      dc = kron_vec(dc, channel.vectors[idx[k]].v) +
           kron_vec(c, channel.derivatives[idx[k]].v);
      c = kron_vec(c, channel.vectors[idx[k]].v);
    }
    out.vectors.push_back(LabeledVector(spaces, std::move(c)));
    out.derivatives.push_back(LabeledVector(spaces, std::move(dc)));
    int k = n - 1;
    while (k >= 0 && ++idx[k] == L) idx[k--] = 0;
    if (k < 0) break;
  }
  out.rank = out.q();
  return out;
}

LabeledOperator n_copy_performance_operator(const EnsembleDecomposition& channel,
                                            int n) {
  check_channel(channel, n);
  const int d = channel.vectors[0].dim();
  Mat e = Mat::Zero(d, d), omega = Mat::Zero(d, d), de = Mat::Zero(d, d);
  for (int i = 0; i < channel.q(); ++i) {
    const Vec& v = channel.vectors[i].v;
    const Vec& dv = channel.derivatives[i].v;
    e += v * v.adjoint();
    omega += 4.0 * dv * dv.adjoint();
    de += 2.0 * dv * v.adjoint();
  }
  const Mat ed = de.adjoint();

  const int dim = static_cast<int>(std::pow(double(d), n) + 0.5);
  Mat total = Mat::Zero(dim, dim);
  auto place = [&](const std::vector<const Mat*>& slots) {
    Mat acc = Mat::Ones(1, 1);
    for (const Mat* s : slots) acc = kron_mat(acc, *s);
    total += acc;
  };
  for (int a = 0; a < n; ++a) {
    std::vector<const Mat*> slots(n, &e);
    slots[a] = &omega;
    place(slots);
    for (int b = a + 1; b < n; ++b) {
      slots = std::vector<const Mat*>(n, &e);
      slots[a] = &de;
      slots[b] = &ed;
      place(slots);
      slots[a] = &ed;
      slots[b] = &de;
      place(slots);
    }
  }

  const ToothStructure s = copies_structure(channel, n);
  const std::vector<SpaceLabel> spaces = s.all_spaces();
  std::vector<std::string> transposed;
  for (int j = 0; j + 1 < 2 * n; ++j) transposed.push_back(spaces[j].id);
  return partial_transpose(LabeledOperator(spaces, std::move(total)), transposed);
}

QfiResult adaptive_channel_qfi(const EnsembleDecomposition& channel, int n,
                               const QfiOptions& opts) {
  check_channel(channel, n);
  return comb_qfi_dual(tensor_channel_copies(channel, n),
                       copies_structure(channel, n), opts);
}

}  // namespace combqfi
