#ifndef COMBQFI_CHANNEL_ESTIMATION_HPP
#define COMBQFI_CHANNEL_ESTIMATION_HPP

#include "combqfi/qfi.hpp"

namespace combqfi {

/// Tooth structure of n sequential uses of a channel with the given input and
/// output port dimensions (ports relabeled "1".."2n").
ToothStructure copies_structure(const EnsembleDecomposition& channel, int n);

/// Ensemble of E^(x)n from an ensemble of a single channel Choi operator
/// (vectors on one input and one output space); derivatives by the product
/// rule over the n slots.
EnsembleDecomposition tensor_channel_copies(const EnsembleDecomposition& channel,
                                            int n);

/// Performance operator of n channel copies at zero gauge, assembled from
/// single-copy blocks instead of the tensored ensemble: with E = sum |E_i><E_i|,
/// O = 4 sum |dE_i><dE_i| and the cross blocks 2 sum |dE_i><E_i| and its
/// adjoint, the operator is the sum over placements of one O slot, or of one
/// cross pair, in an otherwise E-filled tensor product; the partial transpose
/// over all ports but the last output is applied at the end.
LabeledOperator n_copy_performance_operator(const EnsembleDecomposition& channel,
                                            int n);

/// Fisher information of the optimal adaptive strategy over n channel uses.
/// Refuses n > 4 (the joint SDP grows exponentially with n).
QfiResult adaptive_channel_qfi(const EnsembleDecomposition& channel, int n,
                               const QfiOptions& opts = {});

}  // namespace combqfi

#endif
