#pragma once

#include <span>

#include "graphite/numerics/autodiff.hpp"
#include "graphite/numerics/tensor.hpp"
#include "graphite/treatment_id.hpp"

// Kernel dependence measures between phi- and psi-representations.
//
// Kernel matrices are plain (n x n) tensors / tape values. Bandwidths are
// passed in as numbers: callers pick them (median heuristic) from the
// current values, and they are held fixed under differentiation.
namespace graphite::independence {

// Below this Frobenius norm a centred Gram matrix counts as degenerate.
inline constexpr double kDegenerateNorm = 1e-12;

// K_ij = exp(-||r_i - r_j||^2 / (2 h^2)). Requires n >= 2 and h > 0.
num::Var gaussian_kernel(const num::Var& reps, double bandwidth);
num::Tensor gaussian_kernel_matrix(const num::Tensor& reps, double bandwidth);

// Median Euclidean distance over distinct row pairs; 1.0 when that median is
// below 1e-12.
double median_bandwidth(const num::Tensor& reps);

// Biased empirical HSIC, (n-1)^-2 tr(K_phi H K_psi H).
num::Var hsic(const num::Var& k_phi, const num::Var& k_psi);
double hsic(const num::Tensor& k_phi, const num::Tensor& k_psi);

// tr(K_phi H K_psi H) / (||H K_phi H||_F ||H K_psi H||_F), in [0, 1]. Returns
// 0 when either centred Gram matrix is degenerate.
num::Var nhsic(const num::Var& k_phi, const num::Var& k_psi);
double nhsic(const num::Tensor& k_phi, const num::Tensor& k_psi);

// Squared MMD between the pivot-treatment rows of phi_reps and the rest:
// mean(K_pp) + mean(K_oo) - 2 mean(K_po) with a Gaussian kernel. Zero when
// either group is empty.
num::Var mmd_pivot(const num::Var& phi_reps, std::span<const TreatmentId> treatments,
                   TreatmentId pivot, double bandwidth);
double mmd_pivot(const num::Tensor& phi_reps, std::span<const TreatmentId> treatments,
                 TreatmentId pivot, double bandwidth);

// Most common id; ties go to the smallest id. ContractError when empty.
TreatmentId most_frequent_treatment(std::span<const TreatmentId> treatments);

}  // namespace graphite::independence
