#include "graphite/independence/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "graphite/errors.hpp"
#include "graphite/numerics/ops.hpp"

namespace graphite::independence {

namespace ops = num::ops;
using num::Var;

namespace {

void require_pair(const Var& a, const Var& b) {
  const auto& x = a.value();
  const auto& y = b.value();
  if (x.rank() != 2 || x.rows() != x.cols() || x.shape() != y.shape()) {
    throw DimensionError("kernel matrices must be square and equal-sized, got " +
                         num::to_string(a.shape()) + " and " + num::to_string(b.shape()));
  }
  if (x.rows() < 2) throw DimensionError("kernel statistics need n >= 2");
}

}  // namespace

Var gaussian_kernel(const Var& reps, double bandwidth) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ContractError("Gaussian kernel bandwidth must be positive and finite");
  }
  if (reps.value().rank() != 2 || reps.value().rows() < 2) {
    throw DimensionError("Gaussian kernel needs an (n x d) matrix with n >= 2, got " +
                         num::to_string(reps.shape()));
  }
  return ops::exp(ops::scale(ops::pairwise_squared_distances(reps),
                             -1.0 / (2.0 * bandwidth * bandwidth)));
}

num::Tensor gaussian_kernel_matrix(const num::Tensor& reps, double bandwidth) {
  return gaussian_kernel(num::constant(reps), bandwidth).value();
}

double median_bandwidth(const num::Tensor& reps) {
  const std::size_t n = reps.rows();
  if (reps.rank() != 2 || n < 2) throw DimensionError("median bandwidth needs n >= 2 rows");
  std::vector<double> distances;
  distances.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < reps.cols(); ++k) {
        const double d = reps.at(i, k) - reps.at(j, k);
        acc += d * d;
      }
      distances.push_back(std::sqrt(acc));
    }
  }
  const std::size_t mid = distances.size() / 2;
  std::nth_element(distances.begin(), distances.begin() + mid, distances.end());
  double median = distances[mid];
  if (distances.size() % 2 == 0) {
    const double lower = *std::max_element(distances.begin(), distances.begin() + mid);
    median = 0.5 * (median + lower);
  }
  return median < 1e-12 ? 1.0 : median;
}

Var hsic(const Var& k_phi, const Var& k_psi) {
  require_pair(k_phi, k_psi);
  const double n = static_cast<double>(k_phi.value().rows());
  // tr(K H L H) = <H K H, L> for symmetric L.
  Var inner = ops::sum_all(ops::mul(ops::double_center(k_phi), k_psi));
  return ops::scale(inner, 1.0 / ((n - 1.0) * (n - 1.0)));
}

double hsic(const num::Tensor& k_phi, const num::Tensor& k_psi) {
  return hsic(num::constant(k_phi), num::constant(k_psi)).value().item();
}

Var nhsic(const Var& k_phi, const Var& k_psi) {
  require_pair(k_phi, k_psi);
  Var centered_phi = ops::double_center(k_phi);
  Var centered_psi = ops::double_center(k_psi);
  Var norm_phi = ops::frobenius_norm(centered_phi);
  Var norm_psi = ops::frobenius_norm(centered_psi);
  if (norm_phi.value().item() <= kDegenerateNorm || norm_psi.value().item() <= kDegenerateNorm) {
    return num::constant(num::Tensor::scalar(0.0));
  }
  Var inner = ops::sum_all(ops::mul(centered_phi, centered_psi));
  return ops::div(inner, ops::mul(norm_phi, norm_psi));
}

double nhsic(const num::Tensor& k_phi, const num::Tensor& k_psi) {
  return nhsic(num::constant(k_phi), num::constant(k_psi)).value().item();
}

Var mmd_pivot(const Var& phi_reps, std::span<const TreatmentId> treatments, TreatmentId pivot,
              double bandwidth) {
  const std::size_t n = phi_reps.value().rows();
  if (treatments.size() != n) {
    throw DimensionError("mmd_pivot: " + std::to_string(n) + " rows but " +
                         std::to_string(treatments.size()) + " treatment ids");
  }
  const auto pivots = static_cast<std::size_t>(std::count(treatments.begin(), treatments.end(), pivot));
  if (pivots == 0 || pivots == n) return num::constant(num::Tensor::scalar(0.0));
  // w^T K w with w_i = 1/n_p on pivot rows and -1/n_o elsewhere.
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = treatments[i] == pivot ? 1.0 / static_cast<double>(pivots)
                                  : -1.0 / static_cast<double>(n - pivots);
  }
  num::Tensor outer({n, n});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) outer.at(i, j) = w[i] * w[j];
  }
  return ops::sum_all(ops::mul(gaussian_kernel(phi_reps, bandwidth), num::constant(std::move(outer))));
}

double mmd_pivot(const num::Tensor& phi_reps, std::span<const TreatmentId> treatments,
                 TreatmentId pivot, double bandwidth) {
  return mmd_pivot(num::constant(phi_reps), treatments, pivot, bandwidth).value().item();
}

TreatmentId most_frequent_treatment(std::span<const TreatmentId> treatments) {
  if (treatments.empty()) throw ContractError("most_frequent_treatment of an empty set");
  std::map<TreatmentId, std::size_t> counts;
  for (TreatmentId t : treatments) ++counts[t];
  TreatmentId best = counts.begin()->first;
  std::size_t best_count = 0;
  for (const auto& [id, count] : counts) {
    if (count > best_count) {
      best = id;
      best_count = count;
    }
  }
  return best;
}

}  // namespace graphite::independence
