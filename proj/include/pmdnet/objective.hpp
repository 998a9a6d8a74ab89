#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pmdnet/activation.hpp"
#include "pmdnet/lattice.hpp"

namespace pmdnet {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Finite training set with the uniform empirical measure 1/S. Each row is
/// one input vector.
class SampleSet {
 public:
  explicit SampleSet(RowMatrix data);
  static SampleSet from_rows(const std::vector<std::vector<double>>& rows);

  [[nodiscard]] int size() const { return static_cast<int>(data_.rows()); }
  [[nodiscard]] int dim() const { return static_cast<int>(data_.cols()); }
  [[nodiscard]] double weight() const { return 1.0 / static_cast<double>(size()); }
  [[nodiscard]] std::span<const double> sample(int s) const {
    return {data_.row(s).data(), static_cast<std::size_t>(dim())};
  }
  [[nodiscard]] const RowMatrix& matrix() const { return data_; }
  /// True when every component lies in [-1, 1].
  [[nodiscard]] bool is_normalized() const;

 private:
  RowMatrix data_;
};

/// Value of the upper bound D1 + D2 for n firings.
struct BoundValue {
  double d1 = 0.0;
  double d2 = 0.0;
  int n = 1;

  [[nodiscard]] double total() const { return d1 + d2; }
};

/// Exact multiple-firing distortion and its decomposition D = D1 + D2 - D3.
struct ExactDistortion {
  double d = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

/// Reference vectors in window-local coordinates, nodes x window.
struct WindowedRefs {
  std::vector<double> ref;
  std::vector<bool> attached;
};

/// Bayes-posterior centroids sum_x Pr(y|x) x / sum_x Pr(y|x) over the full
/// input space. Rows of unattached nodes (zero total responsibility) are zero
/// and flagged false in `attached` when it is given.
RowMatrix bayes_centroids(const SampleSet& samples, const RowMatrix& posteriors,
                          std::vector<bool>* attached = nullptr);

/// Bayes centroids projected onto each node's input window.
WindowedRefs ref_vectors_from_posterior(const Lattice& lattice, const SampleSet& samples,
                                        const RowMatrix& posteriors);

/// D1 and D2 with factorised firing, full-dimensional residuals, arbitrary
/// posteriors (S x M) and reference vectors (M x dim).
BoundValue upper_bound(const SampleSet& samples, const RowMatrix& posteriors, const RowMatrix& refs, int n);

/// D1 and D2 of the full model: partitioned-mixture posterior, leakage,
/// sigmoid activities, and residuals restricted to each node's input window.
BoundValue compute_D1_D2(const SampleSet& samples, const Lattice& lattice, const NodeParams& params,
                         const LeakageMatrix& leakage, int n);

/// Largest M^n accepted by the enumeration oracles.
inline constexpr long long kMaxEnumeration = 1'000'000;

/// Brute-force D, D1, D2, D3 for independent firing, Pr(y1..yn|x) = prod Pr(yi|x).
/// Enumerates all M^n firing tuples; no window restriction is applied.
ExactDistortion compute_D_exact(const SampleSet& samples, const RowMatrix& posteriors, int n);

/// As compute_D_exact, for an explicit joint table. Row s of `joints` holds
/// Pr(y1..yn | x_s) indexed by sum_i y_i M^(i-1); it must be symmetric under
/// permutation of the tuple.
ExactDistortion compute_D_exact_joint(const SampleSet& samples, const RowMatrix& joints, int node_count, int n);

/// D1 + D2 at a stationary point with the x-only constant 2<|x|^2> dropped.
double stationary_form_value(const SampleSet& samples, const RowMatrix& posteriors, const RowMatrix& refs, int n);

struct StationarySolution {
  RowMatrix refs;
  double condition_number = 0.0;
};

/// Solves n <Pr(y|x) x> = <Pr(y|x) x'(y)> + (n-1) sum_y' <Pr(y|x) Pr(y'|x)> x'(y')
/// for all reference vectors at once. Throws DegenerateInputError when the
/// M x M system is singular or badly conditioned.
StationarySolution solve_stationary_refvectors(const SampleSet& samples, const RowMatrix& posteriors, int n);

}  // namespace pmdnet
