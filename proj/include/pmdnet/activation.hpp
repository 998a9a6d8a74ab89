#pragma once

#include <functional>
#include <span>
#include <vector>

#include "pmdnet/lattice.hpp"

namespace pmdnet {

/// Per-node parameters. Weights and reference vectors are stored in
/// window-local coordinates (i1 * i2 values per node), so components outside
/// a node's input window do not exist and are implicitly zero.
struct NodeParams {
  int nodes = 0;
  int window = 0;
  std::vector<double> weights;  // nodes x window, row-major
  std::vector<double> bias;     // nodes
  std::vector<double> ref;      // nodes x window, row-major

  static NodeParams zeros(const Lattice& lattice);

  [[nodiscard]] std::span<double> weight(int y);
  [[nodiscard]] std::span<const double> weight(int y) const;
  [[nodiscard]] std::span<double> ref_vector(int y);
  [[nodiscard]] std::span<const double> ref_vector(int y) const;

  /// Throws DimensionError / DomainError when shapes disagree or values are not finite.
  void validate(const Lattice& lattice) const;

  friend bool operator==(const NodeParams&, const NodeParams&) = default;
};

/// Distribution over all M nodes for one input.
using Posterior = std::vector<double>;

/// Numerically stable logistic function.
double sigmoid(double logit);

/// Q(x|y) = 1 / (1 + exp(-w.x - b)) for a single node.
double activity_sigmoid(std::span<const double> x_window, std::span<const double> weights, double bias);

/// Binary threshold activity: 1 inside the region, 0 outside.
struct ThresholdActivity {
  std::function<bool(std::span<const double>)> region;

  double operator()(std::span<const double> x) const { return region(x) ? 1.0 : 0.0; }
};

/// Sigmoid activities of every node for a full input vector.
std::vector<double> node_activities(const Lattice& lattice, const NodeParams& params,
                                    std::span<const double> x);

/// Q(y) / sum_y' Q(y').
Posterior simple_posterior(std::span<const double> activities);

/// Pr(y | x; owner) for y in N(owner), in the order of lattice.neighbourhood(owner).
std::vector<double> localized_posterior(const Lattice& lattice, std::span<const double> activities,
                                        int owner);

/// Partitioned-mixture posterior: the average over all localised posteriors that
/// contain node y, Pr(y|x) = (1/M) sum_{y' in Ñ(y)} Pr(y|x;y').
Posterior pmd_posterior(const Lattice& lattice, std::span<const double> activities);

/// out(y) = sum_y' Pr(y | y') post(y').
Posterior apply_leakage(std::span<const double> post, const LeakageMatrix& leakage);

}  // namespace pmdnet
