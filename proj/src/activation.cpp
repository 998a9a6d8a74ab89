#include "pmdnet/activation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pmdnet/errors.hpp"

namespace pmdnet {

NodeParams NodeParams::zeros(const Lattice& lattice) {
  NodeParams p;
  p.nodes = lattice.node_count();
  p.window = lattice.window_size();
  const auto n = static_cast<std::size_t>(p.nodes) * static_cast<std::size_t>(p.window);
  p.weights.assign(n, 0.0);
  p.bias.assign(static_cast<std::size_t>(p.nodes), 0.0);
  p.ref.assign(n, 0.0);
  return p;
}

std::span<double> NodeParams::weight(int y) {
  return {weights.data() + static_cast<std::ptrdiff_t>(y) * window, static_cast<std::size_t>(window)};
}
std::span<const double> NodeParams::weight(int y) const {
  return {weights.data() + static_cast<std::ptrdiff_t>(y) * window, static_cast<std::size_t>(window)};
}
std::span<double> NodeParams::ref_vector(int y) {
  return {ref.data() + static_cast<std::ptrdiff_t>(y) * window, static_cast<std::size_t>(window)};
}
std::span<const double> NodeParams::ref_vector(int y) const {
  return {ref.data() + static_cast<std::ptrdiff_t>(y) * window, static_cast<std::size_t>(window)};
}

void NodeParams::validate(const Lattice& lattice) const {
  const auto n = static_cast<std::size_t>(lattice.node_count()) * static_cast<std::size_t>(lattice.window_size());
  if (nodes != lattice.node_count() || window != lattice.window_size() || weights.size() != n ||
      ref.size() != n || bias.size() != static_cast<std::size_t>(nodes)) {
    throw DimensionError("node parameters do not match lattice geometry");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(weights.begin(), weights.end(), finite) || !std::all_of(bias.begin(), bias.end(), finite) ||
      !std::all_of(ref.begin(), ref.end(), finite)) {
    throw DomainError("node parameters contain non-finite values");
  }
}

double sigmoid(double logit) {
  if (logit >= 0.0) return 1.0 / (1.0 + std::exp(-logit));
  const double z = std::exp(logit);
  return z / (1.0 + z);
}

double activity_sigmoid(std::span<const double> x_window, std::span<const double> weights, double bias) {
  if (x_window.size() != weights.size()) {
    throw DimensionError("activity_sigmoid: input window has " + std::to_string(x_window.size()) +
                         " components, weights have " + std::to_string(weights.size()));
  }
  return sigmoid(std::inner_product(x_window.begin(), x_window.end(), weights.begin(), bias));
}

std::vector<double> node_activities(const Lattice& lattice, const NodeParams& params,
                                    std::span<const double> x) {
  std::vector<double> q(static_cast<std::size_t>(lattice.node_count()));
  std::vector<double> xw(static_cast<std::size_t>(lattice.window_size()));
  for (int y = 0; y < lattice.node_count(); ++y) {
    lattice.gather_window(y, x, xw);
    q[static_cast<std::size_t>(y)] = activity_sigmoid(xw, params.weight(y), params.bias[static_cast<std::size_t>(y)]);
  }
  return q;
}

Posterior simple_posterior(std::span<const double> activities) {
  const double total = std::accumulate(activities.begin(), activities.end(), 0.0);
  if (!(total > 0.0)) throw DegenerateInputError("simple_posterior: total activity is zero");
  Posterior out(activities.begin(), activities.end());
  for (auto& v : out) v /= total;
  return out;
}

std::vector<double> localized_posterior(const Lattice& lattice, std::span<const double> activities,
                                        int owner) {
  if (static_cast<int>(activities.size()) != lattice.node_count()) {
    throw DimensionError("localized_posterior: activity count does not match lattice");
  }
  const auto nb = lattice.neighbourhood(owner);
  double total = 0.0;
  for (int z : nb) total += activities[static_cast<std::size_t>(z)];
  if (!(total > 0.0)) {
    throw DegenerateInputError("localized_posterior: neighbourhood of node " + std::to_string(owner) +
                               " has zero total activity");
  }
  std::vector<double> out;
  out.reserve(nb.size());
  for (int z : nb) out.push_back(activities[static_cast<std::size_t>(z)] / total);
  return out;
}

Posterior pmd_posterior(const Lattice& lattice, std::span<const double> activities) {
  const int m = lattice.node_count();
  Posterior out(static_cast<std::size_t>(m), 0.0);
  // Scatter each localised posterior onto its members; equivalent to summing
  // over Ñ(y) for every y.
  for (int owner = 0; owner < m; ++owner) {
    const auto local = localized_posterior(lattice, activities, owner);
    const auto nb = lattice.neighbourhood(owner);
    for (std::size_t k = 0; k < nb.size(); ++k) out[static_cast<std::size_t>(nb[k])] += local[k];
  }
  const double inv_m = 1.0 / static_cast<double>(m);
  for (auto& v : out) v *= inv_m;
  return out;
}

Posterior apply_leakage(std::span<const double> post, const LeakageMatrix& leakage) {
  if (static_cast<int>(post.size()) != leakage.size()) {
    throw DimensionError("apply_leakage: posterior has " + std::to_string(post.size()) +
                         " entries, leakage matrix " + std::to_string(leakage.size()));
  }
  Posterior out(post.size());
  leakage.multiply_transpose(post, out);
  return out;
}

}  // namespace pmdnet
