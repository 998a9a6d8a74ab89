#pragma once

#include <random>
#include <vector>

#include "oracles.hpp"
#include "pmdnet/activation.hpp"
#include "pmdnet/lattice.hpp"
#include "pmdnet/objective.hpp"

namespace fixture {

inline int odd_upto(std::mt19937_64& rng, int max_odd) {
  std::uniform_int_distribution<int> pick(0, (max_odd - 1) / 2);
  return 2 * pick(rng) + 1;
}

/// Random geometry with at most `max_nodes` nodes and `max_input` input cells.
/// Neighbourhood and leakage windows are drawn up to 5 wide, so edge
/// truncation is the common case.
inline pmdnet::LatticeConfig random_lattice(std::mt19937_64& rng, int max_nodes, int max_input) {
  std::bernoulli_distribution two_d(0.4);
  for (;;) {
    pmdnet::LatticeConfig c;
    if (two_d(rng)) {
      c.nodes = {std::uniform_int_distribution<int>(2, 3)(rng), std::uniform_int_distribution<int>(2, 4)(rng)};
      c.input_window = {odd_upto(rng, 3), odd_upto(rng, 3)};
      c.neighbourhood = {odd_upto(rng, 5), odd_upto(rng, 5)};
      c.leakage = {odd_upto(rng, 5), odd_upto(rng, 5)};
    } else {
      c.nodes = {1, std::uniform_int_distribution<int>(1, max_nodes)(rng)};
      c.input_window = {1, odd_upto(rng, 5)};
      c.neighbourhood = {1, odd_upto(rng, 5)};
      c.leakage = {1, odd_upto(rng, 5)};
    }
    if (c.node_count() <= max_nodes && c.input_dims().size() <= max_input) return c;
  }
}

inline oracle::Params random_params(const pmdnet::LatticeConfig& c, std::mt19937_64& rng, double scale = 0.8) {
  std::uniform_real_distribution<double> u(-scale, scale);
  const auto mk = static_cast<std::size_t>(c.node_count() * c.input_window.size());
  oracle::Params p;
  p.weights.resize(mk);
  p.bias.resize(static_cast<std::size_t>(c.node_count()));
  p.ref.resize(mk);
  for (auto& v : p.weights) v = u(rng);
  for (auto& v : p.bias) v = u(rng);
  for (auto& v : p.ref) v = u(rng);
  return p;
}

inline pmdnet::NodeParams to_node_params(const pmdnet::Lattice& lattice, const oracle::Params& p) {
  auto out = pmdnet::NodeParams::zeros(lattice);
  out.weights = p.weights;
  out.bias = p.bias;
  out.ref = p.ref;
  return out;
}

inline std::vector<oracle::Vec> random_samples(int count, int dim, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<oracle::Vec> out(static_cast<std::size_t>(count), oracle::Vec(static_cast<std::size_t>(dim)));
  for (auto& x : out) {
    for (auto& v : x) v = u(rng);
  }
  return out;
}

inline pmdnet::SampleSet to_set(const std::vector<oracle::Vec>& xs) { return pmdnet::SampleSet::from_rows(xs); }

inline pmdnet::RowMatrix to_matrix(const oracle::Mat& m) {
  pmdnet::RowMatrix out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(m[0].size()));
  for (std::size_t r = 0; r < m.size(); ++r) {
    for (std::size_t c = 0; c < m[r].size(); ++c) out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m[r][c];
  }
  return out;
}

/// Rows of positive random weights normalised to sum to one.
inline oracle::Mat random_posteriors(int samples, int nodes, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  oracle::Mat out(static_cast<std::size_t>(samples), oracle::Vec(static_cast<std::size_t>(nodes)));
  for (auto& row : out) {
    double s = 0.0;
    for (auto& v : row) s += (v = u(rng));
    for (auto& v : row) v /= s;
  }
  return out;
}

}  // namespace fixture
