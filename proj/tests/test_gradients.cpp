#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "pmdnet/errors.hpp"
#include "pmdnet/gradients.hpp"

using namespace pmdnet;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

TEST(Gradients, SingleNodeHasNoLogitGradient) {
  const LatticeConfig cfg{{1, 1}, {1, 3}, {1, 1}, {1, 1}};
  const Lattice lattice(cfg);
  std::mt19937_64 rng(1);
  const auto p = fixture::random_params(cfg, rng);
  const std::vector<double> x{0.2, -0.5, 0.7};
  const auto state = build_state(lattice, fixture::to_node_params(lattice, p), build_leakage(cfg), x);
  EXPECT_EQ(state.local[0], std::vector<double>{1.0});
  EXPECT_EQ(state.p[0], 1.0);
  EXPECT_NEAR(g1(state, 0), 0.0, 1e-15);
  EXPECT_NEAR(g2(state, 0), 0.0, 1e-15);
  const auto g = gradients(SampleSet::from_rows({x}), lattice, fixture::to_node_params(lattice, p),
                           build_leakage(cfg), 3);
  const auto t = g.total();
  EXPECT_NEAR(max_abs(t.bias), 0.0, 1e-15);
  EXPECT_NEAR(max_abs(t.weights), 0.0, 1e-15);
}

TEST(Gradients, CoherentResidualDefinitionsAgree) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto cfg = fixture::random_lattice(rng, 12, 16);
    const Lattice lattice(cfg);
    const auto leakage = build_leakage(cfg);
    const auto p = fixture::random_params(cfg, rng);
    const auto x = fixture::random_samples(1, cfg.input_dims().size(), rng)[0];
    const auto state = build_state(lattice, fixture::to_node_params(lattice, p), leakage, x);
    const auto other = coherent_residual_via_pld(lattice, leakage, state);
    ASSERT_EQ(other.size(), state.dbar.size());
    for (std::size_t i = 0; i < other.size(); ++i) EXPECT_NEAR(other[i], state.dbar[i], 1e-14);
  }
}

TEST(Gradients, MatchExpandedSums) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    const auto cfg = fixture::random_lattice(rng, 9, 12);
    const Lattice lattice(cfg);
    const auto p = fixture::random_params(cfg, rng);
    const auto x = fixture::random_samples(1, cfg.input_dims().size(), rng)[0];
    const int n = std::uniform_int_distribution<int>(1, 9)(rng);
    const auto g = gradients(SampleSet::from_rows({x}), lattice, fixture::to_node_params(lattice, p),
                             build_leakage(cfg), n);
    const auto want = oracle::expanded_derivatives(cfg, p, x, n);
    const int m = lattice.node_count();
    const int k = lattice.window_size();
    for (int z = 0; z < m; ++z) {
      EXPECT_NEAR(g.d1.bias[z], want.d1_logit[z], 1e-12);
      EXPECT_NEAR(g.d2.bias[z], want.d2_logit[z], 1e-12);
      const auto cs = oracle::cells(cfg, z);
      for (int j = 0; j < k; ++j) {
        const auto idx = static_cast<std::size_t>(z * k + j);
        EXPECT_NEAR(g.d1.weights[idx], want.d1_logit[z] * x[cs[j]], 1e-12);
        EXPECT_NEAR(g.d2.weights[idx], want.d2_logit[z] * x[cs[j]], 1e-12);
        EXPECT_NEAR(g.d1.ref[idx], want.d1_ref[z][j], 1e-12);
        EXPECT_NEAR(g.d2.ref[idx], want.d2_ref[z][j], 1e-12);
      }
    }
  }
}

TEST(Gradients, MatchFiniteDifferencesOfDenseObjective) {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 15; ++trial) {
    const auto cfg = fixture::random_lattice(rng, 8, 10);
    const Lattice lattice(cfg);
    auto p = fixture::random_params(cfg, rng);
    const auto xs = fixture::random_samples(3, cfg.input_dims().size(), rng);
    const int n = std::uniform_int_distribution<int>(1, 6)(rng);
    const auto t = gradients(fixture::to_set(xs), lattice, fixture::to_node_params(lattice, p),
                             build_leakage(cfg), n)
                       .total();
    const auto f = [&] {
      const auto b = oracle::objective(cfg, xs, p, n);
      return b.d1 + b.d2;
    };
    // Central differences at h = 1e-5 carry ~1e-11 of round-off, so exact
    // zeros are compared absolutely.
    auto check = [](double analytic, double numeric) {
      if (std::abs(analytic - numeric) < 1e-9) return;
      const double rel = std::abs(analytic - numeric) / std::max({1e-8, std::abs(analytic), std::abs(numeric)});
      EXPECT_LT(rel, 1e-5) << analytic << " vs " << numeric;
    };
    for (std::size_t i = 0; i < p.weights.size(); ++i) check(t.weights[i], oracle::central(f, p.weights[i], 1e-5));
    for (std::size_t i = 0; i < p.bias.size(); ++i) check(t.bias[i], oracle::central(f, p.bias[i], 1e-5));
    for (std::size_t i = 0; i < p.ref.size(); ++i) check(t.ref[i], oracle::central(f, p.ref[i], 1e-5));
  }
}

TEST(Gradients, PartialFamiliesMatchFullGradient) {
  std::mt19937_64 rng(41);
  const LatticeConfig cfg{{2, 3}, {3, 3}, {3, 3}, {3, 3}};
  const Lattice lattice(cfg);
  const auto p = fixture::to_node_params(lattice, fixture::random_params(cfg, rng));
  const auto xs = fixture::to_set(fixture::random_samples(4, cfg.input_dims().size(), rng));
  const auto l = build_leakage(cfg);
  const auto full = gradients(xs, lattice, p, l, 4).total();
  const auto refs = grad_refvectors(xs, lattice, p, l, 4).total();
  const auto wb = grad_weights_biases(xs, lattice, p, l, 4).total();
  EXPECT_EQ(refs.ref, full.ref);
  EXPECT_EQ(max_abs(refs.weights), 0.0);
  EXPECT_EQ(wb.weights, full.weights);
  EXPECT_EQ(wb.bias, full.bias);
  EXPECT_EQ(max_abs(wb.ref), 0.0);
}

TEST(Gradients, FiringOnceHasNoD2Gradient) {
  std::mt19937_64 rng(43);
  const LatticeConfig cfg{{1, 7}, {1, 3}, {1, 3}, {1, 3}};
  const Lattice lattice(cfg);
  const auto p = fixture::to_node_params(lattice, fixture::random_params(cfg, rng));
  const auto xs = fixture::to_set(fixture::random_samples(3, cfg.input_dims().size(), rng));
  const auto g = gradients(xs, lattice, p, build_leakage(cfg), 1);
  EXPECT_EQ(max_abs(g.d2.weights), 0.0);
  EXPECT_EQ(max_abs(g.d2.bias), 0.0);
  EXPECT_EQ(max_abs(g.d2.ref), 0.0);
}

TEST(Gradients, SaturatedActivitiesGiveZeroLogitGradient) {
  const LatticeConfig cfg{{1, 4}, {1, 1}, {1, 3}, {1, 1}};
  const Lattice lattice(cfg);
  auto p = NodeParams::zeros(lattice);
  for (auto& b : p.bias) b = 60.0;
  p.ref = {0.1, 0.2, 0.3, 0.4};
  const auto g = gradients(SampleSet::from_rows({{0.5, -0.5, 0.25, 0.0}}), lattice, p, build_leakage(cfg), 3);
  const auto t = g.total();
  EXPECT_LT(max_abs(t.bias), 1e-20);
  EXPECT_LT(max_abs(t.weights), 1e-20);
  EXPECT_GT(max_abs(t.ref), 0.0);
}

TEST(Gradients, FiniteDifferenceCheckPassesAndDetectsCorruption) {
  std::mt19937_64 rng(47);
  const LatticeConfig cfg{{2, 3}, {3, 3}, {3, 3}, {3, 3}};
  const Lattice lattice(cfg);
  const auto p = fixture::to_node_params(lattice, fixture::random_params(cfg, rng));
  const auto xs = fixture::to_set(fixture::random_samples(4, cfg.input_dims().size(), rng));
  const auto l = build_leakage(cfg);
  const auto report = finite_difference_check(xs, lattice, p, l, 5);
  EXPECT_EQ(report.entries.size(), p.weights.size() + p.bias.size() + p.ref.size());
  EXPECT_TRUE(report.passed(1e-5)) << report.worst.component << " " << report.max_rel_error();

  const std::size_t bias0 = p.weights.size();
  const auto bad = finite_difference_check(xs, lattice, p, l, 5, 1e-5, GradientCorruption{bias0 + 2, 0.1});
  EXPECT_FALSE(bad.passed(1e-5));
  EXPECT_EQ(bad.worst.component, "b[y=2]");

  std::ostringstream os;
  report.write(os);
  EXPECT_EQ(os.str().substr(0, 36), "component,analytic,numeric,rel_error");
}

TEST(Gradients, NonFiniteParametersAreRejected) {
  const LatticeConfig cfg{{1, 3}, {1, 1}, {1, 3}, {1, 1}};
  const Lattice lattice(cfg);
  auto p = NodeParams::zeros(lattice);
  p.bias[1] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(gradients(SampleSet::from_rows({{0.1, 0.2, 0.3}}), lattice, p, build_leakage(cfg), 2), Error);
}
