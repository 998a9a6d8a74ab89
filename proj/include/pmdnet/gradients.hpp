#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmdnet/activation.hpp"
#include "pmdnet/lattice.hpp"
#include "pmdnet/objective.hpp"

namespace pmdnet {

/// Per-sample cache of every quantity the closed-form derivatives need.
///
/// Notation follows the compact matrix form: L[y][y'] = Pr(y'|y),
/// P[y'][y] = Pr(y | x; y') for y in N(y'), p_y = sum_{y' in Ñ(y)} P[y'][y],
/// d_y = x - x'(y) restricted to node y's input window, e_y = |d_y|^2,
/// dbar = sum_y (L^T p)_y d_y in the full input space.
///
/// The vector-valued (L d) only ever enters the derivatives through its dot
/// product with dbar, so the state keeps c_y = d_y . dbar and its smoothed
/// forms instead of full-dimensional (L d)_y.
struct ActivationState {
  int nodes = 0;
  int window = 0;

  std::vector<double> x_window;  // nodes x window
  std::vector<double> logit;
  std::vector<double> q;
  /// local[y'] is Pr(. | x; y') over lattice.neighbourhood(y').
  std::vector<std::vector<double>> local;
  std::vector<double> p;
  std::vector<double> lt_p;  // (L^T p)_y
  std::vector<double> d;     // nodes x window
  std::vector<double> e;
  std::vector<double> dbar;  // input-array sized
  std::vector<double> le;      // (L e)_y
  std::vector<double> ptp_le;  // (P^T P L e)_y
  std::vector<double> c;       // d_y . dbar
  std::vector<double> lc;      // (L d)_y . dbar
  std::vector<double> ptp_lc;  // (P^T P L d)_y . dbar

  [[nodiscard]] std::span<const double> residual(int y) const {
    return {d.data() + static_cast<std::ptrdiff_t>(y) * window, static_cast<std::size_t>(window)};
  }
  [[nodiscard]] std::span<const double> input_window(int y) const {
    return {x_window.data() + static_cast<std::ptrdiff_t>(y) * window, static_cast<std::size_t>(window)};
  }
};

ActivationState build_state(const Lattice& lattice, const NodeParams& params, const LeakageMatrix& leakage,
                            std::span<const double> x);

/// dbar by its second definition, sum_y (P L d)_y, accumulated in the full
/// input space. Used to cross-check ActivationState::dbar.
std::vector<double> coherent_residual_via_pld(const Lattice& lattice, const LeakageMatrix& leakage,
                                              const ActivationState& state);

/// f1(x,y) = (L^T p)_y d_y, window-local.
std::vector<double> f1(const Lattice& lattice, const ActivationState& state, int y);
/// f2(x,y) = (L^T p)_y dbar, restricted to node y's window.
std::vector<double> f2(const Lattice& lattice, const ActivationState& state, int y);
/// g1(x,y) = p_y (L e)_y - (P^T P L e)_y.
double g1(const ActivationState& state, int y);
/// g2(x,y) = (p_y (L d)_y - (P^T P L d)_y) . dbar.
double g2(const ActivationState& state, int y);

/// Gradient of one parameter family layout-compatible with NodeParams.
struct ParamGradient {
  std::vector<double> weights;
  std::vector<double> bias;
  std::vector<double> ref;

  static ParamGradient zeros(const Lattice& lattice);
  ParamGradient& operator+=(const ParamGradient& other);
};

/// Derivatives of D1 and D2 kept apart.
struct GradientSet {
  ParamGradient d1;
  ParamGradient d2;

  [[nodiscard]] ParamGradient total() const;
};

/// Adds one sample's contribution, weighted by `weight`, to `out`.
void accumulate_gradients(const Lattice& lattice, const ActivationState& state, int n, double weight,
                          GradientSet& out);

/// All derivatives of D1 + D2 over a sample set (empirical measure 1/S).
GradientSet gradients(const SampleSet& samples, const Lattice& lattice, const NodeParams& params,
                      const LeakageMatrix& leakage, int n);

/// dD/dx'(y) only; weight and bias entries are left zero.
GradientSet grad_refvectors(const SampleSet& samples, const Lattice& lattice, const NodeParams& params,
                            const LeakageMatrix& leakage, int n);

/// dD/dw(y) and dD/db(y) only; reference-vector entries are left zero.
GradientSet grad_weights_biases(const SampleSet& samples, const Lattice& lattice, const NodeParams& params,
                                const LeakageMatrix& leakage, int n);

inline constexpr double kGradCheckAbsFloor = 1e-9;

struct GradCheckEntry {
  std::string component;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  GradCheckEntry worst;

  [[nodiscard]] double max_rel_error() const { return worst.rel_error; }
  [[nodiscard]] bool passed(double tolerance) const { return worst.rel_error <= tolerance; }
  /// One line per component: component, analytic, numeric, relative error.
  void write(std::ostream& os) const;
};

/// Deliberate error injected into the analytic gradient, for exercising the
/// checker itself.
struct GradientCorruption {
  std::size_t flat_component = 0;  // index into [weights | bias | ref]
  double relative = 0.1;
};

/// Compares every analytic component against central differences of
/// compute_D1_D2. Relative error is |a - n| / max(|a|, |n|), taken as 0 when
/// both magnitudes are below kGradCheckAbsFloor (central differences at
/// h = 1e-5 carry ~1e-11 of round-off, so smaller values are not resolvable).
GradCheckReport finite_difference_check(const SampleSet& samples, const Lattice& lattice, const NodeParams& params,
                                        const LeakageMatrix& leakage, int n, double step = 1e-5,
                                        std::optional<GradientCorruption> corruption = std::nullopt);

}  // namespace pmdnet
