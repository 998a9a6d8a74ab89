#include "pmdnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmdnet/errors.hpp"

namespace pmdnet {

NodeParams init_params(const Lattice& lattice, std::mt19937_64& rng) {
  NodeParams p = NodeParams::zeros(lattice);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  for (auto& w : p.weights) w = dist(rng);
  return p;
}

TrainerState initial_state(const LatticeConfig& lattice, const TrainingConfig& config) {
  lattice.validate();
  config.validate();
  const Lattice geometry(lattice);
  TrainerState s;
  s.lattice = lattice;
  s.config = config;
  auto init_rng = rng_stream(config.seed, StreamPurpose::Init);
  s.params = init_params(geometry, init_rng);
  s.rng = rng_stream(config.seed, StreamPurpose::Data, 0);
  return s;
}

double type_diameter(std::span<const double> values) {
  if (values.empty()) return 1.0;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double d = *hi - *lo;
  return d < 1e-6 ? 1.0 : d;
}

namespace {

double mean_abs(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += std::abs(x);
  return acc / static_cast<double>(v.size());
}

double rate_for(std::span<const double> values, std::span<const double> grad, double epsilon) {
  const double g = mean_abs(grad);
  return g > 0.0 ? epsilon * type_diameter(values) / g : 0.0;
}

bool all_finite(const ParamGradient& g) {
  auto finite = [](double v) { return std::isfinite(v); };
  return std::all_of(g.weights.begin(), g.weights.end(), finite) &&
         std::all_of(g.bias.begin(), g.bias.end(), finite) && std::all_of(g.ref.begin(), g.ref.end(), finite);
}

double apply(std::vector<double>& values, const std::vector<double>& grad, double rate) {
  double change = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double delta = rate * grad[i];
    values[i] -= delta;
    change += std::abs(delta);
  }
  return values.empty() ? 0.0 : change / static_cast<double>(values.size());
}

}  // namespace

Rates adapt_rates(const NodeParams& params, const ParamGradient& gradient, double epsilon) {
  return {rate_for(params.bias, gradient.bias, epsilon), rate_for(params.weights, gradient.weights, epsilon),
          rate_for(params.ref, gradient.ref, epsilon)};
}

StepReport train_step(TrainerState& state, const Lattice& lattice, const LeakageMatrix& leakage,
                      std::span<const double> x) {
  const auto act = build_state(lattice, state.params, leakage, x);
  GradientSet g{ParamGradient::zeros(lattice), ParamGradient::zeros(lattice)};
  accumulate_gradients(lattice, act, state.config.firing, 1.0, g);
  const ParamGradient total = g.total();
  if (!all_finite(total)) {
    throw DomainError("non-finite gradient at step " + std::to_string(state.step));
  }
  StepReport report;
  report.rates = adapt_rates(state.params, total, state.config.epsilon_at(state.step));
  if (!std::isfinite(report.rates.bias) || !std::isfinite(report.rates.weight) || !std::isfinite(report.rates.ref)) {
    throw DomainError("update rate overflow at step " + std::to_string(state.step) +
                      " (mean |gradient| underflowed while parameters spread)");
  }
  report.mean_abs_change.bias = apply(state.params.bias, total.bias, report.rates.bias);
  report.mean_abs_change.weight = apply(state.params.weights, total.weights, report.rates.weight);
  report.mean_abs_change.ref = apply(state.params.ref, total.ref, report.rates.ref);
  state.rates = report.rates;
  ++state.step;
  return report;
}

Trainer::Trainer(TrainerState state)
    : state_(std::move(state)), lattice_(state_.lattice), leakage_(build_leakage(state_.lattice)) {
  state_.config.validate();
  state_.params.validate(lattice_);
}

TrainingVector Trainer::next_vector() {
  const auto& cfg = state_.config;
  if (cfg.reseed_every > 0 && state_.step > 0 && state_.step % cfg.reseed_every == 0) {
    switch (cfg.seed_policy) {
      case SeedPolicy::Continue:
        break;
      case SeedPolicy::Repeat:
        state_.rng = rng_stream(cfg.seed, StreamPurpose::Data, 0);
        break;
      case SeedPolicy::Fresh:
        state_.rng = rng_stream(cfg.seed, StreamPurpose::Data,
                                static_cast<std::uint64_t>(state_.step / cfg.reseed_every));
        break;
    }
  }
  auto v = generate(cfg, state_.lattice, state_.rng);
  const double scale = online_normalization_scale(cfg);
  for (auto& c : v.x) c *= scale;
  return v;
}

StepReport Trainer::step() {
  const auto v = next_vector();
  return train_step(state_, lattice_, leakage_, v.x);
}

void Trainer::run_until(long long target, const std::function<void(const Trainer&)>& after_step) {
  while (state_.step < target) {
    step();
    if (after_step) after_step(*this);
  }
}

DominanceProfile dominance(const Lattice& lattice, const NodeParams& params, int subspaces) {
  if (subspaces != 2) throw ConfigError("dominance needs two subspaces");
  params.validate(lattice);
  const auto mask = subspace_mask(lattice.config());
  DominanceProfile out;
  const auto m = static_cast<std::size_t>(lattice.node_count());
  out.a1.assign(m, 0.0);
  out.a2.assign(m, 0.0);
  for (int y = 0; y < lattice.node_count(); ++y) {
    const auto cells = lattice.window_cells(y);
    const auto ref = params.ref_vector(y);
    double sum[2] = {0.0, 0.0};
    int count[2] = {0, 0};
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const int k = mask[static_cast<std::size_t>(cells[c])] - 1;
      sum[k] += std::abs(ref[c]);
      ++count[k];
    }
    out.a1[static_cast<std::size_t>(y)] = count[0] ? sum[0] / count[0] : 0.0;
    out.a2[static_cast<std::size_t>(y)] = count[1] ? sum[1] / count[1] : 0.0;
  }
  return out;
}

}  // namespace pmdnet
