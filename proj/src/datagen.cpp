#include "pmdnet/datagen.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pmdnet/errors.hpp"

namespace pmdnet {

std::string to_string(SeedPolicy policy) {
  switch (policy) {
    case SeedPolicy::Continue:
      return "continue";
    case SeedPolicy::Repeat:
      return "repeat";
    case SeedPolicy::Fresh:
      return "fresh";
  }
  return "continue";
}

SeedPolicy parse_seed_policy(const std::string& text) {
  if (text == "continue") return SeedPolicy::Continue;
  if (text == "repeat") return SeedPolicy::Repeat;
  if (text == "fresh") return SeedPolicy::Fresh;
  throw ConfigError("unknown seed policy '" + text + "' (expected continue, repeat or fresh)");
}

void TrainingConfig::validate() const {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw ConfigError("kappa must be positive");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be non-negative");
  if (subspaces != 1 && subspaces != 2) throw ConfigError("subspaces must be 1 or 2");
  if (firing < 1) throw ConfigError("firing count n must be >= 1");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
  if (updates < 0) throw ConfigError("updates must be non-negative");
  if (reseed_every < 0) throw ConfigError("reseed_every must be non-negative");
  if (seed_policy != SeedPolicy::Continue && reseed_every == 0) {
    throw ConfigError("seed policy '" + to_string(seed_policy) + "' needs reseed_every > 0");
  }
  if (epsilon_late && (!(*epsilon_late > 0.0) || !std::isfinite(*epsilon_late))) {
    throw ConfigError("epsilon_late must be positive");
  }
  if (epsilon_switch < 0) throw ConfigError("epsilon_switch must be non-negative");
}

double TrainingConfig::epsilon_at(long long step) const {
  return (epsilon_late && step >= epsilon_switch) ? *epsilon_late : epsilon;
}

std::mt19937_64 rng_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t segment) {
  const auto p = static_cast<std::uint64_t>(purpose);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(p), static_cast<std::uint32_t>(segment),
                    static_cast<std::uint32_t>(segment >> 32)};
  return std::mt19937_64(seq);
}

std::vector<std::uint8_t> subspace_mask(const LatticeConfig& lattice) {
  const Extent dims = lattice.input_dims();
  std::vector<std::uint8_t> mask(static_cast<std::size_t>(dims.size()));
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      mask[static_cast<std::size_t>(r * dims.cols + c)] = ((r + c) % 2 == 0) ? 1 : 2;
    }
  }
  return mask;
}

std::vector<double> sinusoid_1d(const TrainingConfig& cfg, const LatticeConfig& lattice, double phase1,
                                double phase2) {
  if (lattice.nodes.rows != 1) throw ConfigError("sinusoid_1d needs a single-row lattice");
  const Extent dims = lattice.input_dims();
  std::vector<double> x(static_cast<std::size_t>(dims.size()));
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      const bool second = cfg.subspaces == 2 && (r + c) % 2 == 1;
      x[static_cast<std::size_t>(r * dims.cols + c)] = std::sin(cfg.kappa * c + (second ? phase2 : phase1));
    }
  }
  return x;
}

std::vector<double> sinusoid_2d(const TrainingConfig& cfg, const LatticeConfig& lattice, double theta1,
                                double phase1, double theta2, double phase2) {
  const Extent dims = lattice.input_dims();
  std::vector<double> x(static_cast<std::size_t>(dims.size()));
  for (int r = 0; r < dims.rows; ++r) {
    for (int c = 0; c < dims.cols; ++c) {
      const bool second = cfg.subspaces == 2 && (r + c) % 2 == 1;
      const double theta = second ? theta2 : theta1;
      const double phase = second ? phase2 : phase1;
      x[static_cast<std::size_t>(r * dims.cols + c)] =
          std::sin(cfg.kappa * (r * std::cos(theta) + c * std::sin(theta)) + phase);
    }
  }
  return x;
}

namespace {

void add_noise(const TrainingConfig& cfg, std::vector<double>& x, std::mt19937_64& rng) {
  if (cfg.nu == 0.0) return;
  std::uniform_real_distribution<double> noise(-cfg.nu / 2.0, cfg.nu / 2.0);
  for (auto& v : x) v += noise(rng);
}

}  // namespace

TrainingVector gen_1d(const TrainingConfig& cfg, const LatticeConfig& lattice, std::mt19937_64& rng) {
  cfg.validate();
  lattice.validate();
  if (lattice.nodes.rows != 1) throw ConfigError("gen_1d needs a single-row lattice");
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double phase1 = angle(rng);
  const double phase2 = cfg.subspaces == 2 ? angle(rng) : phase1;
  TrainingVector out{sinusoid_1d(cfg, lattice, phase1, phase2), subspace_mask(lattice)};
  add_noise(cfg, out.x, rng);
  return out;
}

TrainingVector gen_2d(const TrainingConfig& cfg, const LatticeConfig& lattice, std::mt19937_64& rng) {
  cfg.validate();
  lattice.validate();
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  const double theta1 = angle(rng);
  const double phase1 = angle(rng);
  double theta2 = theta1;
  double phase2 = phase1;
  if (cfg.subspaces == 2) {
    theta2 = angle(rng);
    phase2 = angle(rng);
  }
  TrainingVector out{sinusoid_2d(cfg, lattice, theta1, phase1, theta2, phase2), subspace_mask(lattice)};
  add_noise(cfg, out.x, rng);
  return out;
}

TrainingVector generate(const TrainingConfig& cfg, const LatticeConfig& lattice, std::mt19937_64& rng) {
  return lattice.nodes.rows == 1 ? gen_1d(cfg, lattice, rng) : gen_2d(cfg, lattice, rng);
}

KappaCheck validate_kappa(const TrainingConfig& cfg, const LatticeConfig& lattice) {
  KappaCheck out;
  std::ostringstream msg;
  auto check = [&](double ratio, const char* axis) {
    const double off = std::abs(ratio - std::round(ratio));
    if (ratio < 4.0 && off > 0.05) {
      out.ok = false;
      msg << "kappa*" << axis << "/(2pi) = " << ratio << " is not close to an integer; windowed inputs "
          << "will not trace closed loops. ";
    }
  };
  out.ratio_cols = cfg.kappa * lattice.input_window.cols / (2.0 * std::numbers::pi);
  check(out.ratio_cols, "i2");
  if (lattice.nodes.rows > 1) {
    out.ratio_rows = cfg.kappa * lattice.input_window.rows / (2.0 * std::numbers::pi);
    check(*out.ratio_rows, "i1");
  }
  out.message = msg.str();
  if (!out.message.empty()) out.message.pop_back();
  return out;
}

SampleSet normalize_set(const SampleSet& samples) {
  const double lo = samples.matrix().minCoeff();
  const double hi = samples.matrix().maxCoeff();
  if (!(hi > lo)) throw DegenerateInputError("normalize_set: data are constant");
  const double scale = 2.0 / (hi - lo);
  RowMatrix out = ((samples.matrix().array() - lo) * scale - 1.0).matrix();
  // Pin the extremes exactly; rounding can otherwise leave them a ulp outside [-1, 1].
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    double& v = out.data()[i];
    if (samples.matrix().data()[i] == lo) v = -1.0;
    if (samples.matrix().data()[i] == hi) v = 1.0;
  }
  return SampleSet(std::move(out));
}

double online_normalization_scale(const TrainingConfig& cfg) { return 1.0 / (1.0 + cfg.nu / 2.0); }

SampleSet generate_set(const TrainingConfig& cfg, const LatticeConfig& lattice, int count, std::mt19937_64& rng) {
  if (count < 1) throw ConfigError("sample count must be positive");
  const double scale = online_normalization_scale(cfg);
  RowMatrix data(count, lattice.input_dims().size());
  for (int s = 0; s < count; ++s) {
    const auto v = generate(cfg, lattice, rng);
    for (std::size_t i = 0; i < v.x.size(); ++i) data(s, static_cast<Eigen::Index>(i)) = v.x[i] * scale;
  }
  return SampleSet(std::move(data));
}

}  // namespace pmdnet
