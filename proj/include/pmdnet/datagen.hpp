#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pmdnet/lattice.hpp"
#include "pmdnet/objective.hpp"

namespace pmdnet {

/// How the data stream is reseeded at every `reseed_every` step boundary.
///  - Continue: never reseeded; one long stream.
///  - Repeat: reseeded with the base seed, so the same `reseed_every`
///    vectors recur (a finite training set).
///  - Fresh: reseeded from (seed, segment), so every segment is new data.
enum class SeedPolicy { Continue, Repeat, Fresh };

std::string to_string(SeedPolicy policy);
SeedPolicy parse_seed_policy(const std::string& text);

struct TrainingConfig {
  double kappa = 0.3;
  double nu = 0.1;
  int subspaces = 2;
  int firing = 400;
  double epsilon = 0.002;
  std::uint64_t seed = 1;
  long long updates = 3200;
  SeedPolicy seed_policy = SeedPolicy::Continue;
  long long reseed_every = 0;
  /// Optional second-phase epsilon, used from step `epsilon_switch` on.
  std::optional<double> epsilon_late;
  long long epsilon_switch = 0;

  /// Throws ConfigError.
  void validate() const;
  [[nodiscard]] double epsilon_at(long long step) const;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

/// Independent RNG streams for each purpose.
enum class StreamPurpose : std::uint64_t { Init = 0, Data = 1, HeldOut = 2, Instance = 3 };

std::mt19937_64 rng_stream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t segment = 0);

/// One training vector over the padded input array. `subspace[i]` is 1 or 2.
struct TrainingVector {
  std::vector<double> x;
  std::vector<std::uint8_t> subspace;
};

/// Subspace of every input cell: 1 where row + col is even, 2 where odd.
/// On a 1D lattice this is the parity of the input position.
std::vector<std::uint8_t> subspace_mask(const LatticeConfig& lattice);

/// Noise-free 1D sinusoid sin(kappa*y + phase_k), phase_k chosen by the
/// subspace of position y (phase2 is ignored when s = 1).
std::vector<double> sinusoid_1d(const TrainingConfig& cfg, const LatticeConfig& lattice, double phase1,
                                double phase2);

/// Noise-free 2D plane wave sin(kappa*(y1 cos theta + y2 sin theta) + phase)
/// with (theta, phase) chosen per subspace.
std::vector<double> sinusoid_2d(const TrainingConfig& cfg, const LatticeConfig& lattice, double theta1,
                                double phase1, double theta2, double phase2);

/// Draws phases (then per-component noise in [-nu/2, nu/2]) from rng.
TrainingVector gen_1d(const TrainingConfig& cfg, const LatticeConfig& lattice, std::mt19937_64& rng);
TrainingVector gen_2d(const TrainingConfig& cfg, const LatticeConfig& lattice, std::mt19937_64& rng);
/// gen_1d when the node array has a single row, gen_2d otherwise.
TrainingVector generate(const TrainingConfig& cfg, const LatticeConfig& lattice, std::mt19937_64& rng);

struct KappaCheck {
  double ratio_cols = 0.0;
  std::optional<double> ratio_rows;
  bool ok = true;
  std::string message;
};

/// kappa * i / (2 pi) per window axis; warns when the ratio is below 4 and
/// further than 0.05 from an integer.
KappaCheck validate_kappa(const TrainingConfig& cfg, const LatticeConfig& lattice);

/// Affine map sending the global minimum to -1 and maximum to +1.
SampleSet normalize_set(const SampleSet& samples);

/// Scale applied to generated vectors during online training: the known
/// range [-1 - nu/2, 1 + nu/2] is mapped onto [-1, 1].
double online_normalization_scale(const TrainingConfig& cfg);

/// S generated and normalized vectors from a dedicated stream.
SampleSet generate_set(const TrainingConfig& cfg, const LatticeConfig& lattice, int count, std::mt19937_64& rng);

}  // namespace pmdnet
