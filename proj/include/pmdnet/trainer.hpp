#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pmdnet/activation.hpp"
#include "pmdnet/datagen.hpp"
#include "pmdnet/gradients.hpp"
#include "pmdnet/lattice.hpp"

namespace pmdnet {

/// Internal update rates, one per parameter type.
struct Rates {
  double bias = 0.0;
  double weight = 0.0;
  double ref = 0.0;

  friend bool operator==(const Rates&, const Rates&) = default;
};

struct TrainerState {
  LatticeConfig lattice;
  TrainingConfig config;
  NodeParams params;
  long long step = 0;
  Rates rates;
  std::mt19937_64 rng;  // data stream

  friend bool operator==(const TrainerState&, const TrainerState&) = default;
};

/// Weights uniform in [-0.1, 0.1]; biases and reference vectors zero.
NodeParams init_params(const Lattice& lattice, std::mt19937_64& rng);

/// Fresh state: parameters from the init stream, data stream at segment 0.
TrainerState initial_state(const LatticeConfig& lattice, const TrainingConfig& config);

/// max - min over the values, or 1 when that is below 1e-6.
double type_diameter(std::span<const double> values);

/// rate_t = epsilon * diameter_t / mean|gradient_t|, and 0 when the mean is 0.
/// The applied change rate_t * gradient_t then has mean magnitude
/// epsilon * diameter_t exactly.
Rates adapt_rates(const NodeParams& params, const ParamGradient& gradient, double epsilon);

/// Mean absolute parameter change of each type from the last train_step.
struct StepReport {
  Rates rates;
  Rates mean_abs_change;
};

/// One online update on input x: single-sample gradient of D1 + D2, fresh
/// rates, parameter -= rate * gradient. Throws DomainError on a non-finite
/// gradient, leaving the state untouched.
StepReport train_step(TrainerState& state, const Lattice& lattice, const LeakageMatrix& leakage,
                      std::span<const double> x);

/// Training loop that owns geometry and applies the seed policy.
class Trainer {
 public:
  explicit Trainer(TrainerState state);

  [[nodiscard]] const TrainerState& state() const { return state_; }
  [[nodiscard]] TrainerState& state() { return state_; }
  [[nodiscard]] const Lattice& lattice() const { return lattice_; }
  [[nodiscard]] const LeakageMatrix& leakage() const { return leakage_; }

  /// Draws the next training vector, reseeding first at segment boundaries.
  TrainingVector next_vector();
  StepReport step();
  /// Steps until state().step == target, calling `after_step` after each update.
  void run_until(long long target, const std::function<void(const Trainer&)>& after_step = {});

 private:
  TrainerState state_;
  Lattice lattice_;
  LeakageMatrix leakage_;
};

/// Mean |x'(y)| over window cells of each subspace.
struct DominanceProfile {
  std::vector<double> a1;
  std::vector<double> a2;
};

/// Throws ConfigError when the run has a single subspace.
DominanceProfile dominance(const Lattice& lattice, const NodeParams& params, int subspaces);

// Checkpoint files. Layout (all integers and doubles little-endian):
//   magic "PMDNCKPT", u32 version,
//   lattice: 8 x i32 (nodes, input window, neighbourhood, leakage as rows, cols),
//   config: f64 kappa, f64 nu, i32 subspaces, i32 firing, f64 epsilon, u64 seed,
//           i64 updates, u8 seed policy, i64 reseed_every, u8 has_epsilon_late,
//           f64 epsilon_late, i64 epsilon_switch,
//   i64 step, 3 x f64 rates (bias, weight, ref),
//   u64 count + f64[count] for weights, bias, ref in turn,
//   u64 length + bytes of the textual RNG state,
//   u64 FNV-1a hash of every preceding byte.
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> serialize_state(const TrainerState& state);
TrainerState deserialize_state(std::span<const std::uint8_t> bytes);

void checkpoint_save(const TrainerState& state, const std::filesystem::path& path);

/// Fields of the stored training config that may be replaced on load.
struct CheckpointOverrides {
  std::optional<double> epsilon;
  std::optional<double> epsilon_late;
  std::optional<long long> epsilon_switch;
  std::optional<SeedPolicy> seed_policy;
  std::optional<long long> reseed_every;
  std::optional<long long> updates;
};

TrainerState checkpoint_load(const std::filesystem::path& path, const CheckpointOverrides& overrides = {});

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t hash = 0xcbf29ce484222325ULL);

}  // namespace pmdnet
