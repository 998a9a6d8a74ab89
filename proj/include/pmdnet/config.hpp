#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "pmdnet/datagen.hpp"
#include "pmdnet/lattice.hpp"

namespace pmdnet {

struct RunOptions {
  std::filesystem::path out_dir = "out";
  long long report_every = 100;
  long long checkpoint_every = 0;  // 0: final checkpoint only
  int heldout_samples = 64;
  int gray_channel = 1;  // subspace shown in 2D grey-level maps
};

struct GradcheckOptions {
  int samples = 4;
  double step = 1e-5;
  double tolerance = 1e-5;
  long long corrupt = -1;  // component index into [weights | bias | ref], -1 for none
};

/// Every setting of a run. Text form is sectioned key = value:
///
///   [lattice]   nodes, input_window, neighbourhood, leakage   (as "rows,cols")
///   [training]  kappa, nu, subspaces, firing, epsilon, seed, updates,
///               seed_policy, reseed_every, epsilon_late, epsilon_switch
///   [run]       out_dir, report_every, checkpoint_every, heldout_samples, gray_channel
///   [gradcheck] samples, step, tolerance, corrupt
///
/// Unknown sections or keys are rejected.
struct RunConfig {
  LatticeConfig lattice;
  TrainingConfig training;
  RunOptions run;
  GradcheckOptions gradcheck;

  /// Throws ConfigError.
  void validate() const;
  /// Fully expanded key = value listing in a fixed order.
  [[nodiscard]] std::string canonical() const;
  [[nodiscard]] std::uint64_t hash() const;
  [[nodiscard]] std::string hash_hex() const;
};

/// The reference 1D experiment: 100 nodes, windows 41 / 21 / 15, kappa 0.3,
/// nu 0.1, two subspaces, n = 400, epsilon 0.002, 3200 updates.
RunConfig default_run_config();

/// Parses config text on top of default_run_config(), then applies
/// "section.key=value" overrides, then validates.
RunConfig parse_run_config(std::istream& in, const std::vector<std::string>& overrides = {});
RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Applies one "section.key=value" assignment. Throws ConfigError.
void apply_override(RunConfig& cfg, const std::string& assignment);

}  // namespace pmdnet
