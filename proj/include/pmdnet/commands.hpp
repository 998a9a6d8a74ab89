#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pmdnet/analytic.hpp"
#include "pmdnet/config.hpp"

namespace pmdnet {

enum ExitCode : int { kExitOk = 0, kExitCheckFailed = 1, kExitConfig = 2, kExitIo = 3 };

/// Runs `body`, mapping ConfigError to 2, IoError to 3 and any other failure
/// to 1, with the message written to `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

/// Trains per the config, writing into run.out_dir:
///   objective.csv      step, d1, d2, total on a fixed held-out batch
///   dominance.csv      step, node_index, a1, a2 (two-subspace runs)
///   dominance_<step>.pgm  grey-level map of a1 or a2 (2D lattices)
///   checkpoint_<step>.ckpt every checkpoint_every steps, final.ckpt at the end
/// A resumed run must use the same lattice, data and firing settings; its
/// epsilon schedule, seed policy and update count come from `cfg`.
int cmd_train(const RunConfig& cfg, const std::optional<std::filesystem::path>& resume, std::ostream& log);

/// Finite-difference check of every parameter on a random instance of the
/// configured lattice (at most 16 nodes). Writes gradcheck.csv; returns 0
/// iff the worst relative error is within gradcheck.tolerance.
int cmd_gradcheck(const RunConfig& cfg, std::ostream& log);

struct PhaseOptions {
  double m_min = 2.0;
  double m_max = 60.0;
  double m_step = 0.05;
  std::vector<double> n_values{1.0, 2.0, kInfiniteFiring};
  int summary_m_min = 3;
  std::filesystem::path out_dir = "out";
};

/// Writes phase_values.csv, phase_boundaries.csv and curve_n<n>.csv
/// (M, type, -value) and prints the integer-M crossovers per n.
int cmd_phase(const PhaseOptions& options, std::ostream& log);

struct BoundOracleOptions {
  int nodes = 4;
  int firing = 2;
  int samples = 20;
  int dim = 3;
  std::uint64_t seed = 1;
};

/// Random instance; checks D = D1 + D2 - D3 and D3 >= 0 within 1e-10.
int cmd_bound_oracle(const BoundOracleOptions& options, std::ostream& log);

/// Writes a binary PGM with one byte per node, scaled so the largest value is 255.
void write_pgm(const std::filesystem::path& path, int rows, int cols, const std::vector<double>& values);

}  // namespace pmdnet
