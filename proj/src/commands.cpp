#include "pmdnet/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "pmdnet/errors.hpp"
#include "pmdnet/gradients.hpp"
#include "pmdnet/objective.hpp"
#include "pmdnet/trainer.hpp"

namespace pmdnet {

namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_csv(const fs::path& path, const std::string& config_hash, const std::string& header) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "# config_hash=" << config_hash << '\n' << header << '\n';
  out.precision(12);
  return out;
}

void check_stream(const std::ostream& out, const fs::path& path) {
  if (!out) throw IoError("write to " + path.string() + " failed");
}

void check_resume_compatible(const TrainerState& s, const RunConfig& cfg) {
  const auto& a = s.config;
  const auto& b = cfg.training;
  if (!(s.lattice == cfg.lattice)) throw ConfigError("checkpoint lattice differs from the config");
  if (a.kappa != b.kappa || a.nu != b.nu || a.subspaces != b.subspaces || a.firing != b.firing ||
      a.seed != b.seed) {
    throw ConfigError("checkpoint kappa, nu, subspaces, firing or seed differs from the config");
  }
}

}  // namespace

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    err << "io error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

void write_pgm(const fs::path& path, int rows, int cols, const std::vector<double>& values) {
  if (static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) != values.size()) {
    throw DimensionError("pgm size does not match value count");
  }
  const double peak = values.empty() ? 0.0 : *std::max_element(values.begin(), values.end());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << cols << ' ' << rows << "\n255\n";
  for (double v : values) {
    const double level = peak > 0.0 ? std::clamp(v / peak, 0.0, 1.0) * 255.0 : 0.0;
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(level))));
  }
  check_stream(out, path);
}

int cmd_train(const RunConfig& cfg, const std::optional<fs::path>& resume, std::ostream& log) {
  cfg.validate();
  const auto kappa = validate_kappa(cfg.training, cfg.lattice);
  if (!kappa.ok) log << "warning: " << kappa.message << '\n';

  TrainerState initial;
  if (resume) {
    CheckpointOverrides o;
    o.epsilon = cfg.training.epsilon;
    o.epsilon_switch = cfg.training.epsilon_switch;
    o.seed_policy = cfg.training.seed_policy;
    o.reseed_every = cfg.training.reseed_every;
    o.updates = cfg.training.updates;
    initial = checkpoint_load(*resume, o);
    initial.config.epsilon_late = cfg.training.epsilon_late;
    initial.config.validate();
    check_resume_compatible(initial, cfg);
    log << "resumed from " << resume->string() << " at step " << initial.step << '\n';
  } else {
    initial = initial_state(cfg.lattice, cfg.training);
  }
  Trainer trainer(std::move(initial));
  const Lattice& lattice = trainer.lattice();
  const long long target = trainer.state().config.updates;
  if (trainer.state().step > target) {
    throw ConfigError("checkpoint step " + std::to_string(trainer.state().step) + " is past updates = " +
                      std::to_string(target));
  }

  const fs::path dir = cfg.run.out_dir;
  ensure_dir(dir);
  const std::string hash = cfg.hash_hex();
  auto heldout_rng = rng_stream(cfg.training.seed, StreamPurpose::HeldOut);
  const SampleSet heldout = generate_set(cfg.training, cfg.lattice, cfg.run.heldout_samples, heldout_rng);

  const bool two_subspaces = cfg.training.subspaces == 2;
  const bool two_d = cfg.lattice.nodes.rows > 1;
  auto objective = open_csv(dir / "objective.csv", hash, "step,d1,d2,total");
  std::ofstream dom;
  if (two_subspaces) dom = open_csv(dir / "dominance.csv", hash, "step,node_index,a1,a2");

  auto report = [&](const Trainer& t) {
    const auto& s = t.state();
    const auto b = compute_D1_D2(heldout, lattice, s.params, t.leakage(), s.config.firing);
    objective << s.step << ',' << b.d1 << ',' << b.d2 << ',' << b.total() << '\n';
    check_stream(objective, dir / "objective.csv");
    if (two_subspaces) {
      const auto profile = dominance(lattice, s.params, 2);
      for (int y = 0; y < lattice.node_count(); ++y) {
        dom << s.step << ',' << y << ',' << profile.a1[static_cast<std::size_t>(y)] << ','
            << profile.a2[static_cast<std::size_t>(y)] << '\n';
      }
      check_stream(dom, dir / "dominance.csv");
      if (two_d) {
        const auto& channel = cfg.run.gray_channel == 1 ? profile.a1 : profile.a2;
        write_pgm(dir / ("dominance_" + std::to_string(s.step) + ".pgm"), cfg.lattice.nodes.rows,
                  cfg.lattice.nodes.cols, channel);
      }
    }
    log << "step " << s.step << "  D1+D2 " << b.total() << '\n';
  };

  report(trainer);
  trainer.run_until(target, [&](const Trainer& t) {
    const long long step = t.state().step;
    if ((cfg.run.report_every > 0 && step % cfg.run.report_every == 0) || step == target) report(t);
    if (cfg.run.checkpoint_every > 0 && step % cfg.run.checkpoint_every == 0) {
      checkpoint_save(t.state(), dir / ("checkpoint_" + std::to_string(step) + ".ckpt"));
    }
  });
  checkpoint_save(trainer.state(), dir / "final.ckpt");
  log << "wrote " << (dir / "final.ckpt").string() << '\n';
  return kExitOk;
}

int cmd_gradcheck(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (cfg.lattice.node_count() > 16) {
    throw ConfigError("gradcheck needs at most 16 nodes, config has " + std::to_string(cfg.lattice.node_count()));
  }
  const Lattice lattice(cfg.lattice);
  const LeakageMatrix leakage = build_leakage(cfg.lattice);
  auto rng = rng_stream(cfg.training.seed, StreamPurpose::Instance);
  const SampleSet samples = generate_set(cfg.training, cfg.lattice, cfg.gradcheck.samples, rng);
  NodeParams params = init_params(lattice, rng);
  std::uniform_real_distribution<double> spread(-0.5, 0.5);
  for (auto& b : params.bias) b = spread(rng);
  for (auto& r : params.ref) r = spread(rng);

  std::optional<GradientCorruption> corruption;
  if (cfg.gradcheck.corrupt >= 0) corruption = GradientCorruption{static_cast<std::size_t>(cfg.gradcheck.corrupt)};
  const auto report = finite_difference_check(samples, lattice, params, leakage, cfg.training.firing,
                                              cfg.gradcheck.step, corruption);

  ensure_dir(cfg.run.out_dir);
  const fs::path path = cfg.run.out_dir / "gradcheck.csv";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "# config_hash=" << cfg.hash_hex() << '\n';
  report.write(out);
  check_stream(out, path);

  const bool ok = report.passed(cfg.gradcheck.tolerance);
  log << "components checked: " << report.entries.size() << '\n'
      << "worst: " << report.worst.component << " analytic " << report.worst.analytic << " numeric "
      << report.worst.numeric << " rel_error " << report.worst.rel_error << '\n'
      << (ok ? "PASS" : "FAIL") << " (tolerance " << cfg.gradcheck.tolerance << ")\n";
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_phase(const PhaseOptions& options, std::ostream& log) {
  if (!(options.m_min >= 2.0) || !(options.m_max > options.m_min) || !(options.m_step > 0.0)) {
    throw ConfigError("phase needs 2 <= m_min < m_max and a positive step");
  }
  if (options.n_values.empty()) throw ConfigError("phase needs at least one n");
  std::vector<double> ms;
  const auto count = static_cast<long long>(std::floor((options.m_max - options.m_min) / options.m_step + 1e-9));
  for (long long i = 0; i <= count; ++i) ms.push_back(options.m_min + static_cast<double>(i) * options.m_step);
  if (ms.back() < options.m_max) ms.push_back(options.m_max);

  const auto diagram = phase_diagram(ms, options.n_values);
  ensure_dir(options.out_dir);
  {
    const fs::path path = options.out_dir / "phase_values.csv";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_phase_csv(out, diagram);
    check_stream(out, path);
  }
  {
    const fs::path path = options.out_dir / "phase_boundaries.csv";
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    write_boundary_csv(out, diagram);
    check_stream(out, path);
  }
  for (double n : options.n_values) {
    const fs::path path = options.out_dir / ("curve_n" + format_firing(n) + ".csv");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "M,type,neg_value\n";
    out.precision(17);
    for (const auto& c : diagram.cells) {
      if (c.n != n && !(std::isinf(c.n) && std::isinf(n))) continue;
      for (int k = 0; k < 3; ++k) {
        if (!std::isnan(c.values[k])) out << c.m << ',' << k + 1 << ',' << -c.values[k] << '\n';
      }
    }
    check_stream(out, path);
  }

  const int m_hi = static_cast<int>(std::floor(options.m_max));
  for (double n : options.n_values) {
    log << "n=" << format_firing(n) << ": " << crossover_summary(n, options.summary_m_min, m_hi) << '\n';
  }
  for (const auto& b : diagram.boundaries) {
    log << "  boundary n=" << format_firing(b.n) << " M=" << b.m << " " << to_string(b.below) << " -> "
        << to_string(b.above) << '\n';
  }
  return kExitOk;
}

int cmd_bound_oracle(const BoundOracleOptions& o, std::ostream& log) {
  if (o.nodes < 1 || o.firing < 1 || o.samples < 1 || o.dim < 1) {
    throw ConfigError("bound-oracle needs positive M, n, S and dim");
  }
  double tuples = 1.0;
  for (int i = 0; i < o.firing; ++i) tuples *= o.nodes;
  if (tuples > static_cast<double>(kMaxEnumeration)) {
    throw ConfigError("M^n exceeds the enumeration limit of " + std::to_string(kMaxEnumeration));
  }
  auto rng = rng_stream(o.seed, StreamPurpose::Instance);
  std::uniform_real_distribution<double> coord(-1.0, 1.0);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  RowMatrix x(o.samples, o.dim);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = coord(rng);
  RowMatrix post(o.samples, o.nodes);
  for (int s = 0; s < o.samples; ++s) {
    for (int y = 0; y < o.nodes; ++y) post(s, y) = weight(rng);
    post.row(s) /= post.row(s).sum();
  }
  const SampleSet samples(std::move(x));
  const auto r = compute_D_exact(samples, post, o.firing);
  const double gap = std::abs(r.d - (r.d1 + r.d2 - r.d3));
  const double tol = 1e-10 * std::max(1.0, std::abs(r.d));
  const bool identity = gap <= tol;
  const bool nonneg = r.d3 >= -1e-10;
  log.precision(15);
  log << "M=" << o.nodes << " n=" << o.firing << " S=" << o.samples << " dim=" << o.dim << " seed=" << o.seed << '\n'
      << "D  = " << r.d << '\n'
      << "D1 = " << r.d1 << '\n'
      << "D2 = " << r.d2 << '\n'
      << "D3 = " << r.d3 << '\n'
      << "|D - (D1 + D2 - D3)| = " << gap << (identity ? "  ok" : "  FAIL") << '\n'
      << "D3 >= 0" << (nonneg ? "  ok" : "  FAIL") << '\n';
  return identity && nonneg ? kExitOk : kExitCheckFailed;
}

}  // namespace pmdnet
