#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pmdnet/commands.hpp"
#include "pmdnet/config.hpp"
#include "pmdnet/errors.hpp"

namespace {

struct CommonFlags {
  std::string config;
  std::string out_dir;
  std::optional<unsigned long long> seed;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "Run config file (sectioned key = value)");
  cmd->add_option("--out-dir", f.out_dir, "Output directory");
  cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--override", f.overrides, "section.key=value, may repeat");
}

pmdnet::RunConfig resolve(const CommonFlags& f, std::vector<std::string> extra) {
  std::vector<std::string> overrides = f.overrides;
  if (!f.out_dir.empty()) overrides.push_back("run.out_dir=" + f.out_dir);
  if (f.seed) overrides.push_back("training.seed=" + std::to_string(*f.seed));
  overrides.insert(overrides.end(), extra.begin(), extra.end());
  if (f.config.empty()) {
    auto cfg = pmdnet::default_run_config();
    for (const auto& o : overrides) pmdnet::apply_override(cfg, o);
    cfg.validate();
    return cfg;
  }
  return pmdnet::load_run_config(f.config, overrides);
}

double parse_firing(const std::string& text) {
  if (text == "inf" || text == "infinity") return pmdnet::kInfiniteFiring;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw pmdnet::ConfigError("bad firing count '" + text + "'");
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partitioned mixture network training and analysis"};
  app.require_subcommand(1);

  CommonFlags train_flags;
  std::string resume;
  std::optional<long long> report_every;
  std::optional<long long> checkpoint_every;
  auto* train = app.add_subcommand("train", "Train a network and write dominance, objective and checkpoints");
  add_common(train, train_flags);
  train->add_option("--resume", resume, "Checkpoint to continue from");
  train->add_option("--report-every", report_every, "Steps between reports");
  train->add_option("--checkpoint-every", checkpoint_every, "Steps between checkpoints");

  CommonFlags grad_flags;
  std::optional<long long> corrupt;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with finite differences");
  add_common(gradcheck, grad_flags);
  gradcheck->add_option("--corrupt", corrupt, "Perturb this analytic gradient component (checker self-test)");

  pmdnet::PhaseOptions phase_opts;
  std::vector<std::string> firing_text{"1", "2", "inf"};
  std::string phase_out = "out";
  auto* phase = app.add_subcommand("phase", "Analytic solution values and phase diagram");
  phase->add_option("--m-min", phase_opts.m_min, "Smallest M")->capture_default_str();
  phase->add_option("--m-max", phase_opts.m_max, "Largest M")->capture_default_str();
  phase->add_option("--m-step", phase_opts.m_step, "Grid step in M")->capture_default_str();
  phase->add_option("--n", firing_text, "Firing counts (use inf for the limit)")->delimiter(',');
  phase->add_option("--out-dir", phase_out, "Output directory")->capture_default_str();

  pmdnet::BoundOracleOptions oracle_opts;
  auto* oracle = app.add_subcommand("bound-oracle", "Check D = D1 + D2 - D3 on a random instance");
  oracle->add_option("--M", oracle_opts.nodes, "Node count")->capture_default_str();
  oracle->add_option("--n", oracle_opts.firing, "Firing count")->capture_default_str();
  oracle->add_option("--S", oracle_opts.samples, "Sample count")->capture_default_str();
  oracle->add_option("--dim", oracle_opts.dim, "Input dimension")->capture_default_str();
  oracle->add_option("--seed", oracle_opts.seed, "RNG seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : pmdnet::kExitConfig;
  }

  return pmdnet::run_guarded(
      [&]() -> int {
        if (*train) {
          std::vector<std::string> extra;
          if (report_every) extra.push_back("run.report_every=" + std::to_string(*report_every));
          if (checkpoint_every) extra.push_back("run.checkpoint_every=" + std::to_string(*checkpoint_every));
          const auto cfg = resolve(train_flags, extra);
          std::optional<std::filesystem::path> from;
          if (!resume.empty()) from = resume;
          return pmdnet::cmd_train(cfg, from, std::cout);
        }
        if (*gradcheck) {
          std::vector<std::string> extra;
          if (corrupt) extra.push_back("gradcheck.corrupt=" + std::to_string(*corrupt));
          return pmdnet::cmd_gradcheck(resolve(grad_flags, extra), std::cout);
        }
        if (*phase) {
          phase_opts.n_values.clear();
          for (const auto& t : firing_text) phase_opts.n_values.push_back(parse_firing(t));
          phase_opts.out_dir = phase_out;
          return pmdnet::cmd_phase(phase_opts, std::cout);
        }
        return pmdnet::cmd_bound_oracle(oracle_opts, std::cout);
      },
      std::cerr);
}
