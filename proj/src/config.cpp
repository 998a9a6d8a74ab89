#include "pmdnet/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "pmdnet/errors.hpp"
#include "pmdnet/trainer.hpp"

namespace pmdnet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)) != "") throw ConfigError(key + ": '" + text + "' is not a number");
  return v;
}

long long parse_int(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || trim(text.substr(used)) != "") throw ConfigError(key + ": '" + text + "' is not an integer");
  return v;
}

int parse_small_int(const std::string& key, const std::string& text) {
  const long long v = parse_int(key, text);
  if (v < -(1LL << 30) || v > (1LL << 30)) throw ConfigError(key + ": value out of range");
  return static_cast<int>(v);
}

Extent parse_extent(const std::string& key, const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ConfigError(key + ": expected 'rows,cols', got '" + text + "'");
  return {parse_small_int(key, trim(text.substr(0, comma))), parse_small_int(key, trim(text.substr(comma + 1)))};
}

void set_value(RunConfig& cfg, const std::string& section, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  const std::string name = section + "." + key;
  auto& l = cfg.lattice;
  auto& t = cfg.training;
  auto& r = cfg.run;
  auto& g = cfg.gradcheck;
  if (section == "lattice") {
    if (key == "nodes") return void(l.nodes = parse_extent(name, value));
    if (key == "input_window") return void(l.input_window = parse_extent(name, value));
    if (key == "neighbourhood") return void(l.neighbourhood = parse_extent(name, value));
    if (key == "leakage") return void(l.leakage = parse_extent(name, value));
  } else if (section == "training") {
    if (key == "kappa") return void(t.kappa = parse_double(name, value));
    if (key == "nu") return void(t.nu = parse_double(name, value));
    if (key == "subspaces") return void(t.subspaces = parse_small_int(name, value));
    if (key == "firing") return void(t.firing = parse_small_int(name, value));
    if (key == "epsilon") return void(t.epsilon = parse_double(name, value));
    if (key == "seed") {
      const long long s = parse_int(name, value);
      if (s < 0) throw ConfigError(name + ": seed must be non-negative");
      return void(t.seed = static_cast<std::uint64_t>(s));
    }
    if (key == "updates") return void(t.updates = parse_int(name, value));
    if (key == "seed_policy") return void(t.seed_policy = parse_seed_policy(value));
    if (key == "reseed_every") return void(t.reseed_every = parse_int(name, value));
    if (key == "epsilon_late") {
      if (value.empty() || value == "none") return void(t.epsilon_late.reset());
      return void(t.epsilon_late = parse_double(name, value));
    }
    if (key == "epsilon_switch") return void(t.epsilon_switch = parse_int(name, value));
  } else if (section == "run") {
    if (key == "out_dir") {
      if (value.empty()) throw ConfigError(name + " must not be empty");
      return void(r.out_dir = value);
    }
    if (key == "report_every") return void(r.report_every = parse_int(name, value));
    if (key == "checkpoint_every") return void(r.checkpoint_every = parse_int(name, value));
    if (key == "heldout_samples") return void(r.heldout_samples = parse_small_int(name, value));
    if (key == "gray_channel") return void(r.gray_channel = parse_small_int(name, value));
  } else if (section == "gradcheck") {
    if (key == "samples") return void(g.samples = parse_small_int(name, value));
    if (key == "step") return void(g.step = parse_double(name, value));
    if (key == "tolerance") return void(g.tolerance = parse_double(name, value));
    if (key == "corrupt") return void(g.corrupt = parse_int(name, value));
  } else {
    throw ConfigError("unknown config section [" + section + "]");
  }
  throw ConfigError("unknown config key '" + name + "'");
}

}  // namespace

void RunConfig::validate() const {
  lattice.validate();
  training.validate();
  if (run.report_every < 0) throw ConfigError("run.report_every must be non-negative");
  if (run.checkpoint_every < 0) throw ConfigError("run.checkpoint_every must be non-negative");
  if (run.heldout_samples < 1) throw ConfigError("run.heldout_samples must be positive");
  if (run.gray_channel != 1 && run.gray_channel != 2) throw ConfigError("run.gray_channel must be 1 or 2");
  if (gradcheck.samples < 1) throw ConfigError("gradcheck.samples must be positive");
  if (!(gradcheck.step > 0.0)) throw ConfigError("gradcheck.step must be positive");
  if (!(gradcheck.tolerance > 0.0)) throw ConfigError("gradcheck.tolerance must be positive");
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  os.precision(17);
  auto extent = [](const Extent& e) { return std::to_string(e.rows) + "," + std::to_string(e.cols); };
  os << "[lattice]\n"
     << "nodes=" << extent(lattice.nodes) << '\n'
     << "input_window=" << extent(lattice.input_window) << '\n'
     << "neighbourhood=" << extent(lattice.neighbourhood) << '\n'
     << "leakage=" << extent(lattice.leakage) << '\n'
     << "[training]\n"
     << "kappa=" << training.kappa << '\n'
     << "nu=" << training.nu << '\n'
     << "subspaces=" << training.subspaces << '\n'
     << "firing=" << training.firing << '\n'
     << "epsilon=" << training.epsilon << '\n'
     << "seed=" << training.seed << '\n'
     << "updates=" << training.updates << '\n'
     << "seed_policy=" << to_string(training.seed_policy) << '\n'
     << "reseed_every=" << training.reseed_every << '\n'
     << "epsilon_late=";
  if (training.epsilon_late) {
    os << *training.epsilon_late;
  } else {
    os << "none";
  }
  os << '\n'
     << "epsilon_switch=" << training.epsilon_switch << '\n'
     << "[run]\n"
     << "out_dir=" << run.out_dir.string() << '\n'
     << "report_every=" << run.report_every << '\n'
     << "checkpoint_every=" << run.checkpoint_every << '\n'
     << "heldout_samples=" << run.heldout_samples << '\n'
     << "gray_channel=" << run.gray_channel << '\n'
     << "[gradcheck]\n"
     << "samples=" << gradcheck.samples << '\n'
     << "step=" << gradcheck.step << '\n'
     << "tolerance=" << gradcheck.tolerance << '\n'
     << "corrupt=" << gradcheck.corrupt << '\n';
  return os.str();
}

std::uint64_t RunConfig::hash() const {
  const std::string text = canonical();
  return fnv1a({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

std::string RunConfig::hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

RunConfig default_run_config() {
  RunConfig cfg;
  cfg.lattice.nodes = {1, 100};
  cfg.lattice.input_window = {1, 41};
  cfg.lattice.neighbourhood = {1, 21};
  cfg.lattice.leakage = {1, 15};
  return cfg;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not key=value");
  const std::string key = trim(assignment.substr(0, eq));
  const auto dot = key.find('.');
  if (dot == std::string::npos) throw ConfigError("override key '" + key + "' must be section.key");
  set_value(cfg, key.substr(0, dot), key.substr(dot + 1), assignment.substr(eq + 1));
}

RunConfig parse_run_config(std::istream& in, const std::vector<std::string>& overrides) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  RunConfig cfg = default_run_config();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError("config entry '" + section + "' is outside any section");
    }
    for (const auto& [key, node] : body) set_value(cfg, section, key, node.get_value<std::string>());
  }
  for (const auto& o : overrides) apply_override(cfg, o);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse_run_config(in, overrides);
}

}  // namespace pmdnet
