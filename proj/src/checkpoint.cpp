#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "pmdnet/errors.hpp"
#include "pmdnet/trainer.hpp"

namespace pmdnet {

namespace {

constexpr char kMagic[8] = {'P', 'M', 'D', 'N', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void i32(int v) { u32(static_cast<std::uint32_t>(v)); }
  void i64(long long v) { u64(static_cast<std::uint64_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    for (double d : v) f64(d);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint32_t u32() {
    const auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    const auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[static_cast<std::size_t>(i)]) << (8 * i);
    return v;
  }
  int i32() { return static_cast<int>(u32()); }
  long long i64() { return static_cast<long long>(u64()); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::vector<double> doubles() {
    const std::uint64_t n = u64();
    if (n > remaining() / 8) throw IoError("checkpoint truncated: array length exceeds file");
    std::vector<double> v(n);
    for (auto& d : v) d = f64();
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    if (n > remaining()) throw IoError("checkpoint truncated");
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }
  [[nodiscard]] std::size_t remaining() const { return bytes_.size() - pos_; }
  [[nodiscard]] std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void write_extent(Writer& w, const Extent& e) {
  w.i32(e.rows);
  w.i32(e.cols);
}

Extent read_extent(Reader& r) {
  Extent e;
  e.rows = r.i32();
  e.cols = r.i32();
  return e;
}

}  // namespace

std::uint64_t fnv1a(std::span<const std::uint8_t> bytes, std::uint64_t hash) {
  for (std::uint8_t b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::vector<std::uint8_t> serialize_state(const TrainerState& s) {
  Writer w;
  w.raw(kMagic, sizeof kMagic);
  w.u32(kCheckpointVersion);
  write_extent(w, s.lattice.nodes);
  write_extent(w, s.lattice.input_window);
  write_extent(w, s.lattice.neighbourhood);
  write_extent(w, s.lattice.leakage);
  const auto& c = s.config;
  w.f64(c.kappa);
  w.f64(c.nu);
  w.i32(c.subspaces);
  w.i32(c.firing);
  w.f64(c.epsilon);
  w.u64(c.seed);
  w.i64(c.updates);
  w.u8(static_cast<std::uint8_t>(c.seed_policy));
  w.i64(c.reseed_every);
  w.u8(c.epsilon_late ? 1 : 0);
  w.f64(c.epsilon_late.value_or(0.0));
  w.i64(c.epsilon_switch);
  w.i64(s.step);
  w.f64(s.rates.bias);
  w.f64(s.rates.weight);
  w.f64(s.rates.ref);
  w.doubles(s.params.weights);
  w.doubles(s.params.bias);
  w.doubles(s.params.ref);
  std::ostringstream rng_text;
  rng_text << s.rng;
  const std::string rng = rng_text.str();
  w.u64(rng.size());
  w.raw(rng.data(), rng.size());
  const std::uint64_t hash = fnv1a(w.bytes());
  w.u64(hash);
  return std::move(w.bytes());
}

TrainerState deserialize_state(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < sizeof kMagic + 4 + 8) throw IoError("checkpoint truncated");
  if (std::memcmp(bytes.data(), kMagic, sizeof kMagic) != 0) throw IoError("not a checkpoint file (bad magic)");
  Reader r(bytes);
  r.take(sizeof kMagic);
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw IoError("checkpoint version " + std::to_string(version) + " is not supported (expected " +
                  std::to_string(kCheckpointVersion) + ")");
  }
  TrainerState s;
  s.lattice.nodes = read_extent(r);
  s.lattice.input_window = read_extent(r);
  s.lattice.neighbourhood = read_extent(r);
  s.lattice.leakage = read_extent(r);
  auto& c = s.config;
  c.kappa = r.f64();
  c.nu = r.f64();
  c.subspaces = r.i32();
  c.firing = r.i32();
  c.epsilon = r.f64();
  c.seed = r.u64();
  c.updates = r.i64();
  const std::uint8_t policy = r.u8();
  if (policy > static_cast<std::uint8_t>(SeedPolicy::Fresh)) throw IoError("checkpoint has an unknown seed policy");
  c.seed_policy = static_cast<SeedPolicy>(policy);
  c.reseed_every = r.i64();
  const bool has_late = r.u8() != 0;
  const double late = r.f64();
  if (has_late) c.epsilon_late = late;
  c.epsilon_switch = r.i64();
  s.step = r.i64();
  s.rates.bias = r.f64();
  s.rates.weight = r.f64();
  s.rates.ref = r.f64();
  s.params.weights = r.doubles();
  s.params.bias = r.doubles();
  s.params.ref = r.doubles();
  const std::uint64_t rng_len = r.u64();
  const auto rng_bytes = r.take(rng_len);
  const std::size_t body = r.position();
  const std::uint64_t stored = r.u64();
  if (r.remaining() != 0) throw IoError("checkpoint has trailing bytes");
  if (fnv1a(bytes.first(body)) != stored) throw IoError("checkpoint checksum mismatch");

  std::istringstream rng_text(std::string(rng_bytes.begin(), rng_bytes.end()));
  rng_text >> s.rng;
  if (!rng_text) throw IoError("checkpoint RNG state is malformed");

  try {
    s.lattice.validate();
    s.config.validate();
  } catch (const ConfigError& e) {
    throw IoError(std::string("checkpoint holds an invalid configuration: ") + e.what());
  }
  const Lattice geometry(s.lattice);
  s.params.nodes = geometry.node_count();
  s.params.window = geometry.window_size();
  try {
    s.params.validate(geometry);
  } catch (const Error& e) {
    throw IoError(std::string("checkpoint parameters are inconsistent: ") + e.what());
  }
  return s;
}

void checkpoint_save(const TrainerState& state, const std::filesystem::path& path) {
  const auto bytes = serialize_state(state);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write to " + path.string() + " failed");
}

TrainerState checkpoint_load(const std::filesystem::path& path, const CheckpointOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  TrainerState s = deserialize_state(bytes);
  auto& c = s.config;
  if (overrides.epsilon) c.epsilon = *overrides.epsilon;
  if (overrides.epsilon_late) c.epsilon_late = *overrides.epsilon_late;
  if (overrides.epsilon_switch) c.epsilon_switch = *overrides.epsilon_switch;
  if (overrides.seed_policy) c.seed_policy = *overrides.seed_policy;
  if (overrides.reseed_every) c.reseed_every = *overrides.reseed_every;
  if (overrides.updates) c.updates = *overrides.updates;
  c.validate();
  return s;
}

}  // namespace pmdnet
