#include "pmdnet/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "pmdnet/errors.hpp"

namespace pmdnet {

namespace {

// (P^T P v)_y for a node field v: first (P v)_y' = sum_{z in N(y')} P[y'][z] v_z,
// then scattered back through every neighbourhood that contains y.
void ptp_apply(const Lattice& lattice, const ActivationState& s, std::span<const double> v, std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (int owner = 0; owner < s.nodes; ++owner) {
    const auto nb = lattice.neighbourhood(owner);
    const auto& local = s.local[static_cast<std::size_t>(owner)];
    double pv = 0.0;
    for (std::size_t k = 0; k < nb.size(); ++k) pv += local[k] * v[static_cast<std::size_t>(nb[k])];
    for (std::size_t k = 0; k < nb.size(); ++k) out[static_cast<std::size_t>(nb[k])] += local[k] * pv;
  }
}

std::string component_name(const char* family, int y, int k) {
  std::ostringstream os;
  os << family << "[y=" << y;
  if (k >= 0) os << ",k=" << k;
  os << "]";
  return os.str();
}

}  // namespace

ActivationState build_state(const Lattice& lattice, const NodeParams& params, const LeakageMatrix& leakage,
                            std::span<const double> x) {
  params.validate(lattice);
  if (leakage.size() != lattice.node_count()) throw DimensionError("leakage matrix does not match lattice");
  if (static_cast<int>(x.size()) != lattice.input_size()) {
    throw DimensionError("build_state: input has " + std::to_string(x.size()) + " components, expected " +
                         std::to_string(lattice.input_size()));
  }
  ActivationState s;
  const int m = lattice.node_count();
  const int k = lattice.window_size();
  const auto mm = static_cast<std::size_t>(m);
  const auto mk = mm * static_cast<std::size_t>(k);
  s.nodes = m;
  s.window = k;

  s.x_window.resize(mk);
  s.logit.resize(mm);
  s.q.resize(mm);
  for (int y = 0; y < m; ++y) {
    std::span<double> xw{s.x_window.data() + static_cast<std::ptrdiff_t>(y) * k, static_cast<std::size_t>(k)};
    lattice.gather_window(y, x, xw);
    const auto w = params.weight(y);
    double a = params.bias[static_cast<std::size_t>(y)];
    for (int c = 0; c < k; ++c) a += w[static_cast<std::size_t>(c)] * xw[static_cast<std::size_t>(c)];
    s.logit[static_cast<std::size_t>(y)] = a;
    s.q[static_cast<std::size_t>(y)] = sigmoid(a);
  }

  s.local.resize(mm);
  s.p.assign(mm, 0.0);
  for (int owner = 0; owner < m; ++owner) {
    s.local[static_cast<std::size_t>(owner)] = localized_posterior(lattice, s.q, owner);
    const auto nb = lattice.neighbourhood(owner);
    const auto& local = s.local[static_cast<std::size_t>(owner)];
    for (std::size_t j = 0; j < nb.size(); ++j) s.p[static_cast<std::size_t>(nb[j])] += local[j];
  }
  s.lt_p.resize(mm);
  leakage.multiply_transpose(s.p, s.lt_p);

  s.d.resize(mk);
  s.e.resize(mm);
  s.dbar.assign(static_cast<std::size_t>(lattice.input_size()), 0.0);
  for (int y = 0; y < m; ++y) {
    const auto ref = params.ref_vector(y);
    const auto cells = lattice.window_cells(y);
    const double weight = s.lt_p[static_cast<std::size_t>(y)];
    double e = 0.0;
    for (int c = 0; c < k; ++c) {
      const auto idx = static_cast<std::size_t>(y) * static_cast<std::size_t>(k) + static_cast<std::size_t>(c);
      const double r = s.x_window[idx] - ref[static_cast<std::size_t>(c)];
      s.d[idx] = r;
      e += r * r;
      s.dbar[static_cast<std::size_t>(cells[static_cast<std::size_t>(c)])] += weight * r;
    }
    s.e[static_cast<std::size_t>(y)] = e;
  }

  s.le.resize(mm);
  leakage.multiply(s.e, s.le);
  s.ptp_le.resize(mm);
  ptp_apply(lattice, s, s.le, s.ptp_le);

  s.c.resize(mm);
  for (int y = 0; y < m; ++y) {
    const auto cells = lattice.window_cells(y);
    const auto r = s.residual(y);
    double acc = 0.0;
    for (int c = 0; c < k; ++c) {
      acc += r[static_cast<std::size_t>(c)] * s.dbar[static_cast<std::size_t>(cells[static_cast<std::size_t>(c)])];
    }
    s.c[static_cast<std::size_t>(y)] = acc;
  }
  s.lc.resize(mm);
  leakage.multiply(s.c, s.lc);
  s.ptp_lc.resize(mm);
  ptp_apply(lattice, s, s.lc, s.ptp_lc);
  return s;
}

std::vector<double> coherent_residual_via_pld(const Lattice& lattice, const LeakageMatrix& leakage,
                                              const ActivationState& state) {
  const int k = state.window;
  std::vector<double> out(static_cast<std::size_t>(lattice.input_size()), 0.0);
  for (int owner = 0; owner < state.nodes; ++owner) {
    const auto nb = lattice.neighbourhood(owner);
    const auto& local = state.local[static_cast<std::size_t>(owner)];
    for (std::size_t j = 0; j < nb.size(); ++j) {
      // (L d)_z = sum_t L[z][t] d_t, with each d_t embedded at its own window.
      for (const auto& entry : leakage.row(nb[j])) {
        const double coeff = local[j] * entry.weight;
        const auto cells = lattice.window_cells(entry.node);
        const auto r = state.residual(entry.node);
        for (int c = 0; c < k; ++c) {
          out[static_cast<std::size_t>(cells[static_cast<std::size_t>(c)])] += coeff * r[static_cast<std::size_t>(c)];
        }
      }
    }
  }
  return out;
}

std::vector<double> f1(const Lattice& lattice, const ActivationState& state, int y) {
  (void)lattice.coords(y);
  const auto r = state.residual(y);
  std::vector<double> out(r.begin(), r.end());
  for (auto& v : out) v *= state.lt_p[static_cast<std::size_t>(y)];
  return out;
}

std::vector<double> f2(const Lattice& lattice, const ActivationState& state, int y) {
  const auto cells = lattice.window_cells(y);
  std::vector<double> out(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    out[c] = state.lt_p[static_cast<std::size_t>(y)] * state.dbar[static_cast<std::size_t>(cells[c])];
  }
  return out;
}

double g1(const ActivationState& state, int y) {
  const auto i = static_cast<std::size_t>(y);
  return state.p.at(i) * state.le.at(i) - state.ptp_le.at(i);
}

double g2(const ActivationState& state, int y) {
  const auto i = static_cast<std::size_t>(y);
  return state.p.at(i) * state.lc.at(i) - state.ptp_lc.at(i);
}

ParamGradient ParamGradient::zeros(const Lattice& lattice) {
  const auto mk = static_cast<std::size_t>(lattice.node_count()) * static_cast<std::size_t>(lattice.window_size());
  return {std::vector<double>(mk, 0.0), std::vector<double>(static_cast<std::size_t>(lattice.node_count()), 0.0),
          std::vector<double>(mk, 0.0)};
}

ParamGradient& ParamGradient::operator+=(const ParamGradient& other) {
  if (weights.size() != other.weights.size() || bias.size() != other.bias.size() || ref.size() != other.ref.size()) {
    throw DimensionError("gradient shapes differ");
  }
  for (std::size_t i = 0; i < weights.size(); ++i) weights[i] += other.weights[i];
  for (std::size_t i = 0; i < bias.size(); ++i) bias[i] += other.bias[i];
  for (std::size_t i = 0; i < ref.size(); ++i) ref[i] += other.ref[i];
  return *this;
}

ParamGradient GradientSet::total() const {
  ParamGradient out = d1;
  out += d2;
  return out;
}

void accumulate_gradients(const Lattice& lattice, const ActivationState& state, int n, double weight,
                          GradientSet& out) {
  if (n < 1) throw DomainError("firing count n must be >= 1");
  const double nn = n;
  const double m = state.nodes;
  const int k = state.window;
  const double ref1 = -4.0 / (nn * m) * weight;
  const double ref2 = -4.0 * (nn - 1.0) / (nn * m * m) * weight;
  const double q1 = 2.0 / (nn * m) * weight;
  const double q2 = 4.0 * (nn - 1.0) / (nn * m * m) * weight;

  for (int y = 0; y < state.nodes; ++y) {
    const auto iy = static_cast<std::size_t>(y);
    const auto base = iy * static_cast<std::size_t>(k);
    const auto cells = lattice.window_cells(y);
    const auto r = state.residual(y);
    const auto xw = state.input_window(y);
    const double lt_p = state.lt_p[iy];
    // dlogQ/dlogit for the sigmoid.
    const double slope = 1.0 - state.q[iy];
    const double gb1 = q1 * g1(state, y) * slope;
    const double gb2 = q2 * g2(state, y) * slope;
    out.d1.bias[iy] += gb1;
    out.d2.bias[iy] += gb2;
    for (int c = 0; c < k; ++c) {
      const auto ic = static_cast<std::size_t>(c);
      out.d1.ref[base + ic] += ref1 * lt_p * r[ic];
      out.d2.ref[base + ic] += ref2 * lt_p * state.dbar[static_cast<std::size_t>(cells[ic])];
      out.d1.weights[base + ic] += gb1 * xw[ic];
      out.d2.weights[base + ic] += gb2 * xw[ic];
    }
  }
}

GradientSet gradients(const SampleSet& samples, const Lattice& lattice, const NodeParams& params,
                      const LeakageMatrix& leakage, int n) {
  GradientSet out{ParamGradient::zeros(lattice), ParamGradient::zeros(lattice)};
  for (int s = 0; s < samples.size(); ++s) {
    const auto state = build_state(lattice, params, leakage, samples.sample(s));
    accumulate_gradients(lattice, state, n, samples.weight(), out);
  }
  return out;
}

GradientSet grad_refvectors(const SampleSet& samples, const Lattice& lattice, const NodeParams& params,
                            const LeakageMatrix& leakage, int n) {
  auto g = gradients(samples, lattice, params, leakage, n);
  for (auto* part : {&g.d1, &g.d2}) {
    std::fill(part->weights.begin(), part->weights.end(), 0.0);
    std::fill(part->bias.begin(), part->bias.end(), 0.0);
  }
  return g;
}

GradientSet grad_weights_biases(const SampleSet& samples, const Lattice& lattice, const NodeParams& params,
                                const LeakageMatrix& leakage, int n) {
  auto g = gradients(samples, lattice, params, leakage, n);
  for (auto* part : {&g.d1, &g.d2}) std::fill(part->ref.begin(), part->ref.end(), 0.0);
  return g;
}

void GradCheckReport::write(std::ostream& os) const {
  os << "component,analytic,numeric,rel_error\n";
  os << std::setprecision(12);
  for (const auto& e : entries) os << e.component << ',' << e.analytic << ',' << e.numeric << ',' << e.rel_error << '\n';
}

GradCheckReport finite_difference_check(const SampleSet& samples, const Lattice& lattice, const NodeParams& params,
                                        const LeakageMatrix& leakage, int n, double step,
                                        std::optional<GradientCorruption> corruption) {
  if (!(step > 0.0)) throw DomainError("finite-difference step must be positive");
  auto analytic = gradients(samples, lattice, params, leakage, n).total();

  const std::size_t nw = analytic.weights.size();
  const std::size_t nb = analytic.bias.size();
  if (corruption) {
    const std::size_t i = corruption->flat_component;
    double* target = i < nw ? &analytic.weights[i]
                     : i < nw + nb ? &analytic.bias[i - nw]
                                   : &analytic.ref.at(i - nw - nb);
    *target = *target * (1.0 + corruption->relative) + (*target == 0.0 ? corruption->relative : 0.0);
  }

  NodeParams probe = params;
  auto objective = [&] { return compute_D1_D2(samples, lattice, probe, leakage, n).total(); };
  auto central = [&](double& slot) {
    const double saved = slot;
    slot = saved + step;
    const double up = objective();
    slot = saved - step;
    const double down = objective();
    slot = saved;
    return (up - down) / (2.0 * step);
  };

  GradCheckReport report;
  auto record = [&](std::string name, double a, double num) {
    const double scale = std::max(std::abs(a), std::abs(num));
    const double rel = scale < kGradCheckAbsFloor ? 0.0 : std::abs(a - num) / scale;
    GradCheckEntry entry{std::move(name), a, num, rel};
    if (report.entries.empty() || rel > report.worst.rel_error) report.worst = entry;
    report.entries.push_back(std::move(entry));
  };

  const int k = lattice.window_size();
  for (int y = 0; y < lattice.node_count(); ++y) {
    for (int c = 0; c < k; ++c) {
      const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(k) + static_cast<std::size_t>(c);
      record(component_name("w", y, c), analytic.weights[i], central(probe.weights[i]));
    }
  }
  for (int y = 0; y < lattice.node_count(); ++y) {
    const auto i = static_cast<std::size_t>(y);
    record(component_name("b", y, -1), analytic.bias[i], central(probe.bias[i]));
  }
  for (int y = 0; y < lattice.node_count(); ++y) {
    for (int c = 0; c < k; ++c) {
      const auto i = static_cast<std::size_t>(y) * static_cast<std::size_t>(k) + static_cast<std::size_t>(c);
      record(component_name("ref", y, c), analytic.ref[i], central(probe.ref[i]));
    }
  }
  return report;
}

}  // namespace pmdnet
