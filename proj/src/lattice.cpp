#include "pmdnet/lattice.hpp"

#include <algorithm>
#include <string>

#include "pmdnet/errors.hpp"

namespace pmdnet {

namespace {

void require_odd_positive(Extent e, const char* name) {
  if (e.rows <= 0 || e.cols <= 0 || e.rows % 2 == 0 || e.cols % 2 == 0) {
    throw ConfigError(std::string(name) + " extents must be odd positive integers, got (" +
                      std::to_string(e.rows) + ", " + std::to_string(e.cols) + ")");
  }
}

void check_node(const LatticeConfig& cfg, NodeIndex y) {
  if (y.y1 < 0 || y.y1 >= cfg.nodes.rows || y.y2 < 0 || y.y2 >= cfg.nodes.cols) {
    throw IndexError("node (" + std::to_string(y.y1) + ", " + std::to_string(y.y2) +
                     ") outside lattice of size (" + std::to_string(cfg.nodes.rows) + ", " +
                     std::to_string(cfg.nodes.cols) + ")");
  }
}

// Top-hat of the given extent centred on y, clipped to the node array.
std::vector<NodeIndex> clipped_window(const LatticeConfig& cfg, NodeIndex y, Extent window) {
  const int h1 = (window.rows - 1) / 2;
  const int h2 = (window.cols - 1) / 2;
  const int r0 = std::max(0, y.y1 - h1);
  const int r1 = std::min(cfg.nodes.rows - 1, y.y1 + h1);
  const int c0 = std::max(0, y.y2 - h2);
  const int c1 = std::min(cfg.nodes.cols - 1, y.y2 + h2);
  std::vector<NodeIndex> out;
  out.reserve(static_cast<std::size_t>((r1 - r0 + 1) * (c1 - c0 + 1)));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) out.push_back({r, c});
  }
  return out;
}

}  // namespace

void LatticeConfig::validate() const {
  if (nodes.rows <= 0 || nodes.cols <= 0) {
    throw ConfigError("node_dims must be positive, got (" + std::to_string(nodes.rows) + ", " +
                      std::to_string(nodes.cols) + ")");
  }
  require_odd_positive(input_window, "input_window");
  require_odd_positive(neighbourhood, "neighbourhood_window");
  require_odd_positive(leakage, "leakage_window");
}

std::vector<NodeIndex> neighbourhood(const LatticeConfig& cfg, NodeIndex y) {
  check_node(cfg, y);
  return clipped_window(cfg, y, cfg.neighbourhood);
}

std::vector<NodeIndex> inverse_neighbourhood(const LatticeConfig& cfg, NodeIndex y) {
  check_node(cfg, y);
  std::vector<NodeIndex> out;
  for (int r = 0; r < cfg.nodes.rows; ++r) {
    for (int c = 0; c < cfg.nodes.cols; ++c) {
      const auto nb = clipped_window(cfg, {r, c}, cfg.neighbourhood);
      if (std::find(nb.begin(), nb.end(), y) != nb.end()) out.push_back({r, c});
    }
  }
  return out;
}

InputRange input_window(const LatticeConfig& cfg, NodeIndex y) {
  check_node(cfg, y);
  // Node y sits over input cell y + half-window; the window is centred there.
  return {y.y1, y.y1 + cfg.input_window.rows, y.y2, y.y2 + cfg.input_window.cols};
}

LeakageMatrix::LeakageMatrix(std::vector<std::vector<Entry>> rows) : rows_(std::move(rows)) {}

LeakageMatrix LeakageMatrix::identity(int node_count) {
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(node_count));
  for (int y = 0; y < node_count; ++y) rows[static_cast<std::size_t>(y)].push_back({y, 1.0});
  return LeakageMatrix(std::move(rows));
}

double LeakageMatrix::at(int from, int to) const {
  for (const auto& e : row(from)) {
    if (e.node == to) return e.weight;
  }
  return 0.0;
}

void LeakageMatrix::multiply(std::span<const double> v, std::span<double> out) const {
  if (v.size() != rows_.size() || out.size() != rows_.size()) {
    throw DimensionError("leakage multiply: size mismatch");
  }
  for (std::size_t y = 0; y < rows_.size(); ++y) {
    double acc = 0.0;
    for (const auto& e : rows_[y]) acc += e.weight * v[static_cast<std::size_t>(e.node)];
    out[y] = acc;
  }
}

void LeakageMatrix::multiply_transpose(std::span<const double> v, std::span<double> out) const {
  if (v.size() != rows_.size() || out.size() != rows_.size()) {
    throw DimensionError("leakage multiply_transpose: size mismatch");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t y = 0; y < rows_.size(); ++y) {
    for (const auto& e : rows_[y]) out[static_cast<std::size_t>(e.node)] += e.weight * v[y];
  }
}

LeakageMatrix build_leakage(const LatticeConfig& cfg) {
  cfg.validate();
  std::vector<std::vector<LeakageMatrix::Entry>> rows;
  rows.reserve(static_cast<std::size_t>(cfg.node_count()));
  for (int r = 0; r < cfg.nodes.rows; ++r) {
    for (int c = 0; c < cfg.nodes.cols; ++c) {
      const auto support = clipped_window(cfg, {r, c}, cfg.leakage);
      // Truncation at the array edge is compensated by uniform rescaling.
      const double w = 1.0 / static_cast<double>(support.size());
      std::vector<LeakageMatrix::Entry> row;
      row.reserve(support.size());
      for (const auto& t : support) row.push_back({t.y1 * cfg.nodes.cols + t.y2, w});
      rows.push_back(std::move(row));
    }
  }
  return LeakageMatrix(std::move(rows));
}

Lattice::Lattice(const LatticeConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  const int m = node_count();
  nbhd_.resize(static_cast<std::size_t>(m));
  inverse_.resize(static_cast<std::size_t>(m));
  for (int y = 0; y < m; ++y) {
    for (const auto& z : clipped_window(cfg_, coords(y), cfg_.neighbourhood)) {
      const int zf = flat(z);
      nbhd_[static_cast<std::size_t>(y)].push_back(zf);
      // Scan by definition: y' is in Ñ(z) iff z is in N(y').
      inverse_[static_cast<std::size_t>(zf)].push_back(y);
    }
  }

  const int k = window_size();
  const int width = cfg_.input_dims().cols;
  cells_.resize(static_cast<std::size_t>(m) * static_cast<std::size_t>(k));
  for (int y = 0; y < m; ++y) {
    const auto range = pmdnet::input_window(cfg_, coords(y));
    int* out = cells_.data() + static_cast<std::ptrdiff_t>(y) * k;
    for (int r = range.row_begin; r < range.row_end; ++r) {
      for (int c = range.col_begin; c < range.col_end; ++c) *out++ = r * width + c;
    }
  }
}

int Lattice::flat(NodeIndex y) const {
  check_node(cfg_, y);
  return y.y1 * cfg_.nodes.cols + y.y2;
}

NodeIndex Lattice::coords(int y) const {
  if (y < 0 || y >= node_count()) throw IndexError("flat node index " + std::to_string(y) + " out of range");
  return {y / cfg_.nodes.cols, y % cfg_.nodes.cols};
}

std::span<const int> Lattice::neighbourhood(int y) const { return nbhd_.at(static_cast<std::size_t>(y)); }

std::span<const int> Lattice::inverse_neighbourhood(int y) const {
  return inverse_.at(static_cast<std::size_t>(y));
}

std::span<const int> Lattice::window_cells(int y) const {
  if (y < 0 || y >= node_count()) throw IndexError("flat node index " + std::to_string(y) + " out of range");
  const auto k = static_cast<std::size_t>(window_size());
  return {cells_.data() + static_cast<std::size_t>(y) * k, k};
}

void Lattice::gather_window(int y, std::span<const double> x, std::span<double> out) const {
  if (static_cast<int>(x.size()) != input_size() || static_cast<int>(out.size()) != window_size()) {
    throw DimensionError("gather_window: expected input of " + std::to_string(input_size()) +
                         " and window of " + std::to_string(window_size()));
  }
  const auto cells = window_cells(y);
  for (std::size_t k = 0; k < cells.size(); ++k) out[k] = x[static_cast<std::size_t>(cells[k])];
}

}  // namespace pmdnet
