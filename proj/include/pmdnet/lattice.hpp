#pragma once

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace pmdnet {

/// Rectangular 2D extent (rows, cols). A 1D lattice is a single row.
struct Extent {
  int rows = 1;
  int cols = 1;

  [[nodiscard]] int size() const { return rows * cols; }
  friend bool operator==(const Extent&, const Extent&) = default;
};

/// Zero-based node coordinates on the node lattice.
struct NodeIndex {
  int y1 = 0;
  int y2 = 0;

  friend auto operator<=>(const NodeIndex&, const NodeIndex&) = default;
};

/// Geometry of the node array and the three windows attached to each node.
///
/// All window extents must be odd so that every window has a centre cell.
/// The input array is padded by (window - 1) in each direction, which keeps
/// every node's input window inside it.
struct LatticeConfig {
  Extent nodes{1, 1};
  Extent input_window{1, 1};
  Extent neighbourhood{1, 1};
  Extent leakage{1, 1};

  [[nodiscard]] Extent input_dims() const {
    return {nodes.rows + input_window.rows - 1, nodes.cols + input_window.cols - 1};
  }
  [[nodiscard]] int node_count() const { return nodes.size(); }

  /// Throws ConfigError when an invariant is violated.
  void validate() const;

  friend bool operator==(const LatticeConfig&, const LatticeConfig&) = default;
};

/// Half-open rectangle [row_begin, row_end) x [col_begin, col_end) in the
/// input array.
struct InputRange {
  int row_begin = 0;
  int row_end = 0;
  int col_begin = 0;
  int col_end = 0;

  [[nodiscard]] int rows() const { return row_end - row_begin; }
  [[nodiscard]] int cols() const { return col_end - col_begin; }
  friend bool operator==(const InputRange&, const InputRange&) = default;
};

std::vector<NodeIndex> neighbourhood(const LatticeConfig& cfg, NodeIndex y);
std::vector<NodeIndex> inverse_neighbourhood(const LatticeConfig& cfg, NodeIndex y);
InputRange input_window(const LatticeConfig& cfg, NodeIndex y);

/// Sparse row-stochastic leakage matrix. Row `y` holds Pr(y' | y) for the
/// targets y' inside the (truncated, renormalised) leakage window of y.
class LeakageMatrix {
 public:
  struct Entry {
    int node;
    double weight;
  };

  LeakageMatrix() = default;
  explicit LeakageMatrix(std::vector<std::vector<Entry>> rows);

  static LeakageMatrix identity(int node_count);

  [[nodiscard]] int size() const { return static_cast<int>(rows_.size()); }
  [[nodiscard]] std::span<const Entry> row(int y) const { return rows_[static_cast<std::size_t>(y)]; }
  /// Dense lookup; zero outside the stored support.
  [[nodiscard]] double at(int from, int to) const;

  /// out = L v, i.e. out[y] = sum_y' L[y][y'] v[y'].
  void multiply(std::span<const double> v, std::span<double> out) const;
  /// out = L^T v, i.e. out[y] = sum_y' L[y'][y] v[y'].
  void multiply_transpose(std::span<const double> v, std::span<double> out) const;

 private:
  std::vector<std::vector<Entry>> rows_;
};

LeakageMatrix build_leakage(const LatticeConfig& cfg);

/// Precomputed lattice geometry with nodes addressed by flat index
/// y = y1 * m2 + y2. Immutable after construction.
class Lattice {
 public:
  explicit Lattice(const LatticeConfig& cfg);

  [[nodiscard]] const LatticeConfig& config() const { return cfg_; }
  [[nodiscard]] int node_count() const { return cfg_.node_count(); }
  /// Number of cells in one input window, i1 * i2.
  [[nodiscard]] int window_size() const { return cfg_.input_window.size(); }
  [[nodiscard]] int input_size() const { return cfg_.input_dims().size(); }

  [[nodiscard]] int flat(NodeIndex y) const;
  [[nodiscard]] NodeIndex coords(int y) const;

  /// N(y) as sorted flat indices.
  [[nodiscard]] std::span<const int> neighbourhood(int y) const;
  /// Ñ(y) = { y' : y in N(y') } as sorted flat indices.
  [[nodiscard]] std::span<const int> inverse_neighbourhood(int y) const;
  /// Flat input-array indices of node y's window, row-major within the window.
  [[nodiscard]] std::span<const int> window_cells(int y) const;

  /// Copies node y's window of the full input vector x into out.
  void gather_window(int y, std::span<const double> x, std::span<double> out) const;

 private:
  LatticeConfig cfg_;
  std::vector<std::vector<int>> nbhd_;
  std::vector<std::vector<int>> inverse_;
  std::vector<int> cells_;
};

}  // namespace pmdnet
