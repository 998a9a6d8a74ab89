#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace pmdnet {

/// Solutions of the two-subspace torus model:
///  Type1: every node attached to one subspace only.
///  Type2: every node attached to both subspaces.
///  Type3: half the nodes attached to each subspace.
enum class SolutionType { Type1 = 1, Type2 = 2, Type3 = 3 };

std::string to_string(SolutionType t);

inline constexpr double kInfiniteFiring = std::numeric_limits<double>::infinity();

/// R_M = ((M / 2 pi) sin(2 pi / M))^2 for real M >= 1.
double radius_gyration(double m);

/// D1 + D2 without its type-independent constant. n may be kInfiniteFiring.
///   Type1: -2 R_M,  Type2: -4 R_sqrt(M),  Type3: -(4n/(n+1)) R_{M/2}.
double solution_value(SolutionType t, double m, double n);

/// Smallest M for which a type competes in optimal_type. Type2 splits each
/// circle into sqrt(M) arcs and needs at least two of them; Type3 needs one
/// node per half.
double min_competing_m(SolutionType t);

struct OptimalType {
  SolutionType best = SolutionType::Type1;
  /// Every type whose value is within the tie tolerance of the minimum, in
  /// increasing type order.
  std::vector<SolutionType> ties;

  [[nodiscard]] bool contains(SolutionType t) const;
  [[nodiscard]] bool unique() const { return ties.size() == 1; }
};

OptimalType optimal_type(double m, double n, double tie_tolerance = 1e-12);

struct PhaseBoundary {
  double n = 1.0;
  double m = 0.0;
  SolutionType below = SolutionType::Type1;
  SolutionType above = SolutionType::Type1;
};

struct PhaseCell {
  double m = 0.0;
  double n = 1.0;
  double values[3] = {0.0, 0.0, 0.0};
  OptimalType optimum;
};

struct PhaseDiagram {
  std::vector<PhaseCell> cells;
  std::vector<PhaseBoundary> boundaries;
};

/// Optimal type on every (M, n) grid point, plus the M positions where the
/// optimum changes for each n, located by bisection to `m_tolerance`.
PhaseDiagram phase_diagram(const std::vector<double>& m_values, const std::vector<double>& n_values,
                           double m_tolerance = 1e-6);

/// Crossovers over integer M in [m_min, m_max], as text such as
/// "type1<=12, type3 12..29, type2>=30". Ties count for every tied type.
std::string crossover_summary(double n, int m_min, int m_max);

/// Reference-vector scale on subspace (1, 2) relative to the Bayes centroid
/// of that subspace. `attached_to` selects the half for Type3.
std::pair<double, double> stationary_scale(SolutionType t, double n, int attached_to = 1);

/// Probability that n independent firings split as (n1, n - n1) between the
/// two halves: n! / (n1! (n - n1)!) / 2^n.
double attachment_probability(int n, int n1);

std::string format_firing(double n);

/// CSV rows: M, n, value_type1, value_type2, value_type3, argmin.
void write_phase_csv(std::ostream& os, const PhaseDiagram& diagram);
/// CSV rows: n, M, below, above.
void write_boundary_csv(std::ostream& os, const PhaseDiagram& diagram);

}  // namespace pmdnet
