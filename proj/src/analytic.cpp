#include "pmdnet/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pmdnet/errors.hpp"

namespace pmdnet {

namespace {

constexpr SolutionType kTypes[] = {SolutionType::Type1, SolutionType::Type2, SolutionType::Type3};

void check_firing(double n) {
  if (std::isnan(n) || n < 1.0) throw DomainError("firing count n must be >= 1");
}

bool competes(SolutionType t, double m) { return m >= min_competing_m(t); }

std::string join_types(const std::vector<SolutionType>& types, char sep) {
  std::string out;
  for (auto t : types) {
    if (!out.empty()) out += sep;
    out += std::to_string(static_cast<int>(t));
  }
  return out;
}

}  // namespace

std::string to_string(SolutionType t) { return "type" + std::to_string(static_cast<int>(t)); }

double radius_gyration(double m) {
  if (!(m >= 1.0)) throw DomainError("radius_gyration needs M >= 1");
  const double r = m / (2.0 * std::numbers::pi) * std::sin(2.0 * std::numbers::pi / m);
  return r * r;
}

double solution_value(SolutionType t, double m, double n) {
  check_firing(n);
  if (!(m >= 1.0)) throw DomainError("solution_value needs M >= 1");
  switch (t) {
    case SolutionType::Type1:
      return -2.0 * radius_gyration(m);
    case SolutionType::Type2:
      return -4.0 * radius_gyration(std::sqrt(m));
    case SolutionType::Type3: {
      if (m < 2.0) throw DomainError("type 3 needs M >= 2");
      const double factor = std::isinf(n) ? 4.0 : 4.0 * n / (n + 1.0);
      return -factor * radius_gyration(m / 2.0);
    }
  }
  throw DomainError("unknown solution type");
}

double min_competing_m(SolutionType t) {
  switch (t) {
    case SolutionType::Type1:
      return 1.0;
    case SolutionType::Type2:
      return 4.0;
    case SolutionType::Type3:
      return 2.0;
  }
  return 1.0;
}

bool OptimalType::contains(SolutionType t) const { return std::find(ties.begin(), ties.end(), t) != ties.end(); }

OptimalType optimal_type(double m, double n, double tie_tolerance) {
  if (!(m >= 2.0)) throw DomainError("optimal_type needs M >= 2");
  check_firing(n);
  double best = std::numeric_limits<double>::infinity();
  for (auto t : kTypes) {
    if (competes(t, m)) best = std::min(best, solution_value(t, m, n));
  }
  OptimalType out;
  const double tol = tie_tolerance * std::max(1.0, std::abs(best));
  for (auto t : kTypes) {
    if (competes(t, m) && solution_value(t, m, n) - best <= tol) out.ties.push_back(t);
  }
  out.best = out.ties.front();
  return out;
}

PhaseDiagram phase_diagram(const std::vector<double>& m_values, const std::vector<double>& n_values,
                           double m_tolerance) {
  if (m_values.empty() || n_values.empty()) throw DomainError("phase_diagram needs nonempty ranges");
  std::vector<double> ms = m_values;
  std::sort(ms.begin(), ms.end());
  PhaseDiagram out;
  for (double n : n_values) {
    std::vector<PhaseCell> row;
    for (double m : ms) {
      PhaseCell cell;
      cell.m = m;
      cell.n = n;
      for (int k = 0; k < 3; ++k) {
        cell.values[k] = competes(kTypes[k], m) ? solution_value(kTypes[k], m, n)
                                                : std::numeric_limits<double>::quiet_NaN();
      }
      cell.optimum = optimal_type(m, n);
      row.push_back(cell);
    }
    for (std::size_t i = 0; i + 1 < row.size(); ++i) {
      const SolutionType a = row[i].optimum.best;
      const SolutionType b = row[i + 1].optimum.best;
      if (a == b || row[i + 1].optimum.contains(a)) continue;
      // Invariant: a is at least as good as b at lo, b strictly better at hi.
      auto a_holds = [&](double m) {
        return !competes(b, m) || solution_value(a, m, n) <= solution_value(b, m, n);
      };
      double lo = row[i].m;
      double hi = row[i + 1].m;
      while (hi - lo > m_tolerance) {
        const double mid = 0.5 * (lo + hi);
        (a_holds(mid) ? lo : hi) = mid;
      }
      out.boundaries.push_back({n, 0.5 * (lo + hi), a, b});
    }
    out.cells.insert(out.cells.end(), row.begin(), row.end());
  }
  return out;
}

std::string crossover_summary(double n, int m_min, int m_max) {
  if (m_min < 2 || m_max < m_min) throw DomainError("crossover_summary needs 2 <= m_min <= m_max");
  std::map<SolutionType, std::vector<int>> members;
  for (int m = m_min; m <= m_max; ++m) {
    for (auto t : optimal_type(m, n).ties) members[t].push_back(m);
  }
  std::vector<SolutionType> order;
  for (const auto& [t, ms] : members) order.push_back(t);
  std::stable_sort(order.begin(), order.end(),
                   [&](SolutionType a, SolutionType b) { return members[a].front() < members[b].front(); });

  std::ostringstream os;
  bool first = true;
  auto sep = [&] {
    if (!first) os << ", ";
    first = false;
  };
  for (auto t : order) {
    const auto& ms = members[t];
    sep();
    os << to_string(t);
    // Contiguous runs of integer M.
    std::size_t start = 0;
    for (std::size_t i = 1; i <= ms.size(); ++i) {
      if (i < ms.size() && ms[i] == ms[i - 1] + 1) continue;
      const int lo = ms[start];
      const int hi = ms[i - 1];
      if (start > 0) os << " +";
      if (lo == m_min && hi == m_max) {
        os << " always";
      } else if (lo == m_min) {
        os << "<=" << hi;
      } else if (hi == m_max) {
        os << ">=" << lo;
      } else {
        os << ' ' << lo << ".." << hi;
      }
      start = i;
    }
  }
  for (auto t : kTypes) {
    if (!members.contains(t)) {
      sep();
      os << to_string(t) << " never";
    }
  }
  return os.str();
}

std::pair<double, double> stationary_scale(SolutionType t, double n, int attached_to) {
  check_firing(n);
  switch (t) {
    case SolutionType::Type1:
      return {1.0, 0.0};
    case SolutionType::Type2:
      return {1.0, 1.0};
    case SolutionType::Type3: {
      if (attached_to != 1 && attached_to != 2) throw DomainError("attached_to must be 1 or 2");
      const double f = std::isinf(n) ? 2.0 : 2.0 * n / (n + 1.0);
      return attached_to == 1 ? std::pair{f, 0.0} : std::pair{0.0, f};
    }
  }
  throw DomainError("unknown solution type");
}

double attachment_probability(int n, int n1) {
  if (n < 0 || n1 < 0 || n1 > n) throw DomainError("attachment_probability needs 0 <= n1 <= n");
  const double log_p = std::lgamma(n + 1.0) - std::lgamma(n1 + 1.0) - std::lgamma(n - n1 + 1.0) -
                       n * std::numbers::ln2;
  return std::exp(log_p);
}

std::string format_firing(double n) {
  if (std::isinf(n)) return "inf";
  std::ostringstream os;
  os << n;
  return os.str();
}

void write_phase_csv(std::ostream& os, const PhaseDiagram& diagram) {
  os << "M,n,value_type1,value_type2,value_type3,argmin\n";
  os.precision(17);
  for (const auto& c : diagram.cells) {
    os << c.m << ',' << format_firing(c.n);
    for (double v : c.values) {
      os << ',';
      if (!std::isnan(v)) os << v;
    }
    os << ',' << join_types(c.optimum.ties, '|') << '\n';
  }
}

void write_boundary_csv(std::ostream& os, const PhaseDiagram& diagram) {
  os << "n,M,below,above\n";
  os.precision(10);
  for (const auto& b : diagram.boundaries) {
    os << format_firing(b.n) << ',' << b.m << ',' << static_cast<int>(b.below) << ',' << static_cast<int>(b.above)
       << '\n';
  }
}

}  // namespace pmdnet
