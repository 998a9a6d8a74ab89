#include "pmdnet/objective.hpp"

#include <cmath>
#include <limits>
#include <utility>
#include <sstream>
#include <string>

#include "pmdnet/errors.hpp"

namespace pmdnet {

namespace {

void check_posteriors(const SampleSet& samples, const RowMatrix& posteriors) {
  if (posteriors.rows() != samples.size()) {
    throw DimensionError("posterior table has " + std::to_string(posteriors.rows()) + " rows for " +
                         std::to_string(samples.size()) + " samples");
  }
}

void check_refs(const SampleSet& samples, const RowMatrix& posteriors, const RowMatrix& refs) {
  check_posteriors(samples, posteriors);
  if (refs.rows() != posteriors.cols() || refs.cols() != samples.dim()) {
    throw DimensionError("reference vectors must be M x dim");
  }
}

void check_firing(int n) {
  if (n < 1) throw DomainError("firing count n must be >= 1, got " + std::to_string(n));
}

long long enumeration_size(int node_count, int n) {
  long long total = 1;
  for (int i = 0; i < n; ++i) {
    total *= node_count;
    if (total > kMaxEnumeration) {
      throw DomainError("enumeration guard: M^n exceeds " + std::to_string(kMaxEnumeration));
    }
  }
  return total;
}

}  // namespace

SampleSet::SampleSet(RowMatrix data) : data_(std::move(data)) {
  if (data_.rows() == 0 || data_.cols() == 0) throw DimensionError("sample set must be nonempty");
}

SampleSet SampleSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw DimensionError("sample set must be nonempty");
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t s = 0; s < rows.size(); ++s) {
    if (rows[s].size() != rows.front().size()) throw DimensionError("sample vectors differ in length");
    for (std::size_t k = 0; k < rows[s].size(); ++k) {
      m(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) = rows[s][k];
    }
  }
  return SampleSet(std::move(m));
}

bool SampleSet::is_normalized() const { return data_.size() > 0 && data_.cwiseAbs().maxCoeff() <= 1.0; }

RowMatrix bayes_centroids(const SampleSet& samples, const RowMatrix& posteriors, std::vector<bool>* attached) {
  check_posteriors(samples, posteriors);
  const Eigen::VectorXd mass = posteriors.colwise().sum().transpose();
  RowMatrix c = posteriors.transpose() * samples.matrix();
  if (attached != nullptr) attached->assign(static_cast<std::size_t>(posteriors.cols()), true);
  for (Eigen::Index y = 0; y < c.rows(); ++y) {
    if (mass(y) > 0.0) {
      c.row(y) /= mass(y);
    } else {
      c.row(y).setZero();
      if (attached != nullptr) (*attached)[static_cast<std::size_t>(y)] = false;
    }
  }
  return c;
}

WindowedRefs ref_vectors_from_posterior(const Lattice& lattice, const SampleSet& samples,
                                        const RowMatrix& posteriors) {
  if (samples.dim() != lattice.input_size() || posteriors.cols() != lattice.node_count()) {
    throw DimensionError("ref_vectors_from_posterior: samples or posteriors do not match lattice");
  }
  WindowedRefs out;
  const RowMatrix full = bayes_centroids(samples, posteriors, &out.attached);
  const int k = lattice.window_size();
  out.ref.resize(static_cast<std::size_t>(lattice.node_count()) * static_cast<std::size_t>(k));
  for (int y = 0; y < lattice.node_count(); ++y) {
    lattice.gather_window(y, {full.row(y).data(), static_cast<std::size_t>(full.cols())},
                          {out.ref.data() + static_cast<std::ptrdiff_t>(y) * k, static_cast<std::size_t>(k)});
  }
  return out;
}

BoundValue upper_bound(const SampleSet& samples, const RowMatrix& posteriors, const RowMatrix& refs, int n) {
  check_refs(samples, posteriors, refs);
  check_firing(n);
  const double nn = n;
  double d1 = 0.0;
  double d2 = 0.0;
  for (int s = 0; s < samples.size(); ++s) {
    const Eigen::RowVectorXd x = samples.matrix().row(s);
    Eigen::RowVectorXd coherent = Eigen::RowVectorXd::Zero(samples.dim());
    for (Eigen::Index y = 0; y < refs.rows(); ++y) {
      const Eigen::RowVectorXd r = x - refs.row(y);
      d1 += posteriors(s, y) * r.squaredNorm();
      coherent += posteriors(s, y) * r;
    }
    d2 += coherent.squaredNorm();
  }
  const double w = samples.weight();
  return {2.0 / nn * w * d1, 2.0 * (nn - 1.0) / nn * w * d2, n};
}

BoundValue compute_D1_D2(const SampleSet& samples, const Lattice& lattice, const NodeParams& params,
                         const LeakageMatrix& leakage, int n) {
  check_firing(n);
  params.validate(lattice);
  if (samples.dim() != lattice.input_size()) {
    throw DimensionError("compute_D1_D2: sample dimension " + std::to_string(samples.dim()) +
                         " does not match input array size " + std::to_string(lattice.input_size()));
  }
  const int m = lattice.node_count();
  const int k = lattice.window_size();
  const double nn = n;
  std::vector<double> coherent(static_cast<std::size_t>(lattice.input_size()));
  std::vector<double> xw(static_cast<std::size_t>(k));
  double d1 = 0.0;
  double d2 = 0.0;
  for (int s = 0; s < samples.size(); ++s) {
    const auto x = samples.sample(s);
    const auto q = node_activities(lattice, params, x);
    const auto leaked = apply_leakage(pmd_posterior(lattice, q), leakage);
    std::fill(coherent.begin(), coherent.end(), 0.0);
    for (int y = 0; y < m; ++y) {
      lattice.gather_window(y, x, xw);
      const auto ref = params.ref_vector(y);
      const auto cells = lattice.window_cells(y);
      const double py = leaked[static_cast<std::size_t>(y)];
      double e = 0.0;
      for (int c = 0; c < k; ++c) {
        const double r = xw[static_cast<std::size_t>(c)] - ref[static_cast<std::size_t>(c)];
        e += r * r;
        coherent[static_cast<std::size_t>(cells[static_cast<std::size_t>(c)])] += py * r;
      }
      d1 += py * e;
    }
    for (double v : coherent) d2 += v * v;
  }
  const double w = samples.weight();
  return {2.0 / nn * w * d1, 2.0 * (nn - 1.0) / nn * w * d2, n};
}

ExactDistortion compute_D_exact(const SampleSet& samples, const RowMatrix& posteriors, int n) {
  check_posteriors(samples, posteriors);
  check_firing(n);
  const int m = static_cast<int>(posteriors.cols());
  const long long tuples = enumeration_size(m, n);
  RowMatrix joints(samples.size(), static_cast<Eigen::Index>(tuples));
  std::vector<int> t(static_cast<std::size_t>(n));
  for (long long idx = 0; idx < tuples; ++idx) {
    long long rem = idx;
    for (int i = 0; i < n; ++i) {
      t[static_cast<std::size_t>(i)] = static_cast<int>(rem % m);
      rem /= m;
    }
    for (int s = 0; s < samples.size(); ++s) {
      double pr = 1.0;
      for (int yi : t) pr *= posteriors(s, yi);
      joints(s, static_cast<Eigen::Index>(idx)) = pr;
    }
  }
  return compute_D_exact_joint(samples, joints, m, n);
}

ExactDistortion compute_D_exact_joint(const SampleSet& samples, const RowMatrix& joints, int node_count, int n) {
  check_firing(n);
  const long long tuples = enumeration_size(node_count, n);
  if (joints.rows() != samples.size() || joints.cols() != tuples) {
    throw DimensionError("joint table must be S x M^n");
  }
  const int m = node_count;
  const int dim = samples.dim();
  const double w = samples.weight();
  const double nn = n;

  auto decode = [&](long long idx, std::vector<int>& t) {
    for (int i = 0; i < n; ++i) {
      t[static_cast<std::size_t>(i)] = static_cast<int>(idx % m);
      idx /= m;
    }
  };
  auto encode = [&](const std::vector<int>& t) {
    long long idx = 0;
    for (int i = n - 1; i >= 0; --i) idx = idx * m + t[static_cast<std::size_t>(i)];
    return idx;
  };

  // Single-firing marginal and pairwise marginal from the joint.
  std::vector<int> t(static_cast<std::size_t>(n));
  RowMatrix marginal = RowMatrix::Zero(samples.size(), m);
  RowMatrix pair = RowMatrix::Zero(samples.size(), static_cast<Eigen::Index>(m) * m);
  for (long long idx = 0; idx < tuples; ++idx) {
    decode(idx, t);
    // Adjacent transpositions generate every permutation of the tuple.
    for (int i = 0; i + 1 < n; ++i) {
      auto swapped = t;
      std::swap(swapped[static_cast<std::size_t>(i)], swapped[static_cast<std::size_t>(i) + 1]);
      const long long jdx = encode(swapped);
      if ((joints.col(static_cast<Eigen::Index>(idx)) - joints.col(static_cast<Eigen::Index>(jdx)))
              .cwiseAbs()
              .maxCoeff() > 1e-12) {
        throw DomainError("joint firing table is not symmetric under permutation");
      }
    }
    for (int s = 0; s < samples.size(); ++s) {
      const double pr = joints(s, static_cast<Eigen::Index>(idx));
      marginal(s, t[0]) += pr;
      if (n >= 2) pair(s, static_cast<Eigen::Index>(t[0]) * m + t[1]) += pr;
    }
  }

  const RowMatrix single = bayes_centroids(samples, marginal);
  const auto& xs = samples.matrix();

  ExactDistortion out;
  for (int s = 0; s < samples.size(); ++s) {
    for (int y = 0; y < m; ++y) out.d1 += marginal(s, y) * (xs.row(s) - single.row(y)).squaredNorm();
    if (n >= 2) {
      for (int a = 0; a < m; ++a) {
        for (int b = 0; b < m; ++b) {
          const double pr = pair(s, static_cast<Eigen::Index>(a) * m + b);
          if (pr == 0.0) continue;
          out.d2 += pr * (xs.row(s) - single.row(a)).dot(xs.row(s) - single.row(b));
        }
      }
    }
  }
  out.d1 *= 2.0 / nn * w;
  out.d2 *= 2.0 * (nn - 1.0) / nn * w;

  Eigen::RowVectorXd centroid(dim);
  Eigen::RowVectorXd mean_ref(dim);
  for (long long idx = 0; idx < tuples; ++idx) {
    const auto col = joints.col(static_cast<Eigen::Index>(idx));
    const double mass = col.sum();
    if (!(mass > 0.0)) continue;
    centroid = (col.transpose() * xs) / mass;
    double d = 0.0;
    for (int s = 0; s < samples.size(); ++s) d += col(s) * (xs.row(s) - centroid).squaredNorm();
    out.d += 2.0 * w * d;

    decode(idx, t);
    mean_ref.setZero();
    for (int yi : t) mean_ref += single.row(yi);
    mean_ref /= nn;
    out.d3 += 2.0 * w * mass * (centroid - mean_ref).squaredNorm();
  }
  return out;
}

double stationary_form_value(const SampleSet& samples, const RowMatrix& posteriors, const RowMatrix& refs, int n) {
  check_refs(samples, posteriors, refs);
  check_firing(n);
  const double nn = n;
  double incoherent = 0.0;
  double coherent = 0.0;
  const Eigen::VectorXd norms = refs.rowwise().squaredNorm();
  for (int s = 0; s < samples.size(); ++s) {
    incoherent += posteriors.row(s).dot(norms);
    coherent += (posteriors.row(s) * refs).squaredNorm();
  }
  const double w = samples.weight();
  return -2.0 / nn * w * incoherent - 2.0 * (nn - 1.0) / nn * w * coherent;
}

StationarySolution solve_stationary_refvectors(const SampleSet& samples, const RowMatrix& posteriors, int n) {
  check_posteriors(samples, posteriors);
  check_firing(n);
  const double w = samples.weight();
  const Eigen::MatrixXd p = posteriors;
  const Eigen::VectorXd mass = w * p.colwise().sum().transpose();
  const Eigen::MatrixXd coupling = w * (p.transpose() * p);
  Eigen::MatrixXd system = static_cast<double>(n - 1) * coupling;
  system.diagonal() += mass;
  const Eigen::MatrixXd rhs = static_cast<double>(n) * w * (p.transpose() * samples.matrix());

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(system);
  const auto& sv = svd.singularValues();
  const double cond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1)
                                               : std::numeric_limits<double>::infinity();
  if (!(cond < 1e12)) {
    std::ostringstream msg;
    msg << "stationarity system is singular (condition number " << cond << ")";
    throw DegenerateInputError(msg.str());
  }
  StationarySolution out;
  out.refs = system.ldlt().solve(rhs);
  out.condition_number = cond;
  return out;
}

}  // namespace pmdnet
