#include "nanomag/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

#include "nanomag/errors.hpp"

namespace nanomag {

Eigen::VectorXd DirectionField::stacked() const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(3 * n.size()));
  for (std::size_t i = 0; i < n.size(); ++i) v.segment<3>(static_cast<Eigen::Index>(3 * i)) = n[i];
  return v;
}

DirectionField DirectionField::from_stacked(const Eigen::VectorXd& v) {
  DirectionField f;
  const auto sites = static_cast<std::size_t>(v.size() / 3);
  f.n.resize(sites);
  for (std::size_t i = 0; i < sites; ++i) {
    Eigen::Vector3d x = v.segment<3>(static_cast<Eigen::Index>(3 * i));
    const double nrm = x.norm();
    f.n[i] = nrm > 1e-12 ? Eigen::Vector3d(x / nrm) : Eigen::Vector3d::UnitZ();
  }
  return f;
}

DirectionField DirectionField::staggered_z(const SpinCluster& cluster) {
  DirectionField f;
  for (const auto& s : cluster.sites()) {
    f.n.push_back(s.sublattice == Sublattice::A ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d(-Eigen::Vector3d::UnitZ()));
  }
  return f;
}

double variance_of_field(const CorrelationData& data, const DirectionField& field) {
  if (field.n.size() != data.n_sites()) throw InvalidInput("field size does not match the cluster");
  const Eigen::VectorXd n = field.stacked();
  const double mean = data.b.dot(n);
  return n.dot(data.C * n) - mean * mean;
}

FisherResult evaluate_field(const CorrelationData& data, const DirectionField& field) {
  const Eigen::VectorXd n = field.stacked();
  FisherResult r;
  r.field = field;
  r.mean = data.b.dot(n);
  r.second_moment = n.dot(data.C * n);
  r.variance = r.second_moment - r.mean * r.mean;
  r.F = 4.0 * r.variance;
  r.d_fi = r.variance / data.cluster->total_spin_max().value();
  r.converged = true;
  return r;
}

Eigen::Vector3d solve_site(const Eigen::Matrix3d& Q, const Eigen::Vector3d& p, const Eigen::Vector3d& incumbent) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(Q);
  // Descending order: q[0] is the largest eigenvalue.
  Eigen::Vector3d q;
  Eigen::Matrix3d U;
  for (int k = 0; k < 3; ++k) {
    q[k] = es.eigenvalues()[2 - k];
    U.col(k) = es.eigenvectors().col(2 - k);
  }
  const Eigen::Vector3d pt = U.transpose() * p;
  const double pn = p.norm();
  const double eps = 1e-12 * (std::abs(q[0]) + pn + 1.0);

  int top = 1;
  while (top < 3 && q[0] - q[top] <= eps) ++top;
  double p_top = 0.0;
  for (int k = 0; k < top; ++k) p_top += pt[k] * pt[k];
  p_top = std::sqrt(p_top);

  auto secular = [&](double lam) {
    double f = 0.0;
    for (int k = 0; k < 3; ++k) {
      const double d = lam - q[k];
      f += pt[k] * pt[k] / (d * d);
    }
    return f;
  };
  auto solve_secular = [&]() -> Eigen::Vector3d {
    // f is decreasing on (q0, inf) and f(q0 + |p|) <= 1.
    double lo = q[0];
    double hi = q[0] + pn;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (std::abs(hi) + 1.0); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= q[0] || secular(mid) > 1.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    Eigen::Vector3d y;
    for (int k = 0; k < 3; ++k) y[k] = pt[k] / (hi - q[k]);
    Eigen::Vector3d x = U * y;
    return x / x.norm();
  };

  if (p_top > 1e-13 * (pn + 1.0)) return solve_secular();

  // p has no weight on the top eigenspace.
  Eigen::Vector3d r = Eigen::Vector3d::Zero();
  for (int k = top; k < 3; ++k) r += pt[k] / (q[0] - q[k]) * U.col(k);
  if (r.norm() > 1.0) return solve_secular();

  // Hard case: lambda = q0, free component inside the top eigenspace. Follow
  // the incumbent there so degenerate sites keep their direction.
  Eigen::Vector3d t = Eigen::Vector3d::Zero();
  for (int k = 0; k < top; ++k) t += U.col(k).dot(incumbent) * U.col(k);
  if (t.norm() < 1e-12) t = U.col(0);
  t.normalize();
  const double tau = std::sqrt(std::max(0.0, 1.0 - r.squaredNorm()));
  Eigen::Vector3d x = r + tau * t;
  return x / x.norm();
}

DirectionField ascend(const Eigen::MatrixXd& K, DirectionField f, double tol, std::size_t max_sweeps,
                      std::vector<double>* values, bool* converged) {
  const std::size_t n = f.n.size();
  Eigen::VectorXd x = f.stacked();
  double prev = x.dot(K * x);
  if (converged) *converged = false;
  for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      const auto o = static_cast<Eigen::Index>(3 * i);
      const Eigen::Matrix3d Q = K.block<3, 3>(o, o);
      const Eigen::Vector3d p = K.middleRows<3>(o) * x - Q * x.segment<3>(o);
      const Eigen::Vector3d ni = solve_site(Q, p, x.segment<3>(o));
      x.segment<3>(o) = ni;
    }
    const double cur = x.dot(K * x);
    if (values) values->push_back(cur);
    const double gain = cur - prev;
    prev = cur;
    if (gain <= tol * std::max(std::abs(cur), 1e-300)) {
      if (converged) *converged = true;
      break;
    }
  }
  return DirectionField::from_stacked(x);
}

namespace {

DirectionField random_field(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::VectorXd v(static_cast<Eigen::Index>(3 * n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = g(rng);
  return DirectionField::from_stacked(v);
}

double quad(const Eigen::MatrixXd& K, const DirectionField& f) {
  const Eigen::VectorXd x = f.stacked();
  return x.dot(K * x);
}

}  // namespace

FisherResult maximize_fisher(const CorrelationData& data, const FisherOptions& opts) {
  const Eigen::MatrixXd K = data.covariance();
  const std::size_t n = data.n_sites();

  std::vector<DirectionField> starts;
  starts.push_back(DirectionField::staggered_z(*data.cluster));
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
    starts.push_back(DirectionField::from_stacked(es.eigenvectors().col(K.rows() - 1)));
  }
  std::mt19937_64 rng(opts.seed);
  for (std::size_t r = 0; r < opts.random_starts; ++r) starts.push_back(random_field(n, rng));
  for (const auto& f : opts.extra_starts) {
    if (f.n.size() != n) throw InvalidInput("extra start field has the wrong size");
    starts.push_back(f);
  }

  std::vector<DirectionField> finals(starts.size());
  std::vector<double> vals(starts.size());
  std::vector<char> conv(starts.size());
  std::size_t total_sweeps = 0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    std::vector<double> trace;
    bool c = false;
    finals[s] = ascend(K, starts[s], opts.tol, opts.max_sweeps, &trace, &c);
    vals[s] = quad(K, finals[s]);
    conv[s] = c;
    total_sweeps += trace.size();
  }
  std::size_t best = 0;
  for (std::size_t s = 1; s < starts.size(); ++s)
    if (vals[s] > vals[best] * (1.0 + 1e-12) + 1e-300) best = s;

  DirectionField chosen = finals[best];
  bool tie = false;
  if (opts.component_cov1 && opts.component_cov2) {
    const Eigen::MatrixXd Kbar = 0.5 * (*opts.component_cov1 + *opts.component_cov2);
    const double vmax = vals[best];
    double best_bar = quad(Kbar, chosen);
    for (std::size_t s = 0; s < starts.size(); ++s) {
      if (vals[s] < vmax * (1.0 - 1e-6)) continue;
      DirectionField f = finals[s];
      // Continuation: a small penalty pulls the field along the maximizer set
      // towards low component variance; shrinking it returns to the top.
      for (double w : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) f = ascend(K - w * Kbar, f, opts.tol, opts.max_sweeps);
      const double v = quad(K, f);
      const double vb = quad(Kbar, f);
      if (v >= vmax * (1.0 - opts.tie_rel_tol) && vb < best_bar * (1.0 - 1e-9)) {
        chosen = f;
        best_bar = vb;
        tie = true;
      }
    }
  }

  FisherResult res = evaluate_field(data, chosen);
  res.converged = conv[best] != 0;
  res.restarts_used = starts.size();
  res.sweeps = total_sweeps;
  res.tie_break_applied = tie;
  return res;
}

double fisher_max(const SpinCluster& cluster) {
  const double s = cluster.total_spin_max().value();
  return 4.0 * s * s;
}

std::pair<QuantumState, QuantumState> psi_max_states(ClusterPtr cluster) {
  const HalfInt SA = cluster->sublattice_spin_max(Sublattice::A);
  const HalfInt SB = cluster->sublattice_spin_max(Sublattice::B);
  auto build = [&](int sign) {
    const HalfInt M{sign * (SA.twice - SB.twice)};
    auto basis = SectorBasis::enumerate(cluster, M);
    std::vector<std::uint8_t> dev(cluster->size());
    for (std::size_t i = 0; i < cluster->size(); ++i) {
      const bool up = (cluster->site(i).sublattice == Sublattice::A) == (sign > 0);
      dev[i] = static_cast<std::uint8_t>(up ? 0 : cluster->two_s(i));
    }
    CVec amps(basis->dimension(), cplx{});
    amps[basis->index_of(dev)] = 1.0;
    return make_state(basis, std::move(amps));
  };
  return {build(+1), build(-1)};
}

RfiResult d_rfi(const CorrelationData& psi, const CorrelationData& comp1, const CorrelationData& comp2,
                const DirectionField& field) {
  RfiResult r;
  r.v_psi = variance_of_field(psi, field);
  r.v_comp1 = variance_of_field(comp1, field);
  r.v_comp2 = variance_of_field(comp2, field);
  const double mean = 0.5 * (r.v_comp1 + r.v_comp2);
  const double stot = psi.cluster->total_spin_max().value();
  r.d_fi_components = mean / stot;
  if (mean <= 1e-12 * std::max(1.0, stot * stot)) {
    r.divergent = true;
    r.value = INFINITY;
  } else {
    r.value = r.v_psi / mean;
  }
  return r;
}

namespace {

double log_binom(int n, int k) { return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0); }

// Highest-weight coefficients c(m_B) of |S_P, S_Q; S = S_P - S_Q, M = S>,
// indexed by 2 m_Q from -2 S_Q upward. P is the larger sublattice.
std::vector<double> highest_weight(int twoP, int twoQ) {
  const int twoS = twoP - twoQ;
  std::vector<double> c;
  c.push_back(1.0);
  for (int tb = -twoQ + 2; tb <= twoQ; tb += 2) {
    // c(b) = -c(b-1) lambda_Q+(b-1) / lambda_P+(S-b)
    const double num = ladder_coefficient(twoQ, tb - 2, +1);
    const double den = ladder_coefficient(twoP, twoS - tb, +1);
    c.push_back(-c.back() * num / den);
  }
  double nrm = 0.0;
  for (double x : c) nrm += x * x;
  for (double& x : c) x /= std::sqrt(nrm);
  return c;
}

}  // namespace

QuantumState ideal_ferrimagnet_state(ClusterPtr cluster, int sign) {
  const int twoA = cluster->sublattice_spin_max(Sublattice::A).twice;
  const int twoB = cluster->sublattice_spin_max(Sublattice::B).twice;
  const Sublattice P = twoA >= twoB ? Sublattice::A : Sublattice::B;
  const int twoP = std::max(twoA, twoB);
  const int twoQ = std::min(twoA, twoB);
  const int twoS = twoP - twoQ;
  const std::vector<double> c = highest_weight(twoP, twoQ);

  // Build |S, +S> and flip every site for -S (a global phase away from the
  // pi rotation about y).
  auto basis = SectorBasis::enumerate(cluster, HalfInt{sign >= 0 ? twoS : -twoS});
  CVec amps(basis->dimension(), cplx{});
  for (std::size_t idx = 0; idx < basis->dimension(); ++idx) {
    int KP = 0;
    int KQ = 0;
    double logw = 0.0;
    for (std::size_t i = 0; i < cluster->size(); ++i) {
      int k = basis->deviation(idx, i);
      if (sign < 0) k = cluster->two_s(i) - k;
      logw += log_binom(cluster->two_s(i), k);
      if (cluster->site(i).sublattice == P) {
        KP += k;
      } else {
        KQ += k;
      }
    }
    // m_Q = S_Q - K_Q; c is indexed from m_Q = -S_Q.
    const int twoMQ = twoQ - 2 * KQ;
    const int twoMP = twoP - 2 * KP;
    if (twoMP + twoMQ != twoS) continue;
    const auto ci = static_cast<std::size_t>((twoMQ + twoQ) / 2);
    logw -= log_binom(twoP, KP) + log_binom(twoQ, KQ);
    amps[idx] = c[ci] * std::exp(0.5 * logw);
  }
  return make_state(basis, std::move(amps));
}

IdealSizes ideal_ferrimagnet_sizes(const SpinCluster& cluster) {
  const int twoA = cluster.sublattice_spin_max(Sublattice::A).twice;
  const int twoB = cluster.sublattice_spin_max(Sublattice::B).twice;
  const int twoP = std::max(twoA, twoB);
  const int twoQ = std::min(twoA, twoB);
  const int twoS = twoP - twoQ;
  IdealSizes out;
  out.S = HalfInt{twoS};
  out.d_lm_bound = static_cast<int>(cluster.size());
  const std::vector<double> c = highest_weight(twoP, twoQ);
  // X = S_z^P - S_z^Q = S - 2 m_Q on the M = S component; the M = -S
  // component mirrors it, so <X> vanishes on the superposition.
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t t = 0; t < c.size(); ++t) {
    const double mQ = -0.5 * twoQ + static_cast<double>(t);
    const double X = 0.5 * twoS - 2.0 * mQ;
    m1 += c[t] * c[t] * X;
    m2 += c[t] * c[t] * X * X;
  }
  const double var = m2 - m1 * m1;
  out.d_fi = m2 / cluster.total_spin_max().value();
  if (var <= 1e-12 * std::max(1.0, m2)) {
    out.d_rfi_divergent = true;
    out.d_rfi = INFINITY;
  } else {
    out.d_rfi = m2 / var;
  }
  return out;
}

}  // namespace nanomag
