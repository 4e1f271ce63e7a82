#include "kcm/qp.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <string>

namespace kcm {

namespace {
constexpr double kBoundTol = 1e-12;
constexpr double kKktTol = 1e-10;
}  // namespace

void BoxQP::validate() const {
  const int n = dim();
  if (n == 0) throw ValidationError("BoxQP: empty problem");
  if (Q.rows() != n || Q.cols() != n || c.size() != n) {
    throw ValidationError("BoxQP: inconsistent dimensions");
  }
  if (!Q.allFinite() || !g.allFinite() || !c.allFinite()) {
    throw ValidationError("BoxQP: non-finite input");
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Q.cwiseAbs().maxCoeff())) {
    throw ValidationError("BoxQP: Q is not symmetric");
  }
  for (int i = 0; i < n; ++i) {
    if (c[i] <= 0.0) {
      throw ValidationError("BoxQP: bound " + std::to_string(i) + " is not positive");
    }
  }
}

int QPSolution::active_count() const {
  int k = 0;
  for (BoundState s : active) k += (s != BoundState::kFree);
  return k;
}

QPSolution solve_box_qp(const BoxQP& problem) {
  problem.validate();
  const int n = problem.dim();
  const MatX& Q = problem.Q;
  const VecX& g = problem.g;
  const VecX& c = problem.c;

  {
    Eigen::LDLT<MatX> chol(Q);
    if (chol.info() != Eigen::Success || chol.vectorD().minCoeff() <= 0.0) {
      throw NumericalError("solve_box_qp: Q is not positive definite");
    }
  }

  QPSolution sol;
  sol.u = VecX::Zero(n);  // feasible start
  sol.active.assign(n, BoundState::kFree);

  const int max_iter = 20 * (n + 2);
  for (sol.iterations = 1; sol.iterations <= max_iter; ++sol.iterations) {
    // Equality-constrained candidate: active coordinates pinned at their
    // bounds, free block solved exactly.
    std::vector<int> free_idx;
    free_idx.reserve(n);
    VecX x = VecX::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (sol.active[i] == BoundState::kFree) {
        free_idx.push_back(i);
      } else {
        x[i] = (sol.active[i] == BoundState::kUpper) ? c[i] : -c[i];
      }
    }
    const int nf = static_cast<int>(free_idx.size());
    if (nf > 0) {
      MatX qff(nf, nf);
      VecX rhs(nf);
      for (int a = 0; a < nf; ++a) {
        rhs[a] = -g[free_idx[a]];
        for (int b = 0; b < nf; ++b) qff(a, b) = Q(free_idx[a], free_idx[b]);
        for (int i = 0; i < n; ++i) {
          if (sol.active[i] != BoundState::kFree) rhs[a] -= Q(free_idx[a], i) * x[i];
        }
      }
      Eigen::LDLT<MatX> chol(qff);
      if (chol.info() != Eigen::Success || chol.vectorD().minCoeff() <= 0.0) {
        throw NumericalError("solve_box_qp: reduced system is not positive definite");
      }
      const VecX xf = chol.solve(rhs);
      for (int a = 0; a < nf; ++a) x[free_idx[a]] = xf[a];
    }

    // Longest feasible step from the current iterate toward the candidate.
    double alpha = 1.0;
    int blocking = -1;
    double blocking_dir = 0.0;
    for (int i : free_idx) {
      const double d = x[i] - sol.u[i];
      if (std::abs(d) <= kBoundTol) continue;
      const double limit = (d > 0.0) ? c[i] : -c[i];
      const double a = (limit - sol.u[i]) / d;
      if (a < alpha - kBoundTol) {
        alpha = a;
        blocking = i;
        blocking_dir = d;
      }
    }

    if (blocking >= 0) {
      for (int i : free_idx) sol.u[i] += alpha * (x[i] - sol.u[i]);
      sol.active[blocking] = (blocking_dir > 0.0) ? BoundState::kUpper : BoundState::kLower;
      sol.u[blocking] = (blocking_dir > 0.0) ? c[blocking] : -c[blocking];
      continue;
    }

    sol.u = x;
    // KKT: release the active coordinate with the most negative multiplier.
    const VecX grad = Q * sol.u + g;
    const double tol = kKktTol * std::max(1.0, grad.cwiseAbs().maxCoeff());
    double worst = -tol;
    int release = -1;
    for (int i = 0; i < n; ++i) {
      if (sol.active[i] == BoundState::kFree) continue;
      const double mult = (sol.active[i] == BoundState::kUpper) ? -grad[i] : grad[i];
      if (mult < worst) {
        worst = mult;
        release = i;
      }
    }
    if (release < 0) {
      for (int i = 0; i < n; ++i) {
        if (sol.u[i] >= c[i]) {
          sol.u[i] = c[i];
          sol.active[i] = BoundState::kUpper;
        } else if (sol.u[i] <= -c[i]) {
          sol.u[i] = -c[i];
          sol.active[i] = BoundState::kLower;
        }
      }
      sol.objective = 0.5 * sol.u.dot(Q * sol.u) + g.dot(sol.u);
      return sol;
    }
    sol.active[release] = BoundState::kFree;
  }
  throw NumericalError("solve_box_qp: active-set iteration cap reached");
}

namespace {

// Dense tableau simplex, maximize obj'x subject to A x <= b, x >= 0 with
// b >= 0 (slack basis is feasible). Bland's rule, so it terminates.
struct SimplexOut {
  double value = 0.0;
  VecX x;
};

SimplexOut simplex_max(const MatX& A, const VecX& b, const VecX& obj) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  MatX tab(m + 1, n + m + 1);
  tab.setZero();
  tab.block(0, 0, m, n) = A;
  tab.block(0, n, m, m) = MatX::Identity(m, m);
  tab.block(0, n + m, m, 1) = b;
  tab.block(m, 0, 1, n) = -obj.transpose();

  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  const int pivot_cap = 10000;
  for (int iter = 0; iter < pivot_cap; ++iter) {
    int enter = -1;
    for (int j = 0; j < n + m; ++j) {
      if (tab(m, j) < -1e-12) {
        enter = j;
        break;  // Bland: lowest index
      }
    }
    if (enter < 0) {
      SimplexOut out;
      out.value = tab(m, n + m);
      out.x = VecX::Zero(n);
      for (int i = 0; i < m; ++i) {
        if (basis[i] < n) out.x[basis[i]] = tab(i, n + m);
      }
      return out;
    }
    int leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
      if (tab(i, enter) > 1e-12) {
        const double ratio = tab(i, n + m) / tab(i, enter);
        if (ratio < best - 1e-15 ||
            (ratio < best + 1e-15 && (leave < 0 || basis[i] < basis[leave]))) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) throw NumericalError("simplex: unbounded problem");
    tab.row(leave) /= tab(leave, enter);
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = tab(i, enter);
      if (f != 0.0) tab.row(i) -= f * tab.row(leave);
    }
    basis[leave] = enter;
  }
  throw NumericalError("simplex: pivot cap reached");
}

}  // namespace

FeasibilityCertificate lp_feasibility_omega(const VecX& c) {
  const int n = static_cast<int>(c.size());
  if (n == 0) throw ValidationError("lp_feasibility_omega: empty bounds vector");
  if (!c.allFinite()) throw ValidationError("lp_feasibility_omega: non-finite bound");
  for (int i = 0; i < n; ++i) {
    if (c[i] < 0.0) {
      throw ValidationError("lp_feasibility_omega: bound " + std::to_string(i) +
                            " is negative");
    }
  }

  // Variables x = [u+, u-, w+, w-]; rows stack u_i + w <= c_i then
  // -u_i + w <= c_i.
  const int nv = 2 * n + 2;
  MatX A = MatX::Zero(2 * n, nv);
  VecX b(2 * n);
  VecX obj = VecX::Zero(nv);
  obj[2 * n] = 1.0;
  obj[2 * n + 1] = -1.0;
  for (int i = 0; i < n; ++i) {
    A(2 * i, i) = 1.0;
    A(2 * i, n + i) = -1.0;
    A(2 * i, 2 * n) = 1.0;
    A(2 * i, 2 * n + 1) = -1.0;
    A(2 * i + 1, i) = -1.0;
    A(2 * i + 1, n + i) = 1.0;
    A(2 * i + 1, 2 * n) = 1.0;
    A(2 * i + 1, 2 * n + 1) = -1.0;
    b[2 * i] = c[i];
    b[2 * i + 1] = c[i];
  }
  const SimplexOut out = simplex_max(A, b, obj);

  FeasibilityCertificate cert;
  cert.omega = out.value;
  cert.w = out.x[2 * n] - out.x[2 * n + 1];
  cert.u = out.x.segment(0, n) - out.x.segment(n, n);
  return cert;
}

namespace {

// Deterministic uniform double in [0, 1) from a 64-bit generator state
// (splitmix64), identical across platforms.
struct SplitMix {
  std::uint64_t state;
  explicit SplitMix(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

}  // namespace

LipschitzEstimate lipschitz_probe(const TorqueField& field, const VecX& center,
                                  double radius, int samples, std::uint64_t seed) {
  if (radius <= 0.0) throw ValidationError("lipschitz_probe: radius must be positive");
  if (samples < 2) throw ValidationError("lipschitz_probe: need at least 2 samples");

  const int n = static_cast<int>(center.size());
  SplitMix rng(seed);
  std::vector<VecX> points;
  std::vector<VecX> values;
  points.reserve(samples);
  values.reserve(samples);

  LipschitzEstimate est;
  for (int s = 0; s < samples; ++s) {
    VecX x = center;
    if (s > 0) {
      // Per-coordinate offsets scaled so the point stays in the Euclidean ball.
      for (int i = 0; i < n; ++i) {
        x[i] += radius / std::sqrt(static_cast<double>(n)) * (2.0 * rng.uniform01() - 1.0);
      }
    }
    try {
      VecX t = field(x);
      est.lambda = std::max(est.lambda, t.norm());
      for (std::size_t p = 0; p < points.size(); ++p) {
        const double dx = (x - points[p]).norm();
        if (dx > 1e-12) {
          est.lambda_prime = std::max(est.lambda_prime, (t - values[p]).norm() / dx);
        }
      }
      points.push_back(std::move(x));
      values.push_back(std::move(t));
      ++est.samples_used;
    } catch (const SingularityError&) {
      ++est.singular_skipped;
    }
  }
  if (est.samples_used < 2) {
    throw NumericalError("lipschitz_probe: fewer than 2 usable samples");
  }
  return est;
}

}  // namespace kcm
