#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kcm/types.hpp"

namespace kcm {

/// minimize 1/2 u'Qu + g'u  subject to |u_i| <= c_i, with Q symmetric
/// positive definite and c > 0.
struct BoxQP {
  MatX Q;
  VecX g;
  VecX c;

  int dim() const { return static_cast<int>(g.size()); }
  void validate() const;
};

enum class BoundState : std::int8_t { kFree = 0, kLower = -1, kUpper = 1 };

struct QPSolution {
  VecX u;
  double objective = 0.0;
  std::vector<BoundState> active;
  int iterations = 0;

  int active_count() const;
};

/// Primal active-set solver. Exact on the diagonal case (clamp closed form);
/// deterministic: ties break toward the lowest coordinate index, and a
/// coordinate landing exactly on a bound is reported active.
QPSolution solve_box_qp(const BoxQP& problem);

/// Certificate for the feasibility probe: maximize w subject to
/// u_i + w <= c_i and -u_i + w <= c_i. Solved with a dense simplex; for
/// this constraint structure the optimum is min_i c_i at u = 0.
struct FeasibilityCertificate {
  double omega = 0.0;
  VecX u;
  double w = 0.0;

  bool positive() const { return omega > 0.0; }
};

FeasibilityCertificate lp_feasibility_omega(const VecX& c);

/// Sampled estimates of sup |field| (lambda) and of a local Lipschitz
/// constant (lambda_prime) of a torque field inside a Euclidean ball.
/// Samples are generated sequentially from the seed, so estimates are
/// monotone nondecreasing in the sample count.
struct LipschitzEstimate {
  double lambda = 0.0;
  double lambda_prime = 0.0;
  int samples_used = 0;
  int singular_skipped = 0;
};

using TorqueField = std::function<VecX(const VecX&)>;

LipschitzEstimate lipschitz_probe(const TorqueField& field, const VecX& center,
                                  double radius, int samples,
                                  std::uint64_t seed = 0);

}  // namespace kcm
