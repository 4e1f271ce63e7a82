#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kcm/chain.hpp"
#include "kcm/energy.hpp"
#include "kcm/kinetostatics.hpp"
#include "kcm/qp.hpp"
#include "kcm/types.hpp"

namespace kcm {

/// Unit-conversion factor (Avogadro number times squared elementary charge
/// times 1e20, in kcal/mol) used to scale the per-joint control bounds.
constexpr double kBoundConversion = 6.022e23 * 1.602e-19 * 1.602e-19 * 1e20 / 4184.0;

/// Per-joint control bound for a given tightness scale rho.
double control_bound(double rho, int dof);

/// Weight matrix of the velocity-tracking QP: sqrt(2N) * I.
MatX ods_weight_matrix(int dof);

enum class ControlMode { kConventional, kOdsQp };
enum class InitialRule { kZeroPosition, kFixedVector, kUniformAboutMean };

struct SimulationConfig {
  double h = 0.04;
  int max_iterations = 325;
  double torque_tolerance = 1e-3;  // converged when |tau|_inf drops below
  ControlMode mode = ControlMode::kConventional;
  double rho = 20.0;
  std::uint64_t seed = 0;
  InitialRule initial_rule = InitialRule::kUniformAboutMean;
  VecX initial_vector;         // used by kFixedVector
  double initial_mean_deg = 27.7;
  double initial_std_deg = 1.1;
  int record_cadence = 1;
  int stall_window = 50;
  double stall_rel_decrease = 1e-6;

  void validate() const;
};

struct TrajectoryRecord {
  int step = 0;
  VecX theta;
  VecX tau;
  double tau_inf = 0.0;
  EnergyBreakdown energy;
  VecX control;
  int bound_active_count = 0;
  double wall_seconds = 0.0;  // measured; never serialized
};

enum class TerminationStatus { kConvergedTorque, kMaxIterations, kStalled, kSingularAbort };

const char* to_string(TerminationStatus s);

struct SimulationResult {
  std::vector<TrajectoryRecord> records;
  TerminationStatus status = TerminationStatus::kMaxIterations;
  Conformation final_conformation;
  int steps_taken = 0;
  double wall_seconds = 0.0;
  double bound_value = 0.0;  // c_i in effect (ods mode)
  std::string message;
};

/// One iteration of the compliance rule: theta + h * tau / |tau|_inf.
Conformation kcm_step(const Conformation& conf, const TorqueVector& tau, double h);

/// Control input that turns the open-loop drift into the normalized
/// reference field: tau + u = tau / |tau|_inf.
VecX kcm_control_input(const TorqueVector& tau);

/// tau / |tau|_inf for a nonzero torque vector.
VecX normalized_torque_field(const TorqueVector& tau);

/// Linear term of the velocity-tracking QP. Expanding the weighted squared
/// deviation |(tau + u) - ref|_Q^2 gives the linear coefficient Q (tau - ref).
VecX ods_linear_term_from_torques(const TorqueVector& tau, const MatX& Q);

/// Topology + force field bundled behind the per-conformation evaluations.
class FoldingSystem {
 public:
  FoldingSystem(ChainTopology topology, ForceFieldParams params);

  const ChainTopology& topology() const { return topology_; }
  const ForceFieldParams& params() const { return params_; }
  int dof() const { return topology_.dof(); }

  TorqueVector torques(const Conformation& conf) const;
  EnergyBreakdown energy(const Conformation& conf) const;
  VecX reference_vector_field(const Conformation& conf) const;
  VecX ods_linear_term(const Conformation& conf, const MatX& Q) const;
  TorqueField torque_field() const;

 private:
  ChainTopology topology_;
  ForceFieldParams params_;
};

Conformation initial_conformation(const SimulationConfig& config, int dof);

SimulationResult simulate(const FoldingSystem& system, const SimulationConfig& config);

/// Comparison of the discrete iteration against a refined-step proxy for the
/// continuous closed loop, plus the probe-based deviation bound
/// (1 + lambda)/2 * (exp(t* lambda') - 1) * h.
struct DiscretizationAudit {
  double h = 0.0;
  double t_star = 0.0;
  double lambda = 0.0;
  double lambda_prime = 0.0;
  std::vector<double> deviations;  // per shared sample time, Euclidean norm
  double max_deviation = 0.0;
  double bound = 0.0;
  bool within_bound = false;
  bool conclusive = true;
  std::string message;
};

DiscretizationAudit audit_discretization(const FoldingSystem& system,
                                         const SimulationConfig& config,
                                         int refinements, double t_star);

}  // namespace kcm
