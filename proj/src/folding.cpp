#include "kcm/folding.hpp"

#include <chrono>
#include <cmath>
#include <deque>

namespace kcm {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

// splitmix64; keeps artifacts byte-identical across platforms.
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

double control_bound(double rho, int dof) {
  if (rho <= 0.0) throw ValidationError("control_bound: rho must be positive");
  return kBoundConversion * rho / std::sqrt(static_cast<double>(dof));
}

MatX ods_weight_matrix(int dof) {
  return std::sqrt(static_cast<double>(dof)) * MatX::Identity(dof, dof);
}

void SimulationConfig::validate() const {
  if (h <= 0.0) throw ValidationError("SimulationConfig: h must be positive");
  if (max_iterations < 1) throw ValidationError("SimulationConfig: max_iterations < 1");
  if (torque_tolerance < 0.0) throw ValidationError("SimulationConfig: negative tolerance");
  if (mode == ControlMode::kOdsQp && rho <= 0.0) {
    throw ValidationError("SimulationConfig: rho must be positive in ods-qp mode");
  }
  if (record_cadence < 1) throw ValidationError("SimulationConfig: record_cadence < 1");
  if (stall_window < 2) throw ValidationError("SimulationConfig: stall_window < 2");
}

const char* to_string(TerminationStatus s) {
  switch (s) {
    case TerminationStatus::kConvergedTorque: return "converged";
    case TerminationStatus::kMaxIterations: return "budget-exhausted";
    case TerminationStatus::kStalled: return "stalled";
    case TerminationStatus::kSingularAbort: return "singular-abort";
  }
  return "unknown";
}

Conformation kcm_step(const Conformation& conf, const TorqueVector& tau, double h) {
  const double tinf = tau.cwiseAbs().maxCoeff();
  if (tinf == 0.0) {
    throw ValidationError("kcm_step: zero torque vector signals convergence, not a step");
  }
  return Conformation(conf.theta + (h / tinf) * tau);
}

VecX kcm_control_input(const TorqueVector& tau) {
  const double tinf = tau.cwiseAbs().maxCoeff();
  if (tinf == 0.0) throw ValidationError("kcm_control_input: zero torque vector");
  return ((1.0 - tinf) / tinf) * tau;
}

VecX normalized_torque_field(const TorqueVector& tau) {
  const double tinf = tau.cwiseAbs().maxCoeff();
  if (tinf == 0.0) throw ValidationError("normalized_torque_field: zero torque vector");
  return tau / tinf;
}

VecX ods_linear_term_from_torques(const TorqueVector& tau, const MatX& Q) {
  return Q * (tau - normalized_torque_field(tau));
}

FoldingSystem::FoldingSystem(ChainTopology topology, ForceFieldParams params)
    : topology_(std::move(topology)), params_(std::move(params)) {
  params_.validate();
  if (params_.n_atoms() != topology_.n_atoms()) {
    throw ValidationError("FoldingSystem: parameter tables sized for " +
                          std::to_string(params_.n_atoms()) + " atoms, chain has " +
                          std::to_string(topology_.n_atoms()));
  }
}

TorqueVector FoldingSystem::torques(const Conformation& conf) const {
  const KinematicState state = forward_kinematics(topology_, conf);
  const AtomForces forces = atom_forces(state, params_);
  return joint_torques(state, forces, topology_);
}

EnergyBreakdown FoldingSystem::energy(const Conformation& conf) const {
  return total_energy(forward_kinematics(topology_, conf), params_);
}

VecX FoldingSystem::reference_vector_field(const Conformation& conf) const {
  return normalized_torque_field(torques(conf));
}

VecX FoldingSystem::ods_linear_term(const Conformation& conf, const MatX& Q) const {
  return ods_linear_term_from_torques(torques(conf), Q);
}

TorqueField FoldingSystem::torque_field() const {
  return [this](const VecX& theta) { return torques(Conformation(theta)); };
}

Conformation initial_conformation(const SimulationConfig& config, int dof) {
  switch (config.initial_rule) {
    case InitialRule::kZeroPosition:
      return Conformation::zeros(dof);
    case InitialRule::kFixedVector:
      if (config.initial_vector.size() != dof) {
        throw ValidationError("initial_conformation: fixed vector has length " +
                              std::to_string(config.initial_vector.size()) +
                              ", chain needs " + std::to_string(dof));
      }
      return Conformation(config.initial_vector);
    case InitialRule::kUniformAboutMean: {
      // Uniform with the requested mean and standard deviation: half-width
      // is sqrt(3) times the standard deviation.
      SplitMix rng(config.seed);
      const double half = std::sqrt(3.0) * config.initial_std_deg;
      VecX theta(dof);
      constexpr double kDegToRad = M_PI / 180.0;
      for (int i = 0; i < dof; ++i) {
        const double deg = config.initial_mean_deg + half * (2.0 * rng.uniform01() - 1.0);
        theta[i] = deg * kDegToRad;
      }
      return Conformation(theta);
    }
  }
  throw ValidationError("initial_conformation: unknown rule");
}

SimulationResult simulate(const FoldingSystem& system, const SimulationConfig& config) {
  config.validate();
  const int dof = system.dof();
  const double t_begin = now_seconds();

  SimulationResult result;
  Conformation conf = initial_conformation(config, dof);

  const bool ods = config.mode == ControlMode::kOdsQp;
  MatX Q;
  VecX c;
  if (ods) {
    Q = ods_weight_matrix(dof);
    result.bound_value = control_bound(config.rho, dof);
    c = VecX::Constant(dof, result.bound_value);
  }

  // Stall bookkeeping: best |tau|_inf of the last two non-overlapping
  // windows plus the per-step count of active bounds.
  std::deque<double> tau_window;
  std::deque<int> bind_window;
  double prev_window_best = -1.0;

  auto record_step = [&](int k, const VecX& tau, double tinf,
                         const EnergyBreakdown& e, const VecX& u, int binds,
                         double wall) {
    if (k % config.record_cadence == 0 || tinf < config.torque_tolerance) {
      TrajectoryRecord r;
      r.step = k;
      r.theta = conf.theta;
      r.tau = tau;
      r.tau_inf = tinf;
      r.energy = e;
      r.control = u;
      r.bound_active_count = binds;
      r.wall_seconds = wall;
      result.records.push_back(std::move(r));
    }
  };

  result.status = TerminationStatus::kMaxIterations;
  int k = 0;
  for (; k < config.max_iterations; ++k) {
    const double t_step = now_seconds();
    VecX tau;
    EnergyBreakdown e;
    try {
      tau = system.torques(conf);
      e = system.energy(conf);
    } catch (const SingularityError& err) {
      result.status = TerminationStatus::kSingularAbort;
      result.message = "step " + std::to_string(k) + ": " + err.what();
      break;
    }
    const double tinf = tau.cwiseAbs().maxCoeff();

    if (tinf < config.torque_tolerance) {
      record_step(k, tau, tinf, e, VecX::Zero(dof), 0, now_seconds() - t_step);
      result.status = TerminationStatus::kConvergedTorque;
      break;
    }

    VecX u;
    VecX delta;
    int binds = 0;
    if (!ods) {
      u = kcm_control_input(tau);
      delta = (config.h / tinf) * tau;
    } else {
      BoxQP qp{Q, ods_linear_term_from_torques(tau, Q), c};
      const QPSolution sol = solve_box_qp(qp);
      u = sol.u;
      binds = sol.active_count();
      const VecX v = tau + u;
      delta = config.h * v / std::max(1.0, v.cwiseAbs().maxCoeff());
    }
    record_step(k, tau, tinf, e, u, binds, now_seconds() - t_step);

    if (ods) {
      tau_window.push_back(tinf);
      bind_window.push_back(binds);
      if (static_cast<int>(tau_window.size()) > config.stall_window) {
        tau_window.pop_front();
        bind_window.pop_front();
      }
      if (static_cast<int>(tau_window.size()) == config.stall_window &&
          (k + 1) % config.stall_window == 0) {
        double best = tau_window[0];
        int min_binds = bind_window[0];
        for (std::size_t i = 1; i < tau_window.size(); ++i) {
          best = std::min(best, tau_window[i]);
          min_binds = std::min(min_binds, bind_window[i]);
        }
        const bool no_progress = prev_window_best >= 0.0 &&
                                 best >= (1.0 - config.stall_rel_decrease) * prev_window_best;
        if (no_progress && 2 * min_binds >= dof) {
          result.status = TerminationStatus::kStalled;
          result.message = "no relative |tau|_inf decrease over " +
                           std::to_string(config.stall_window) +
                           " steps with bounds binding on " +
                           std::to_string(min_binds) + "/" + std::to_string(dof) +
                           " coordinates";
          ++k;
          break;
        }
        prev_window_best = best;
      }
    }

    conf = Conformation(conf.theta + delta);
  }

  result.steps_taken = k;
  result.final_conformation = conf;
  result.wall_seconds = now_seconds() - t_begin;
  return result;
}

DiscretizationAudit audit_discretization(const FoldingSystem& system,
                                         const SimulationConfig& config,
                                         int refinements, double t_star) {
  config.validate();
  if (refinements < 1 || refinements > 16) {
    throw ValidationError("audit_discretization: refinements must be in 1..16");
  }
  if (t_star <= 0.0) throw ValidationError("audit_discretization: t* must be positive");

  DiscretizationAudit audit;
  audit.h = config.h;
  audit.t_star = t_star;

  const int dof = system.dof();
  const Conformation start = initial_conformation(config, dof);
  const int steps = static_cast<int>(std::floor(t_star / config.h));

  try {
    // Discrete iteration at step h.
    std::vector<VecX> coarse;
    coarse.reserve(steps + 1);
    Conformation conf = start;
    coarse.push_back(conf.theta);
    double span = 0.0;
    for (int k = 0; k < steps; ++k) {
      const VecX tau = system.torques(conf);
      const double tinf = tau.cwiseAbs().maxCoeff();
      if (tinf == 0.0) throw NumericalError("zero torque on the discrete path");
      conf = Conformation(conf.theta + (config.h / tinf) * tau);
      coarse.push_back(conf.theta);
      span = std::max(span, (conf.theta - start.theta).norm());
    }

    // Refined-step proxy for the continuous closed loop (the normalized
    // torque field), sampled at the shared times h*k.
    const int sub = 1 << refinements;
    const double hf = config.h / sub;
    VecX theta = start.theta;
    std::vector<VecX> fine;
    fine.reserve(steps + 1);
    fine.push_back(theta);
    for (int k = 0; k < steps; ++k) {
      for (int s = 0; s < sub; ++s) {
        const VecX tau = system.torques(Conformation(theta));
        const double tinf = tau.cwiseAbs().maxCoeff();
        if (tinf == 0.0) throw NumericalError("zero torque on the proxy path");
        theta += (hf / tinf) * tau;
        span = std::max(span, (theta - start.theta).norm());
      }
      fine.push_back(theta);
    }

    audit.deviations.resize(steps + 1);
    for (int k = 0; k <= steps; ++k) {
      audit.deviations[k] = (fine[k] - coarse[k]).norm();
      audit.max_deviation = std::max(audit.max_deviation, audit.deviations[k]);
    }

    const LipschitzEstimate est = lipschitz_probe(system.torque_field(), start.theta,
                                                  span + config.h, 64, config.seed);
    audit.lambda = est.lambda;
    audit.lambda_prime = est.lambda_prime;
    audit.bound = 0.5 * (1.0 + audit.lambda) * std::expm1(t_star * audit.lambda_prime) *
                  config.h;
    audit.within_bound = audit.max_deviation <= audit.bound;
  } catch (const std::exception& err) {
    audit.conclusive = false;
    audit.message = err.what();
  }
  return audit;
}

}  // namespace kcm
