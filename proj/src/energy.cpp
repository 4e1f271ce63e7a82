#include "kcm/energy.hpp"

#include <cmath>
#include <string>

namespace kcm {
namespace {

std::string pair_name(int i, int j) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

// Visits each unordered interacting pair once, in a fixed order, so sums
// are deterministic.
template <typename Fn>
void for_each_pair(const KinematicState& state, const ForceFieldParams& params, Fn&& fn) {
  const int n = params.n_atoms();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (params.excluded(i, j)) continue;
      const Vec3 rij = state.atom_positions[i] - state.atom_positions[j];
      const double d = rij.norm();
      if (d < kDistanceFloor) {
        throw SingularityError("pair " + pair_name(i, j) + " at distance " +
                               std::to_string(d) + " A, below the floor");
      }
      fn(i, j, rij, d);
    }
  }
}

}  // namespace

void ForceFieldParams::validate() const {
  const int n = n_atoms();
  auto check_sym = [&](const MatX& m, const char* name) {
    if (m.rows() != n || m.cols() != n) {
      throw ValidationError(std::string("ForceFieldParams: ") + name + " has wrong shape");
    }
    if (n > 0 && (m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
      throw ValidationError(std::string("ForceFieldParams: ") + name + " is not symmetric");
    }
  };
  check_sym(coulomb_prefactor, "coulomb_prefactor");
  check_sym(charge_product, "charge_product");
  check_sym(well_depth, "well_depth");
  check_sym(vdw_distance, "vdw_distance");
  check_sym(weight_elec, "weight_elec");
  check_sym(weight_vdw, "weight_vdw");
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (vdw_distance(i, j) <= 0.0) {
        throw ValidationError("ForceFieldParams: D" + pair_name(i, j) + " <= 0");
      }
      if (weight_elec(i, j) < 0.0 || weight_vdw(i, j) < 0.0) {
        throw ValidationError("ForceFieldParams: negative weight at " + pair_name(i, j));
      }
    }
  }
}

ForceFieldParams ForceFieldParams::from_topology(
    const ChainTopology& topology, double dielectric, double w_elec, double w_vdw,
    std::vector<std::pair<int, int>> excl) {
  if (dielectric <= 0.0) {
    throw ValidationError("ForceFieldParams: dielectric must be positive");
  }
  const int n = topology.n_atoms();
  ForceFieldParams p;
  p.coulomb_prefactor = MatX::Constant(n, n, kCoulombConstant / dielectric);
  p.weight_elec = MatX::Constant(n, n, w_elec);
  p.weight_vdw = MatX::Constant(n, n, w_vdw);
  p.charge_product.resize(n, n);
  p.well_depth.resize(n, n);
  p.vdw_distance.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const AtomRecord& a = topology.atom(i);
      const AtomRecord& b = topology.atom(j);
      p.charge_product(i, j) = a.charge * b.charge;
      p.well_depth(i, j) = std::sqrt(a.well_depth * b.well_depth);
      p.vdw_distance(i, j) = a.vdw_radius + b.vdw_radius;
    }
  }
  p.excluded.setConstant(n, n, false);
  for (auto& [i, j] : excl) {
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
      throw ValidationError("ForceFieldParams: bad exclusion pair " + pair_name(i, j));
    }
    p.excluded(i, j) = p.excluded(j, i) = true;
  }
  p.exclusions = std::move(excl);
  p.validate();
  return p;
}

double electrostatic_energy(const KinematicState& state, const ForceFieldParams& params) {
  double e = 0.0;
  for_each_pair(state, params, [&](int i, int j, const Vec3&, double d) {
    e += params.weight_elec(i, j) * params.coulomb_prefactor(i, j) *
         params.charge_product(i, j) / d;
  });
  return e;
}

double vdw_energy(const KinematicState& state, const ForceFieldParams& params) {
  double e = 0.0;
  for_each_pair(state, params, [&](int i, int j, const Vec3&, double d) {
    const double s6 = std::pow(params.vdw_distance(i, j) / d, 6);
    e += params.weight_vdw(i, j) * params.well_depth(i, j) * (s6 * s6 - 2.0 * s6);
  });
  return e;
}

EnergyBreakdown total_energy(const KinematicState& state, const ForceFieldParams& params) {
  EnergyBreakdown b;
  b.electrostatic = electrostatic_energy(state, params);
  b.van_der_waals = vdw_energy(state, params);
  b.total = b.electrostatic + b.van_der_waals;
  return b;
}

AtomForces atom_forces(const KinematicState& state, const ForceFieldParams& params) {
  AtomForces f;
  f.electrostatic.assign(params.n_atoms(), Vec3::Zero());
  f.van_der_waals.assign(params.n_atoms(), Vec3::Zero());
  for_each_pair(state, params, [&](int i, int j, const Vec3& rij, double d) {
    const Vec3 unit = rij / d;
    // d/dd of (prefactor q_i q_j / d) is -prefactor q_i q_j / d^2; the force
    // on atom i is minus that along the pair axis.
    const double fe = params.weight_elec(i, j) * params.coulomb_prefactor(i, j) *
                      params.charge_product(i, j) / (d * d);
    f.electrostatic[i] += fe * unit;
    f.electrostatic[j] -= fe * unit;
    const double dd = params.vdw_distance(i, j);
    const double fv = 12.0 * params.weight_vdw(i, j) * params.well_depth(i, j) *
                      (std::pow(dd, 12) / std::pow(d, 13) -
                       std::pow(dd, 6) / std::pow(d, 7));
    f.van_der_waals[i] += fv * unit;
    f.van_der_waals[j] -= fv * unit;
  });
  return f;
}

}  // namespace kcm
