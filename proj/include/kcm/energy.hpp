#pragma once

#include <utility>
#include <vector>

#include "kcm/chain.hpp"
#include "kcm/types.hpp"

namespace kcm {

/// Coulomb energy constant in kcal*Angstrom/(mol*e^2); the per-pair
/// prefactor stored below is this constant divided by the relative
/// dielectric, so the electrostatic term is prefactor * q_i q_j / d.
constexpr double kCoulombConstant = 332.0636;

/// Distances below this floor abort the evaluation instead of returning
/// astronomically large 12-6 terms.
constexpr double kDistanceFloor = 1e-3;

/// Pairwise force-field tables. Symmetric; diagonals unused.
/// Interactions are summed once per unordered pair, and the bundled
/// parameter files are calibrated to that convention.
struct ForceFieldParams {
  MatX coulomb_prefactor;  // 1/(4 pi eps_ij), units folded in
  MatX charge_product;     // q_i * q_j, e^2
  MatX well_depth;         // pairwise 12-6 well depth, kcal/mol
  MatX vdw_distance;       // D_ij = R_i + R_j, Angstrom
  MatX weight_elec;
  MatX weight_vdw;
  std::vector<std::pair<int, int>> exclusions;
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> excluded;

  int n_atoms() const { return static_cast<int>(coulomb_prefactor.rows()); }
  void validate() const;

  /// Uniform tables from per-atom records: D_ij = R_i + R_j, pairwise well
  /// depth sqrt(eps_i eps_j), one prefactor and weight for every pair.
  static ForceFieldParams from_topology(const ChainTopology& topology,
                                        double dielectric, double w_elec,
                                        double w_vdw,
                                        std::vector<std::pair<int, int>> excl);
};

struct EnergyBreakdown {
  double total = 0.0;
  double electrostatic = 0.0;
  double van_der_waals = 0.0;
};

struct AtomForces {
  std::vector<Vec3> electrostatic;
  std::vector<Vec3> van_der_waals;

  int n_atoms() const { return static_cast<int>(electrostatic.size()); }
  Vec3 total(int i) const { return electrostatic[i] + van_der_waals[i]; }
};

double electrostatic_energy(const KinematicState& state, const ForceFieldParams& params);
double vdw_energy(const KinematicState& state, const ForceFieldParams& params);
EnergyBreakdown total_energy(const KinematicState& state, const ForceFieldParams& params);

/// Analytic -grad_r of the two pair potentials, per atom.
AtomForces atom_forces(const KinematicState& state, const ForceFieldParams& params);

}  // namespace kcm
