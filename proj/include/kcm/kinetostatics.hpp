#pragma once

#include <vector>

#include "kcm/chain.hpp"
#include "kcm/energy.hpp"
#include "kcm/types.hpp"

namespace kcm {

/// Resultant force and moment of one rigid link about its reference point.
struct LinkWrench {
  Vec3 force = Vec3::Zero();
  Vec3 moment = Vec3::Zero();
};

/// Stacked per-link wrenches. Row layout of stacked(): link-major, the three
/// force rows before the three moment rows of each link.
struct GeneralizedForces {
  std::vector<LinkWrench> wrenches;
  std::vector<Vec3> reference_points;

  int n_links() const { return static_cast<int>(wrenches.size()); }
  VecX stacked() const;
};

/// 6L x 2N chain Jacobian. Column j carries, for every link downstream of
/// joint j, the linear part u_j x (p_link - a_j) in the force rows and the
/// angular part u_j in the moment rows; upstream blocks are zero.
struct ChainJacobian {
  MatX matrix;
  std::vector<Vec3> reference_points;
};

using TorqueVector = VecX;

GeneralizedForces assemble_generalized_forces(const KinematicState& state,
                                              const AtomForces& forces,
                                              const ChainTopology& topology);

ChainJacobian chain_jacobian(const KinematicState& state,
                             const ChainTopology& topology);

/// Joint torques by the direct per-atom cross-product sum; equals
/// chain_jacobian(...).matrix.transpose() * generalized forces.
TorqueVector joint_torques(const KinematicState& state, const AtomForces& forces,
                           const ChainTopology& topology);

}  // namespace kcm
