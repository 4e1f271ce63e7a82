#include "kcm/kinetostatics.hpp"

namespace kcm {

VecX GeneralizedForces::stacked() const {
  VecX f(6 * n_links());
  for (int l = 0; l < n_links(); ++l) {
    f.segment<3>(6 * l) = wrenches[l].force;
    f.segment<3>(6 * l + 3) = wrenches[l].moment;
  }
  return f;
}

GeneralizedForces assemble_generalized_forces(const KinematicState& state,
                                              const AtomForces& forces,
                                              const ChainTopology& topology) {
  if (forces.n_atoms() != topology.n_atoms()) {
    throw ValidationError("assemble_generalized_forces: force count mismatch");
  }
  GeneralizedForces g;
  g.wrenches.resize(topology.n_links());
  g.reference_points.resize(topology.n_links());
  for (int l = 0; l < topology.n_links(); ++l) {
    const Vec3 ref = state.chain_points[topology.link_reference_point(l)];
    g.reference_points[l] = ref;
    for (int a : topology.link_atoms()[l]) {
      const Vec3 f = forces.total(a);
      g.wrenches[l].force += f;
      g.wrenches[l].moment += (state.atom_positions[a] - ref).cross(f);
    }
  }
  return g;
}

ChainJacobian chain_jacobian(const KinematicState& state,
                             const ChainTopology& topology) {
  const int nl = topology.n_links();
  const int nb = topology.dof();
  ChainJacobian jac;
  jac.matrix = MatX::Zero(6 * nl, nb);
  jac.reference_points.resize(nl);
  for (int l = 0; l < nl; ++l) {
    jac.reference_points[l] = state.chain_points[topology.link_reference_point(l)];
  }
  for (int j = 1; j <= nb; ++j) {
    const Vec3& axis = state.axes[j - 1];
    const Vec3& anchor = state.chain_points[j - 1];
    for (int l = 0; l < nl; ++l) {
      if (topology.link_max_joint(l) < j) continue;  // link is upstream of joint j
      jac.matrix.block<3, 1>(6 * l, j - 1) = axis.cross(jac.reference_points[l] - anchor);
      jac.matrix.block<3, 1>(6 * l + 3, j - 1) = axis;
    }
  }
  return jac;
}

TorqueVector joint_torques(const KinematicState& state, const AtomForces& forces,
                           const ChainTopology& topology) {
  if (forces.n_atoms() != topology.n_atoms()) {
    throw ValidationError("joint_torques: force count mismatch");
  }
  const int nb = topology.dof();
  TorqueVector tau = VecX::Zero(nb);
  for (int a = 0; a < topology.n_atoms(); ++a) {
    const Vec3 f = forces.total(a);
    const Vec3& r = state.atom_positions[a];
    const int jmax = topology.atom_max_joint(a);
    for (int j = 1; j <= jmax; ++j) {
      tau[j - 1] += state.axes[j - 1].dot((r - state.chain_points[j - 1]).cross(f));
    }
  }
  return tau;
}

}  // namespace kcm
