#include "kcm/chain.hpp"

#include <cmath>

#include "kcm/rotation.hpp"

namespace kcm {

Conformation::Conformation(VecX t) : theta(std::move(t)) {
  if (!theta.allFinite()) {
    throw ValidationError("Conformation: non-finite dihedral angle");
  }
}

ChainTopology::ChainTopology(int n_planes, std::vector<Vec3> zero_axes,
                             std::vector<Vec3> zero_bodies,
                             std::vector<AtomRecord> atoms)
    : n_planes_(n_planes),
      zero_axes_(std::move(zero_axes)),
      zero_bodies_(std::move(zero_bodies)),
      atoms_(std::move(atoms)) {
  if (n_planes_ < 1) throw ValidationError("ChainTopology: need at least one plane");
  const int nb = dof();
  if (static_cast<int>(zero_axes_.size()) != nb ||
      static_cast<int>(zero_bodies_.size()) != nb) {
    throw ValidationError("ChainTopology: expected " + std::to_string(nb) +
                          " axis and body vectors, got " +
                          std::to_string(zero_axes_.size()) + " / " +
                          std::to_string(zero_bodies_.size()));
  }
  for (int j = 0; j < nb; ++j) {
    if (std::abs(zero_axes_[j].norm() - 1.0) > 1e-12) {
      throw ValidationError("ChainTopology: axis vector " + std::to_string(j + 1) +
                            " is not unit length (|u| = " +
                            std::to_string(zero_axes_[j].norm()) + ")");
    }
    if (!zero_bodies_[j].allFinite()) {
      throw ValidationError("ChainTopology: body vector " + std::to_string(j + 1) +
                            " is not finite");
    }
  }
  link_atoms_.assign(n_links(), {});
  for (const AtomRecord& a : atoms_) {
    if (a.link < 0 || a.link >= n_links()) {
      throw ValidationError("ChainTopology: atom " + std::to_string(a.id) +
                            " has link index " + std::to_string(a.link) +
                            " outside 0.." + std::to_string(n_links() - 1));
    }
    if (a.vdw_radius <= 0.0) {
      throw ValidationError("ChainTopology: atom " + std::to_string(a.id) +
                            " has non-positive vdW radius");
    }
    if (a.well_depth < 0.0) {
      throw ValidationError("ChainTopology: atom " + std::to_string(a.id) +
                            " has negative well depth");
    }
    if (a.is_offset()) {
      if (a.link < 1 || a.link > n_planes_) {
        throw ValidationError("ChainTopology: offset atom " + std::to_string(a.id) +
                              " must belong to a plane, got link " +
                              std::to_string(a.link));
      }
      // An offset with k2 != 0 stays rigid under the plane's trailing joint
      // only when that joint's axis is parallel to its body vector.
      if (a.k2 != 0.0) {
        const int j = 2 * a.link + 1;  // trailing body vector index (1-based)
        const Vec3& u = zero_axes_[j - 1];
        const Vec3& b = zero_bodies_[j - 1];
        if (u.cross(b).norm() > 1e-9 * b.norm()) {
          throw ValidationError(
              "ChainTopology: offset atom " + std::to_string(a.id) +
              " uses k2 != 0 but axis " + std::to_string(j) +
              " is not parallel to body vector " + std::to_string(j));
        }
      }
    } else {
      if (a.chain_index < 0 || a.chain_index > nb) {
        throw ValidationError("ChainTopology: atom " + std::to_string(a.id) +
                              " has chain index " + std::to_string(a.chain_index) +
                              " outside 0.." + std::to_string(nb));
      }
      // Link membership must match the chain position, otherwise the link
      // is not a rigid body and the wrench bookkeeping breaks.
      bool consistent;
      if (a.link == kNTerminusLink) {
        consistent = a.chain_index == 0;
      } else if (a.link <= n_planes_) {
        consistent = a.chain_index == 2 * a.link - 1 || a.chain_index == 2 * a.link;
      } else {
        consistent = a.chain_index >= 2 * n_planes_ + 1;
      }
      if (!consistent) {
        throw ValidationError("ChainTopology: atom " + std::to_string(a.id) +
                              " at chain point " + std::to_string(a.chain_index) +
                              " cannot belong to link " + std::to_string(a.link));
      }
    }
    link_atoms_[a.link].push_back(a.id);
  }
  for (int i = 0; i < n_atoms(); ++i) {
    if (atoms_[i].id != i) {
      throw ValidationError("ChainTopology: atom ids must be 0..n-1 in order");
    }
  }
}

int ChainTopology::link_max_joint(int link) const {
  if (link == kNTerminusLink) return 0;
  if (link == n_planes_ + 1) return dof();
  return 2 * link;
}

int ChainTopology::atom_max_joint(int atom) const {
  const AtomRecord& a = atoms_.at(atom);
  if (a.is_offset()) return 2 * a.link;
  return a.chain_index;
}

int ChainTopology::link_reference_point(int link) const {
  if (link == kNTerminusLink) return 0;
  if (link <= n_planes_) return 2 * link - 1;
  return 2 * n_planes_ + 1;  // first chain point of the C-terminus group
}

KinematicState forward_kinematics(const ChainTopology& topology,
                                  const Conformation& conf) {
  const int nb = topology.dof();
  if (conf.dof() != nb) {
    throw ValidationError("forward_kinematics: conformation has " +
                          std::to_string(conf.dof()) + " angles, chain needs " +
                          std::to_string(nb));
  }
  if (!conf.theta.allFinite()) {
    throw ValidationError("forward_kinematics: non-finite dihedral angle");
  }

  KinematicState s;
  s.axes.resize(nb);
  s.bodies.resize(nb);
  s.cumulative.resize(nb);
  s.chain_points.resize(nb + 1);
  s.chain_points[0] = Vec3::Zero();

  Mat3 xi = Mat3::Identity();
  for (int j = 1; j <= nb; ++j) {
    xi = xi * rotation_about_axis(topology.zero_axes()[j - 1], conf.theta[j - 1]);
    s.cumulative[j - 1] = xi;
    s.axes[j - 1] = xi * topology.zero_axes()[j - 1];
    s.bodies[j - 1] = xi * topology.zero_bodies()[j - 1];
    s.chain_points[j] = s.chain_points[j - 1] + s.bodies[j - 1];
  }

  s.atom_positions.resize(topology.n_atoms());
  for (const AtomRecord& a : topology.atoms()) {
    if (a.is_offset()) {
      const int anchor = 2 * a.link - 1;
      s.atom_positions[a.id] = s.chain_points[anchor] +
                               a.k1 * s.bodies[2 * a.link - 1] +
                               a.k2 * s.bodies[2 * a.link];
    } else {
      s.atom_positions[a.id] = s.chain_points[a.chain_index];
    }
  }
  return s;
}

double pairwise_distance(const KinematicState& state, int i, int j) {
  if (i == j) {
    throw ValidationError("pairwise_distance: identical atom ids");
  }
  return (state.atom_positions.at(i) - state.atom_positions.at(j)).norm();
}

}  // namespace kcm
