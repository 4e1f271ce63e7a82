#pragma once

#include <string>
#include <vector>

#include "kcm/types.hpp"

namespace kcm {

enum class AtomRole { kBackboneN, kBackboneCa, kPlaneOffset, kTerminus };

/// Link index space: 0 is the N-terminus group, 1..P the peptide planes in
/// chain order, P+1 the C-terminus group.
constexpr int kNTerminusLink = 0;

struct AtomRecord {
  int id = -1;
  std::string element;
  int link = -1;           // 0 = N-terminus, 1..P = plane, P+1 = C-terminus
  AtomRole role = AtomRole::kTerminus;
  double charge = 0.0;     // elementary-charge units
  double vdw_radius = 0.0; // Angstrom
  double well_depth = 0.0; // kcal/mol (combined pairwise via sqrt rule)
  // Placement: chain atoms sit on the prefix-sum point with this index
  // (0..2N); plane-offset atoms use r(anchor) + k1*b_{2k} + k2*b_{2k+1}.
  int chain_index = -1;
  double k1 = 0.0;
  double k2 = 0.0;

  bool is_offset() const { return role == AtomRole::kPlaneOffset; }
};

/// The dihedral-angle state vector, length 2N.
struct Conformation {
  VecX theta;

  Conformation() = default;
  explicit Conformation(VecX t);
  static Conformation zeros(int dof) { return Conformation(VecX::Zero(dof)); }
  int dof() const { return static_cast<int>(theta.size()); }
};

/// Immutable chain description: zero-position axis and body vectors, the
/// atom table, and the link bookkeeping derived from it.
///
/// Kinematic conventions (documented in docs/formats.md):
///   - joints are numbered 1..2N in chain order; joint j rotates everything
///     with larger chain index about the axis u_j(theta) through chain
///     point p_{j-1};
///   - chain point p_0 is the origin, p_i = sum of the first i body vectors;
///   - plane k (1-based) owns chain points 2k-1 and 2k and offsets built
///     from body vectors 2k and 2k+1 anchored at p_{2k-1}.
class ChainTopology {
 public:
  ChainTopology(int n_planes, std::vector<Vec3> zero_axes,
                std::vector<Vec3> zero_bodies, std::vector<AtomRecord> atoms);

  int n_planes() const { return n_planes_; }
  int dof() const { return 2 * (n_planes_ + 1); }
  int n_links() const { return n_planes_ + 2; }
  int n_atoms() const { return static_cast<int>(atoms_.size()); }

  const std::vector<Vec3>& zero_axes() const { return zero_axes_; }
  const std::vector<Vec3>& zero_bodies() const { return zero_bodies_; }
  const std::vector<AtomRecord>& atoms() const { return atoms_; }
  const AtomRecord& atom(int i) const { return atoms_.at(i); }

  /// Largest joint number whose rotation moves every atom of the link
  /// rigidly (0 when no joint moves it). Planes: 2k; C-terminus: 2N.
  int link_max_joint(int link) const;

  /// Largest joint number that moves the given atom.
  int atom_max_joint(int atom) const;

  /// Chain point index of a link's reference atom (the first backbone
  /// point of a plane, the anchor point of a terminus).
  int link_reference_point(int link) const;

  const std::vector<std::vector<int>>& link_atoms() const { return link_atoms_; }

 private:
  int n_planes_;
  std::vector<Vec3> zero_axes_;
  std::vector<Vec3> zero_bodies_;
  std::vector<AtomRecord> atoms_;
  std::vector<std::vector<int>> link_atoms_;
};

/// Per-conformation derived geometry.
struct KinematicState {
  std::vector<Vec3> axes;          // u_j(theta), index j-1
  std::vector<Vec3> bodies;        // b_j(theta), index j-1
  std::vector<Mat3> cumulative;    // product of joint rotations 1..j, index j-1
  std::vector<Vec3> chain_points;  // p_0..p_2N
  std::vector<Vec3> atom_positions;
};

KinematicState forward_kinematics(const ChainTopology& topology,
                                  const Conformation& conf);

double pairwise_distance(const KinematicState& state, int i, int j);

}  // namespace kcm
