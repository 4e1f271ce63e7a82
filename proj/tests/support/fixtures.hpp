#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kcm/chain.hpp"
#include "kcm/chain_spec.hpp"
#include "kcm/energy.hpp"

namespace testsupport {

// Bitwise equality for Eigen types (operator== is coefficient-wise).
template <typename A, typename B>
bool bit_equal(const A& a, const B& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return false;
  }
  return true;
}

inline std::filesystem::path data_dir() {
#ifdef KCM_DATA_DIR
  return std::filesystem::path(KCM_DATA_DIR);
#else
  return std::filesystem::path("data");
#endif
}

inline kcm::ChainSpec load_bundled(const std::string& name) {
  return kcm::load_chain_spec(data_dir() / name);
}

// splitmix64, same construction as the library RNG but local to the tests.
struct TestRng {
  std::uint64_t state;
  explicit TestRng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
  }
  kcm::Vec3 unit_vector() {
    while (true) {
      kcm::Vec3 v(uniform(-1, 1), uniform(-1, 1), uniform(-1, 1));
      const double n = v.norm();
      if (n > 0.1 && n < 1.0) return v / n;
    }
  }
};

// Random small chain with arbitrary (non-bond-aligned) axes: exercises the
// kinematics and torque identities away from the bundled geometry.
inline kcm::ChainTopology random_topology(int n_planes, std::uint64_t seed) {
  TestRng rng(seed);
  const int dof = 2 * (n_planes + 1);
  std::vector<kcm::Vec3> axes, bodies;
  for (int j = 0; j < dof; ++j) {
    axes.push_back(rng.unit_vector());
    bodies.push_back(rng.uniform(1.2, 2.8) * rng.unit_vector());
  }
  std::vector<kcm::AtomRecord> atoms;
  auto add = [&](int link, kcm::AtomRole role, int chain_index, double q, double r,
                 double eps) {
    kcm::AtomRecord a;
    a.id = static_cast<int>(atoms.size());
    a.element = role == kcm::AtomRole::kBackboneCa ? "CA" : "N";
    a.link = link;
    a.role = role;
    a.charge = q;
    a.vdw_radius = r;
    a.well_depth = eps;
    a.chain_index = chain_index;
    atoms.push_back(a);
  };
  add(0, kcm::AtomRole::kTerminus, 0, rng.uniform(-0.3, 0.3), 1.2, 0.05);
  for (int k = 1; k <= n_planes; ++k) {
    add(k, kcm::AtomRole::kBackboneN, 2 * k - 1, rng.uniform(-0.3, 0.3), 1.2, 0.05);
    add(k, kcm::AtomRole::kBackboneCa, 2 * k, rng.uniform(-0.3, 0.3), 1.2, 0.05);
  }
  add(n_planes + 1, kcm::AtomRole::kBackboneN, 2 * n_planes + 1,
      rng.uniform(-0.3, 0.3), 1.2, 0.05);
  add(n_planes + 1, kcm::AtomRole::kTerminus, 2 * n_planes + 2,
      rng.uniform(-0.3, 0.3), 1.2, 0.05);
  return kcm::ChainTopology(n_planes, std::move(axes), std::move(bodies), std::move(atoms));
}

// Mild force field for random chains: soft enough that random conformations
// stay far from the singularity floor.
inline kcm::ForceFieldParams mild_params(const kcm::ChainTopology& topology) {
  std::vector<std::pair<int, int>> excl;
  for (int i = 0; i < topology.n_atoms(); ++i) {
    for (int j = i + 1; j < topology.n_atoms(); ++j) {
      if (j - i <= 2) excl.emplace_back(i, j);
    }
  }
  return kcm::ForceFieldParams::from_topology(topology, 4.0, 1.0, 1.0, std::move(excl));
}

inline kcm::Conformation random_conformation(int dof, std::uint64_t seed,
                                             double half_width = 0.6) {
  TestRng rng(seed);
  kcm::VecX theta(dof);
  for (int i = 0; i < dof; ++i) theta[i] = rng.uniform(-half_width, half_width);
  return kcm::Conformation(theta);
}

}  // namespace testsupport
