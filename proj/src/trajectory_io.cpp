#include "kcm/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace kcm {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

const char* mode_name(ControlMode m) {
  return m == ControlMode::kConventional ? "conventional" : "ods-qp";
}

const char* rule_name(InitialRule r) {
  switch (r) {
    case InitialRule::kZeroPosition: return "zero";
    case InitialRule::kFixedVector: return "fixed";
    case InitialRule::kUniformAboutMean: return "uniform-about-mean";
  }
  return "?";
}

}  // namespace

TrajectoryHeader make_trajectory_header(const SimulationConfig& config,
                                        const SimulationResult& result,
                                        const std::string& chain_name) {
  TrajectoryHeader h;
  h["chain"] = chain_name;
  h["mode"] = mode_name(config.mode);
  h["h"] = fmt(config.h);
  h["max_iterations"] = std::to_string(config.max_iterations);
  h["torque_tolerance"] = fmt(config.torque_tolerance);
  h["seed"] = std::to_string(config.seed);
  h["initial_rule"] = rule_name(config.initial_rule);
  h["record_cadence"] = std::to_string(config.record_cadence);
  if (config.mode == ControlMode::kOdsQp) {
    h["rho"] = fmt(config.rho);
    h["bound"] = fmt(result.bound_value);
  }
  h["status"] = to_string(result.status);
  h["steps"] = std::to_string(result.steps_taken);
  return h;
}

void write_trajectory(const std::vector<TrajectoryRecord>& records,
                      const TrajectoryHeader& header,
                      const std::filesystem::path& path, TrajectoryFormat format) {
  if (records.empty()) {
    throw ValidationError("write_trajectory: no records");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write trajectory: " + path.string());
  const int dof = static_cast<int>(records.front().theta.size());

  if (format == TrajectoryFormat::kCsv) {
    out << "# kcmfold trajectory v1\n";
    for (const auto& [k, v] : header) out << "# " << k << "=" << v << "\n";
    out << "step";
    for (int i = 0; i < dof; ++i) out << ",theta_" << i;
    for (int i = 0; i < dof; ++i) out << ",tau_" << i;
    out << ",tau_inf,e_total,e_elec,e_vdw";
    for (int i = 0; i < dof; ++i) out << ",u_" << i;
    out << ",bound_active\n";
    for (const TrajectoryRecord& r : records) {
      out << r.step;
      for (int i = 0; i < dof; ++i) out << "," << fmt(r.theta[i]);
      for (int i = 0; i < dof; ++i) out << "," << fmt(r.tau[i]);
      out << "," << fmt(r.tau_inf) << "," << fmt(r.energy.total) << ","
          << fmt(r.energy.electrostatic) << "," << fmt(r.energy.van_der_waals);
      for (int i = 0; i < dof; ++i) out << "," << fmt(r.control[i]);
      out << "," << r.bound_active_count << "\n";
    }
  } else {
    nlohmann::ordered_json head;
    head["format"] = "kcmfold-trajectory";
    head["version"] = 1;
    for (const auto& [k, v] : header) head[k] = v;
    out << head.dump() << "\n";
    for (const TrajectoryRecord& r : records) {
      nlohmann::ordered_json j;
      j["step"] = r.step;
      j["theta"] = std::vector<double>(r.theta.begin(), r.theta.end());
      j["tau"] = std::vector<double>(r.tau.begin(), r.tau.end());
      j["tau_inf"] = r.tau_inf;
      j["e_total"] = r.energy.total;
      j["e_elec"] = r.energy.electrostatic;
      j["e_vdw"] = r.energy.van_der_waals;
      j["u"] = std::vector<double>(r.control.begin(), r.control.end());
      j["bound_active"] = r.bound_active_count;
      out << j.dump() << "\n";
    }
  }
  if (!out) throw ValidationError("write failed: " + path.string());
}

TrajectoryFile read_trajectory_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trajectory: " + path.string());
  TrajectoryFile tf;
  std::string line;
  int dof = -1;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      const auto eq = line.find('=');
      if (eq != std::string::npos) {
        tf.header[line.substr(2, eq - 2)] = line.substr(eq + 1);
      }
      continue;
    }
    if (line.rfind("step", 0) == 0) {
      // infer dof from the column count: 1 + 3*dof + 4 + 1 columns
      int commas = 0;
      for (char ch : line) commas += (ch == ',');
      dof = (commas - 5) / 3;
      continue;
    }
    if (line.empty()) continue;
    if (dof < 0) throw ValidationError(path.string() + ": missing column header");
    std::istringstream ls(line);
    std::string tok;
    auto next_d = [&]() {
      if (!std::getline(ls, tok, ',')) {
        throw ValidationError(path.string() + ": short row");
      }
      return std::strtod(tok.c_str(), nullptr);
    };
    TrajectoryRecord r;
    r.step = static_cast<int>(next_d());
    r.theta.resize(dof);
    r.tau.resize(dof);
    r.control.resize(dof);
    for (int i = 0; i < dof; ++i) r.theta[i] = next_d();
    for (int i = 0; i < dof; ++i) r.tau[i] = next_d();
    r.tau_inf = next_d();
    r.energy.total = next_d();
    r.energy.electrostatic = next_d();
    r.energy.van_der_waals = next_d();
    for (int i = 0; i < dof; ++i) r.control[i] = next_d();
    r.bound_active_count = static_cast<int>(next_d());
    tf.records.push_back(std::move(r));
  }
  return tf;
}

void write_xyz_snapshot(const ChainTopology& topology, const KinematicState& state,
                        const std::filesystem::path& path, const std::string& comment) {
  if (state.atom_positions.size() != static_cast<std::size_t>(topology.n_atoms())) {
    throw ValidationError("write_xyz_snapshot: state does not match topology");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write snapshot: " + path.string());
  out << topology.n_atoms() << "\n";
  out << comment << "\n";
  for (const AtomRecord& a : topology.atoms()) {
    const Vec3& r = state.atom_positions[a.id];
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s %.10f %.10f %.10f\n", a.element.c_str(),
                  r.x(), r.y(), r.z());
    out << buf;
  }
  if (!out) throw ValidationError("write failed: " + path.string());
}

}  // namespace kcm
