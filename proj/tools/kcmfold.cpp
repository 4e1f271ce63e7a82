#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "kcm/chain_spec.hpp"
#include "kcm/folding.hpp"
#include "kcm/qp.hpp"
#include "kcm/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace kcm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitNumerical = 2;

struct CommonOpts {
  std::string chain_path;
  std::string out_dir;
  double h = 0.04;
  int iters = 325;
  double tol = 1e-3;
  std::uint64_t seed = 12;
  int cadence = 1;
  std::string init = "uniform";
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->set_help_flag("--help", "print this help message");
  cmd->add_option("--chain", o.chain_path, "chain spec file")->required();
  const char* env_out = std::getenv("KCMFOLD_OUT");
  o.out_dir = env_out ? env_out : "out";
  cmd->add_option("--out", o.out_dir, "output directory");
  cmd->add_option("--h", o.h, "step size per iteration");
  cmd->add_option("--iters", o.iters, "iteration budget");
  cmd->add_option("--tol", o.tol, "|tau|_inf convergence threshold");
  cmd->add_option("--seed", o.seed, "random seed for the initial conformation");
  cmd->add_option("--cadence", o.cadence, "record every n-th step");
  cmd->add_option("--init", o.init, "initial conformation rule: uniform|zero");
}

SimulationConfig make_config(const CommonOpts& o, ControlMode mode, double rho) {
  SimulationConfig cfg;
  cfg.h = o.h;
  cfg.max_iterations = o.iters;
  cfg.torque_tolerance = o.tol;
  cfg.mode = mode;
  cfg.rho = rho;
  cfg.seed = o.seed;
  cfg.record_cadence = o.cadence;
  if (o.init == "uniform") {
    cfg.initial_rule = InitialRule::kUniformAboutMean;
  } else if (o.init == "zero") {
    cfg.initial_rule = InitialRule::kZeroPosition;
  } else {
    throw ValidationError("unknown --init rule '" + o.init + "' (expected uniform|zero)");
  }
  cfg.validate();
  return cfg;
}

struct Variant {
  std::string label;
  ControlMode mode;
  double rho;
};

Variant parse_variant(const std::string& s) {
  if (s == "conventional") return {s, ControlMode::kConventional, 0.0};
  if (s.rfind("ods:", 0) == 0) {
    const double rho = std::stod(s.substr(4));
    if (rho <= 0.0) throw ValidationError("variant '" + s + "': rho must be positive");
    return {s, ControlMode::kOdsQp, rho};
  }
  throw ValidationError("unknown variant '" + s + "' (expected conventional|ods:<rho>)");
}

double max_bound_utilization(const SimulationResult& r) {
  if (r.bound_value <= 0.0) return 0.0;
  double m = 0.0;
  for (const auto& rec : r.records) {
    if (rec.control.size() > 0) {
      m = std::max(m, rec.control.cwiseAbs().maxCoeff() / r.bound_value);
    }
  }
  return m;
}

int cmd_simulate(const CommonOpts& o, const std::string& mode_name, double rho,
                 const std::string& format_name) {
  const ChainSpec spec = load_chain_spec(o.chain_path);
  const ControlMode mode =
      mode_name == "ods-qp" ? ControlMode::kOdsQp : ControlMode::kConventional;
  if (mode_name != "ods-qp" && mode_name != "conventional") {
    throw ValidationError("unknown --mode '" + mode_name + "'");
  }
  const SimulationConfig cfg = make_config(o, mode, rho);
  FoldingSystem system(spec.topology, spec.params);

  const SimulationResult result = simulate(system, cfg);
  if (result.records.empty()) {
    throw NumericalError("simulation produced no records: " + result.message);
  }

  fs::create_directories(o.out_dir);
  const TrajectoryFormat format = format_name == "jsonl" ? TrajectoryFormat::kJsonLines
                                                         : TrajectoryFormat::kCsv;
  const fs::path traj = fs::path(o.out_dir) /
                        (format == TrajectoryFormat::kCsv ? "trajectory.csv" : "trajectory.jsonl");
  write_trajectory(result.records, make_trajectory_header(cfg, result, spec.name), traj, format);

  const Conformation first = initial_conformation(cfg, system.dof());
  write_xyz_snapshot(spec.topology, forward_kinematics(spec.topology, first),
                     fs::path(o.out_dir) / "initial.xyz", "initial conformation");
  write_xyz_snapshot(spec.topology,
                     forward_kinematics(spec.topology, result.final_conformation),
                     fs::path(o.out_dir) / "final.xyz", "final conformation");

  std::ostringstream summary;
  summary << "status: " << to_string(result.status) << "\n"
          << "steps: " << result.steps_taken << "\n"
          << "initial_energy: " << result.records.front().energy.total << "\n"
          << "final_energy: " << result.records.back().energy.total << "\n"
          << "final_tau_inf: " << result.records.back().tau_inf << "\n";
  if (mode == ControlMode::kOdsQp) {
    summary << "bound: " << result.bound_value << "\n"
            << "max_bound_utilization: " << max_bound_utilization(result) << "\n";
  }
  if (!result.message.empty()) summary << "note: " << result.message << "\n";
  summary << "wall_seconds: " << result.wall_seconds << "\n";
  std::ofstream(fs::path(o.out_dir) / "summary.txt") << summary.str();
  std::cout << summary.str();

  if (result.status == TerminationStatus::kSingularAbort) {
    std::cerr << "error: " << result.message << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_compare(const CommonOpts& o, const std::vector<std::string>& variant_specs) {
  if (variant_specs.size() < 2) {
    throw ValidationError("compare needs at least two --variant entries");
  }
  const ChainSpec spec = load_chain_spec(o.chain_path);
  FoldingSystem system(spec.topology, spec.params);

  std::vector<Variant> variants;
  std::vector<SimulationResult> results;
  for (const std::string& vs : variant_specs) {
    const Variant v = parse_variant(vs);
    const SimulationConfig cfg = make_config(o, v.mode, v.mode == ControlMode::kOdsQp ? v.rho : 20.0);
    results.push_back(simulate(system, cfg));
    variants.push_back(v);
  }

  fs::create_directories(o.out_dir);
  const fs::path table_path = fs::path(o.out_dir) / "compare.csv";
  std::ofstream out(table_path, std::ios::binary);
  if (!out) throw ValidationError("cannot write " + table_path.string());
  out << "step";
  for (const Variant& v : variants) out << ",u_inf[" << v.label << "],e_total[" << v.label << "]";
  out << "\n";
  std::size_t rows = 0;
  for (const auto& r : results) rows = std::max(rows, r.records.size());
  char buf[40];
  for (std::size_t k = 0; k < rows; ++k) {
    out << k;
    for (const auto& r : results) {
      if (k < r.records.size()) {
        std::snprintf(buf, sizeof buf, "%.17g", r.records[k].control.cwiseAbs().maxCoeff());
        out << "," << buf;
        std::snprintf(buf, sizeof buf, "%.17g", r.records[k].energy.total);
        out << "," << buf;
      } else {
        out << ",,";
      }
    }
    out << "\n";
  }

  const double e_ref = results.front().records.back().energy.total;
  std::cout << "variant            status             final_energy   delta_vs_first\n";
  for (std::size_t i = 0; i < variants.size(); ++i) {
    const double e = results[i].records.back().energy.total;
    std::printf("%-18s %-18s %14.6f %14.6f%s\n", variants[i].label.c_str(),
                to_string(results[i].status), e, e - e_ref,
                results[i].status == TerminationStatus::kStalled ? "  [stall]" : "");
  }
  std::cout << "table: " << table_path.string() << "\n";

  for (const auto& r : results) {
    if (r.status == TerminationStatus::kSingularAbort) return kExitNumerical;
  }
  return kExitOk;
}

int cmd_check(const CommonOpts& o, double rho, int refinements, double t_star) {
  const ChainSpec spec = load_chain_spec(o.chain_path);
  FoldingSystem system(spec.topology, spec.params);
  const int dof = system.dof();
  bool all_ok = true;
  auto report = [&](bool ok, const std::string& what) {
    std::cout << (ok ? "PASS " : "FAIL ") << what << "\n";
    all_ok = all_ok && ok;
  };

  // Bound-feasibility certificate for the configured rho.
  const VecX c = VecX::Constant(dof, control_bound(rho, dof));
  const FeasibilityCertificate cert = lp_feasibility_omega(c);
  report(cert.positive(), "feasibility: omega = " + std::to_string(cert.omega) +
                              " > 0 (rho = " + std::to_string(rho) + ")");

  // Torque field regularity near the initial conformation.
  const SimulationConfig cfg = make_config(o, ControlMode::kConventional, rho);
  const Conformation start = initial_conformation(cfg, dof);
  const LipschitzEstimate est =
      lipschitz_probe(system.torque_field(), start.theta, 0.5, 48, cfg.seed);
  report(est.lambda_prime > 0.0 && est.samples_used >= 2,
         "lipschitz probe: lambda = " + std::to_string(est.lambda) +
             ", lambda' = " + std::to_string(est.lambda_prime) +
             (est.singular_skipped ? " (skipped " + std::to_string(est.singular_skipped) +
                                         " singular samples)"
                                   : ""));

  // Discretization audit at h and h/2.
  DiscretizationAudit a1 = audit_discretization(system, cfg, refinements, t_star);
  SimulationConfig half = cfg;
  half.h = cfg.h / 2.0;
  DiscretizationAudit a2 = audit_discretization(system, half, refinements, t_star);
  if (!a1.conclusive || !a2.conclusive) {
    report(false, "discretization audit inconclusive: " + a1.message + a2.message);
  } else {
    report(a1.within_bound, "audit: max deviation " + std::to_string(a1.max_deviation) +
                                " <= bound " + std::to_string(a1.bound));
    const double ratio = a1.max_deviation / std::max(a2.max_deviation, 1e-300);
    report(true, "audit: halving h shrinks deviation by x" + std::to_string(ratio));
  }

  // Torque/energy-gradient self-test (central differences).
  {
    const double fd_h = 1e-6;
    const VecX tau = system.torques(start);
    double worst = 0.0;
    for (int j = 0; j < dof; ++j) {
      VecX tp = start.theta, tm = start.theta;
      tp[j] += fd_h;
      tm[j] -= fd_h;
      const double g = (system.energy(Conformation(tp)).total -
                        system.energy(Conformation(tm)).total) /
                       (2.0 * fd_h);
      worst = std::max(worst, std::abs(tau[j] + g));
    }
    const double rel = worst / std::max(1.0, tau.cwiseAbs().maxCoeff());
    report(rel < 1e-5, "torque-gradient self-test: max relative error " + std::to_string(rel));
  }

  return all_ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kinetostatic chain folding simulator"};
  app.set_help_flag("--help", "print this help message");
  app.require_subcommand(1);

  CommonOpts sim_o;
  std::string mode = "conventional";
  double rho = 20.0;
  std::string format = "csv";
  CLI::App* sim = app.add_subcommand("simulate", "run one folding simulation");
  add_common(sim, sim_o);
  sim->add_option("--mode", mode, "conventional|ods-qp");
  sim->add_option("--rho", rho, "control bound scale (ods-qp)");
  sim->add_option("--format", format, "trajectory format: csv|jsonl");

  CommonOpts cmp_o;
  std::vector<std::string> variant_specs;
  CLI::App* cmp = app.add_subcommand("compare", "run variants side by side");
  add_common(cmp, cmp_o);
  cmp->add_option("--variant", variant_specs, "conventional or ods:<rho> (repeatable)");

  CommonOpts chk_o;
  double chk_rho = 20.0;
  int refinements = 6;
  double t_star = 2.0;
  CLI::App* chk = app.add_subcommand("check", "run solver and discretization diagnostics");
  add_common(chk, chk_o);
  chk->add_option("--rho", chk_rho, "control bound scale to certify");
  chk->add_option("--refinements", refinements, "proxy step refinements (h / 2^m)");
  chk->add_option("--tstar", t_star, "audit horizon");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_o, mode, rho, format);
    if (cmp->parsed()) return cmd_compare(cmp_o, variant_specs);
    if (chk->parsed()) return cmd_check(chk_o, chk_rho, refinements, t_star);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const SingularityError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
