// hjg: solve, query and simulate state-constrained games from the shell.
//
// Exit codes
//   0  success
//   1  unexpected failure (I/O, internal)
//   2  invalid config, malformed file, or query outside the grid
//   3  numerical blow-up during solve
//   4  infeasible start (infinite game value)
//   5  rollout left the grid box (partial trajectory still written)

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hjg/config.hpp"
#include "hjg/extract.hpp"
#include "hjg/io.hpp"
#include "hjg/oracle.hpp"
#include "hjg/solver.hpp"
#include "hjg/synthesis.hpp"

namespace {

enum ExitCode { kOk = 0, kFailure = 1, kBadInput = 2, kBlowup = 3, kInfeasible = 4, kEscape = 5 };

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw hjg::ConfigError(std::string(what) + ": cannot parse '" + item + "' as a number");
    }
  }
  if (out.empty()) throw hjg::ConfigError(std::string(what) + ": empty list");
  return out;
}

hjg::RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = hjg::read_file(path);
  } catch (const hjg::FormatError& e) {
    throw hjg::ConfigError(e.what());
  }
  return hjg::parse_run_config(text);
}

void emit(const std::string& path, const std::function<void(std::ostream&)>& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
  } else {
    hjg::write_text_atomic(path, body);
  }
}

int cmd_solve(const std::string& config_path, std::string out) {
  const hjg::RunConfig cfg = load_config(config_path);
  if (out.empty()) out = cfg.output.value_function;
  if (out.empty()) throw hjg::ConfigError("output.value_function: no output path (use --out)");
  const hjg::ProblemSpec spec = hjg::resolve_problem(cfg);
  const hjg::Grid grid = hjg::resolve_grid(cfg);
  hjg::SolveStats stats;
  const hjg::ValueFunction vf =
      hjg::solve(spec, grid, cfg.variant, cfg.mode, cfg.scheme, hjg::SnapshotPolicy{cfg.stamps, {}}, &stats);
  hjg::write_value_function(out, vf);

  const auto& v0 = vf.snapshots.front().values;
  const auto [lo, hi] = std::minmax_element(v0.begin(), v0.end());
  std::cout << "problem    " << spec.name << " (" << hjg::to_string(cfg.variant) << ", " << hjg::to_string(cfg.mode)
            << ")\n";
  std::cout << "grid       ";
  for (std::size_t d = 0; d < grid.dims(); ++d) std::cout << (d ? "x" : "") << grid.axis(d).count;
  std::cout << " (" << grid.point_count() << " nodes), " << vf.times.size() << " stamps\n";
  std::cout << "steps      " << stats.steps << " (dt " << hjg::format_double(stats.dt) << ")\n";
  std::cout << "wall time  " << stats.wall_seconds << " s\n";
  std::cout << "V(0) range [" << hjg::format_double(*lo) << ", " << hjg::format_double(*hi) << "]\n";
  std::cout << "wrote      " << out << "\n";
  return kOk;
}

int cmd_extract(const std::string& vf_path, double t, const std::string& point, double margin) {
  const hjg::ValueFunction vf = hjg::read_value_function(vf_path);
  const auto x = parse_list(point, "--point");
  const auto r = hjg::extract_vartheta(vf, t, x, margin);
  if (r.saturated)
    std::cout << "inf (saturated)\n";
  else
    std::cout << hjg::format_double(r.value) << "\n";
  return kOk;
}

int cmd_slice(const std::string& vf_path, double t, double z, const std::string& out) {
  const hjg::ValueFunction vf = hjg::read_value_function(vf_path);
  const hjg::StateSlice slice = hjg::level_slice(vf, t, z);
  emit(out, [&](std::ostream& os) { hjg::write_slice_csv(os, slice); });
  return kOk;
}

hjg::BPolicy parse_b_policy(const std::string& text) {
  if (text == "optimal") return hjg::OptimalB{};
  if (text.rfind("constant:", 0) == 0) return hjg::ConstantB{parse_list(text.substr(9), "--b-policy")};
  if (text.rfind("fixed:", 0) == 0) {
    std::ifstream in(text.substr(6));
    if (!in) throw hjg::ConfigError("--b-policy: cannot open " + text.substr(6));
    hjg::FixedB fixed;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) fixed.sequence.push_back(parse_list(line, "--b-policy file"));
    if (fixed.sequence.empty()) throw hjg::ConfigError("--b-policy: empty control file");
    return fixed;
  }
  throw hjg::ConfigError("--b-policy: expected optimal, constant:<b1,..>, or fixed:<file>");
}

int cmd_rollout(const std::string& vf_path, const std::string& config_path, const std::string& x0_text,
                const std::string& policy_text, double dt, const std::string& out) {
  const hjg::RunConfig cfg = load_config(config_path);
  const hjg::ValueFunction vf = hjg::read_value_function(vf_path);
  const hjg::ProblemSpec spec = hjg::resolve_problem(cfg);
  if (vf.grid.state_dim() != spec.state_dim)
    throw hjg::FormatError("value function and problem have different state dimensions");
  const auto x0 = parse_list(x0_text, "--x0");
  const hjg::BPolicy policy = parse_b_policy(policy_text);
  if (const auto* c = std::get_if<hjg::ConstantB>(&policy); c && !spec.controls_b.contains(c->b))
    throw hjg::ConfigError("--b-policy: constant control outside the B box");
  const auto lat = hjg::make_lattices(spec, vf.mode, cfg.scheme.lattice_a, cfg.scheme.lattice_b);
  try {
    const hjg::Trajectory tr = hjg::rollout(spec, vf, vf.mode, vf.variant, x0, policy, dt, lat);
    emit(out, [&](std::ostream& os) { hjg::write_trajectory_csv(os, tr); });
  } catch (const hjg::RolloutEscape& e) {
    emit(out, [&](std::ostream& os) { hjg::write_trajectory_csv(os, e.partial()); });
    std::cerr << "hjg: " << e.what() << "\n";
    return kEscape;
  }
  return kOk;
}

int cmd_oracle(const std::string& config_path, std::string out) {
  const hjg::RunConfig cfg = load_config(config_path);
  if (out.empty()) out = cfg.output.value_function;
  if (out.empty()) throw hjg::ConfigError("output.value_function: no output path (use --out)");
  const hjg::ProblemSpec spec = hjg::resolve_problem(cfg);
  const hjg::Grid grid = hjg::resolve_grid(cfg);
  const hjg::OracleTable table =
      hjg::oracle_solve(spec, grid, cfg.variant, cfg.mode, cfg.scheme.lattice_a, cfg.scheme.lattice_b, cfg.stamps);
  std::vector<const std::vector<double>*> fields;
  for (const auto& f : table.values) fields.push_back(&f);
  hjg::write_file_atomic(out, hjg::encode_vf01(grid, table.times, fields, cfg.variant, cfg.mode));
  const auto& v0 = table.values.front();
  const auto [lo, hi] = std::minmax_element(v0.begin(), v0.end());
  std::cout << "oracle V(0) range [" << hjg::format_double(*lo) << ", " << hjg::format_double(*hi) << "]\n";
  std::cout << "wrote " << out << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Level-set solver for state-constrained zero-sum games"};
  app.require_subcommand(1);

  std::string config, out, vf_path, point, x0, policy = "optimal";
  double t = 0.0, margin = 0.0, z = 0.0, dt = 0.005;

  auto* solve = app.add_subcommand("solve", "Solve the augmented HJ equation and write a VF01 file");
  solve->add_option("--config", config, "JSON run configuration")->required();
  solve->add_option("--out", out, "Output VF01 path (default: output.value_function)");

  auto* extract = app.add_subcommand("extract", "Print the game value at (t, x)");
  extract->add_option("--vf", vf_path, "VF01 file")->required();
  extract->add_option("--time", t, "Time");
  extract->add_option("--point", point, "State x1,x2,..")->required();
  extract->add_option("--margin", margin, "Safety margin (>= 0)");

  auto* slice = app.add_subcommand("slice", "Write V(t, ., z) as CSV");
  slice->add_option("--vf", vf_path, "VF01 file")->required();
  slice->add_option("--time", t, "Time");
  slice->add_option("--z", z, "Cost level")->required();
  slice->add_option("--out", out, "CSV path (default: stdout)");

  auto* roll = app.add_subcommand("rollout", "Simulate the closed loop and write the trajectory CSV");
  roll->add_option("--vf", vf_path, "VF01 file")->required();
  roll->add_option("--config", config, "JSON run configuration (problem definition)")->required();
  roll->add_option("--x0", x0, "Initial state x1,x2,..")->required();
  roll->add_option("--b-policy", policy, "optimal | constant:<b1,..> | fixed:<file>");
  roll->add_option("--dt", dt, "Control refresh interval");
  roll->add_option("--out", out, "CSV path (default: stdout)");

  auto* oracle = app.add_subcommand("oracle", "Brute-force dynamic programming reference, written as VF01");
  oracle->add_option("--config", config, "JSON run configuration")->required();
  oracle->add_option("--out", out, "Output VF01 path (default: output.value_function)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*solve) return cmd_solve(config, out);
    if (*extract) return cmd_extract(vf_path, t, point, margin);
    if (*slice) return cmd_slice(vf_path, t, z, out);
    if (*roll) return cmd_rollout(vf_path, config, x0, policy, dt, out);
    if (*oracle) return cmd_oracle(config, out);
  } catch (const hjg::NumericalBlowup& e) {
    std::cerr << "hjg: " << e.what() << "\n";
    return kBlowup;
  } catch (const hjg::FeasibilityError& e) {
    std::cerr << "hjg: " << e.what() << "\n";
    return kInfeasible;
  } catch (const hjg::ConfigError& e) {
    std::cerr << "hjg: " << e.what() << "\n";
    return kBadInput;
  } catch (const hjg::FormatError& e) {
    std::cerr << "hjg: " << e.what() << "\n";
    return kBadInput;
  } catch (const hjg::DomainError& e) {
    std::cerr << "hjg: " << e.what() << "\n";
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "hjg: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
