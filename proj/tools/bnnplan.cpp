// Command-line front end: generate benchmark instances, compile them to
// weighted partial MaxSAT, drive an external solver, and validate plans.
//
// Exit codes: 0 success/ok, 1 infeasible/not-ok, 2 usage, 3 capacity guard,
// 4 I/O or solver failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bnnplan/bnnplan.hpp"

namespace fs = std::filesystem;
using namespace bnnplan;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw io_error("cannot write " + path.string());
  os.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!os) throw io_error("write failed on " + path.string());
}

instance load_manifest(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw io_error("cannot open " + path.string());
  return read_manifest(is);
}

std::string unscaled(std::int64_t scaled, int scale_pow10) {
  bigint den = 1;
  for (int i = 0; i < scale_pow10; ++i) den *= 10;
  return rational(bigint(scaled), den).to_decimal();
}

fs::path atlas_sidecar(fs::path wcnf_path) {
  if (wcnf_path.extension() == ".wcnf") wcnf_path.replace_extension();
  wcnf_path += ".atlas.json";
  return wcnf_path;
}

void encode_to_files(const instance& inst, const fs::path& out, wcnf_dialect dialect) {
  encoding_artifact art = encode(inst.problem, inst.net);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw io_error("cannot write " + out.string());
  write_wcnf(art.formula, dialect, os, wcnf_comments(art));
  write_file(atlas_sidecar(out), write_atlas_json(art));
}

int cmd_generate(const domain_spec& spec, const fs::path& out) {
  if (!in_submitted_grid(spec))
    std::cerr << "warning: " << instance_name(spec)
              << " is outside the submitted parameter grid\n";
  generated_instance gen = generate(spec);
  write_file(out, write_manifest({gen.problem, gen.net, gen.spec}));
  return 0;
}

int cmd_encode(const fs::path& in, const fs::path& out, const std::string& format) {
  encode_to_files(load_manifest(in), out, dialect_from_name(format));
  return 0;
}

int cmd_solve(const fs::path& in, const std::string& solver_cmd, double timeout) {
  if (solver_cmd.empty())
    throw parameter_error("no solver given; pass --solver or set BNNPLAN_SOLVER");
  instance inst = load_manifest(in);
  encoding_artifact art = encode(inst.problem, inst.net);
  solve_report rep = solve(art, inst.problem, inst.net, solver_cmd, timeout);

  std::cout << "status: " << status_name(rep.status) << "\n";
  if (!rep.note.empty()) std::cout << "note: " << rep.note << "\n";
  if (rep.solver_cost) std::cout << "solver_cost: " << *rep.solver_cost << "\n";
  std::cout << "soft_weight_sum: " << art.formula.soft_weight_sum() << "\n";
  std::cout << "objective_offset: " << art.objective_offset << "\n";
  if (rep.recomputed_scaled_reward) {
    std::cout << "scaled_reward: " << *rep.recomputed_scaled_reward << "\n";
    std::cout << "reward: " << unscaled(*rep.recomputed_scaled_reward, art.scale_pow10) << "\n";
  }
  if (rep.solver_cost && rep.plan)
    std::cout << "cost_reconciled: " << (rep.agree ? "yes" : "no") << "\n";
  std::cout << "wall_seconds: " << rep.wall_seconds << "\n";
  if (rep.plan) {
    for (std::size_t t = 0; t < rep.plan->size(); ++t) {
      std::cout << "plan_step " << t + 1 << ":";
      for (auto b : (*rep.plan)[t]) std::cout << ' ' << int(b);
      std::cout << "\n";
    }
    plan_verdict v = validate_plan(inst.problem, inst.net, *rep.plan);
    std::cout << "plan_valid: " << (v.ok ? "yes" : "no") << "\n";
    for (const auto& fmsg : v.failures) std::cout << "plan_failure: " << fmsg << "\n";
  }
  if (rep.status == solver_status::unsat) return 1;
  if (rep.status == solver_status::unknown) return 4;
  return 0;
}

int cmd_validate(const fs::path& in, const fs::path& plan_path) {
  instance inst = load_manifest(in);
  std::ifstream is(plan_path, std::ios::binary);
  if (!is) throw io_error("cannot open " + plan_path.string());
  auto plan = read_plan(is);
  if (static_cast<int>(plan.size()) != inst.problem.horizon)
    throw structural_error("plan has " + std::to_string(plan.size()) + " steps, horizon is " +
                           std::to_string(inst.problem.horizon));
  plan_verdict v = validate_plan(inst.problem, inst.net, plan);
  std::cout << "verdict: " << (v.ok ? "ok" : "not-ok") << "\n";
  for (const auto& fmsg : v.failures) std::cout << "failure: " << fmsg << "\n";
  return v.ok ? 0 : 1;
}

int cmd_oracle(const fs::path& in) {
  instance inst = load_manifest(in);
  auto best = brute_force_optimal(inst.net, inst.problem);
  if (!best) {
    std::cout << "status: infeasible\n";
    return 1;
  }
  std::cout << "status: optimal\n";
  std::cout << "scaled_reward: " << best->scaled_reward << "\n";
  std::cout << "reward: " << unscaled(best->scaled_reward, inst.problem.reward.scale_pow10())
            << "\n";
  for (std::size_t t = 0; t < best->actions.size(); ++t) {
    std::cout << "plan_step " << t + 1 << ":";
    for (auto b : best->actions[t]) std::cout << ' ' << int(b);
    std::cout << "\n";
  }
  return 0;
}

int cmd_grid(const std::string& family_str, const fs::path& dir, const std::string& format,
             bool manifests_only) {
  family fam = family_from_name(family_str);
  fs::create_directories(dir);
  wcnf_dialect dialect = dialect_from_name(format);
  for (const domain_spec& spec : parameter_grid(fam)) {
    generated_instance gen = generate(spec);
    std::string name = instance_name(spec);
    write_file(dir / (name + ".json"), write_manifest({gen.problem, gen.net, gen.spec}));
    if (!manifests_only) encode_to_files({gen.problem, gen.net, gen.spec}, dir / (name + ".wcnf"), dialect);
    std::cerr << name << (manifests_only ? "" : " (+wcnf)") << "\n";
  }
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"planning-to-MaxSAT compiler for binarized transition networks"};
  app.require_subcommand(1);

  std::string family_str = "navigation", policy_str = "x-axis", mode_str = "random";
  std::string format = "wcnf2021", solver_cmd, plan_path, out_path, in_path;
  int n = 3, horizon = 4;
  std::uint64_t seed = 0;
  double timeout = 300.0;
  bool manifests_only = false;

  auto* g = app.add_subcommand("generate", "emit an instance manifest");
  g->add_option("--family", family_str, "navigation|inventory|sysadmin|cellda")->required();
  g->add_option("--n", n, "family size parameter")->required();
  g->add_option("--horizon", horizon, "planning horizon")->required();
  g->add_option("--policy", policy_str, "enemy policy (cellda): x-axis|y-axis");
  g->add_option("--seed", seed, "weight seed");
  g->add_option("--weight-mode", mode_str, "random|handcrafted");
  g->add_option("-o,--output", out_path, "manifest path")->required();

  auto* e = app.add_subcommand("encode", "compile a manifest to WCNF");
  e->add_option("-i,--input", in_path, "manifest path")->required();
  e->add_option("-o,--output", out_path, "wcnf path")->required();
  e->add_option("--format", format, "wcnf2021|wcnf2022");

  auto* s = app.add_subcommand("solve", "run an external MaxSAT solver and decode the plan");
  s->add_option("-i,--input", in_path, "manifest path")->required();
  s->add_option("--solver", solver_cmd, "solver command, given the wcnf path")
      ->envname("BNNPLAN_SOLVER");
  s->add_option("--timeout", timeout, "seconds before the solver is killed");

  auto* v = app.add_subcommand("validate", "check a plan file against an instance");
  v->add_option("-i,--input", in_path, "manifest path")->required();
  v->add_option("--plan", plan_path, "plan file")->required();

  auto* o = app.add_subcommand("oracle", "exhaustive optimal plan for small instances");
  o->add_option("-i,--input", in_path, "manifest path")->required();

  auto* gr = app.add_subcommand("grid", "emit the full submitted benchmark grid for a family");
  gr->add_option("--family", family_str, "navigation|inventory|sysadmin|cellda")->required();
  gr->add_option("-o,--output", out_path, "output directory")->required();
  gr->add_option("--format", format, "wcnf2021|wcnf2022");
  gr->add_flag("--manifests-only", manifests_only, "skip the WCNF files (large families)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);  // prints help or the usage error
    return rc == 0 ? 0 : 2;
  }

  if (g->parsed()) {
    domain_spec spec{family_from_name(family_str), n, horizon, policy_from_name(policy_str),
                     seed, weight_mode_from_name(mode_str)};
    return cmd_generate(spec, out_path);
  }
  if (e->parsed()) return cmd_encode(in_path, out_path, format);
  if (s->parsed()) return cmd_solve(in_path, solver_cmd, timeout);
  if (v->parsed()) return cmd_validate(in_path, plan_path);
  if (o->parsed()) return cmd_oracle(in_path);
  if (gr->parsed()) return cmd_grid(family_str, out_path, format, manifests_only);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const parameter_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const capacity_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const unsat_error& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
