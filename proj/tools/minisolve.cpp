// Exhaustive weighted partial MaxSAT solver over WCNF files (2021 or 2022
// dialect). Meant as a reference solver for small instances: exact, simple,
// and honest about giving up (prints `s UNKNOWN` past its limits).

#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bnnplan/cnf.hpp"
#include "bnnplan/errors.hpp"
#include "bnnplan/io.hpp"
#include "bnnplan/minisolver.hpp"

int main(int argc, char** argv) {
  CLI::App app{"exhaustive wcnf solver"};
  std::string path;
  bnnplan::mini_solver::limits lim;
  lim.max_vars = 100000;
  app.add_option("wcnf", path, "wcnf file")->required();
  app.add_option("--max-nodes", lim.max_nodes, "search node limit");
  app.add_option("--max-vars", lim.max_vars, "variable count limit");
  CLI11_PARSE(app, argc, argv);

  std::ifstream is(path);
  if (!is) {
    std::cerr << "cannot open " << path << "\n";
    return 1;
  }

  try {
    bnnplan::parsed_wcnf parsed = bnnplan::read_wcnf(is);
    bnnplan::wcnf_formula f;
    f.reserve(parsed.num_vars);
    for (const auto& c : parsed.hard) f.add_hard(c);
    for (const auto& [w, c] : parsed.soft) f.add_soft(w, c);

    std::cout << "c bnnplan-minisolve exhaustive search\n";
    bnnplan::mini_solver solver(f, lim);
    auto best = solver.optimize();
    if (!best) {
      std::cout << "s UNSATISFIABLE\n";
      return 0;
    }
    std::cout << "o " << best->falsified_weight << "\n";
    std::cout << "s OPTIMUM FOUND\n";
    std::cout << "v";
    for (int v = 1; v <= f.num_vars(); ++v)
      std::cout << ' ' << (best->model[v] == 1 ? v : -v);
    std::cout << "\n";
    return 0;
  } catch (const bnnplan::capacity_error& e) {
    std::cout << "c " << e.what() << "\n";
    std::cout << "s UNKNOWN\n";
    return 0;
  } catch (const bnnplan::unsat_error&) {
    std::cout << "s UNSATISFIABLE\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
