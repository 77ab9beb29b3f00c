#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bnnplan/bnn.hpp"
#include "bnnplan/encoder.hpp"
#include "bnnplan/errors.hpp"
#include "bnnplan/io.hpp"
#include "bnnplan/problem.hpp"

namespace bnnplan {

struct process_result {
  bool spawned = false;
  bool timed_out = false;
  int exit_code = -1;
  std::string output;
  std::string error;
};

// Runs argv with stdout captured, killing the child after the timeout.
inline process_result run_process(const std::vector<std::string>& argv, double timeout_seconds) {
  process_result res;
  if (argv.empty()) {
    res.error = "empty command";
    return res;
  }
  int fds[2];
  if (pipe(fds) != 0) {
    res.error = "pipe failed";
    return res;
  }
  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    res.error = "fork failed";
    return res;
  }
  if (pid == 0) {
    close(fds[0]);
    dup2(fds[1], STDOUT_FILENO);
    close(fds[1]);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(fds[1]);
  res.spawned = true;

  const auto deadline =
      std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
  bool open = true;
  char buf[1 << 16];
  while (open) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                    deadline - std::chrono::steady_clock::now())
                    .count();
    if (left < 0) left = 0;
    pollfd pfd{fds[0], POLLIN, 0};
    int pr = poll(&pfd, 1, static_cast<int>(std::min<long long>(left, 1000)));
    if (pr > 0) {
      ssize_t got = read(fds[0], buf, sizeof buf);
      if (got > 0)
        res.output.append(buf, static_cast<std::size_t>(got));
      else
        open = false;  // EOF or error
    }
    if (std::chrono::steady_clock::now() >= deadline) {
      res.timed_out = true;
      kill(pid, SIGKILL);
      break;
    }
  }
  // drain whatever the child managed to write
  for (;;) {
    ssize_t got = read(fds[0], buf, sizeof buf);
    if (got <= 0) break;
    res.output.append(buf, static_cast<std::size_t>(got));
  }
  close(fds[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  if (res.exit_code == 127 && res.output.empty()) {
    res.spawned = false;
    res.error = "command not found: " + argv[0];
  }
  return res;
}

struct plan_verdict {
  bool ok = false;
  std::vector<std::string> failures;
};

// Checks the solution conditions: the rollout under the network from the
// initial state must satisfy every global row at every step and the goal
// rows at the end.
inline plan_verdict validate_plan(const planning_problem& p, const bnn& net,
                                  std::span<const std::vector<std::uint8_t>> plan) {
  trajectory tr = simulate(net, p, plan);
  plan_verdict v;
  for (int t = 1; t <= p.horizon; ++t) {
    if (tr.global_ok[t - 1]) continue;
    int idx = 0;
    for (const auto& row : p.constraints) {
      if (row.kind == row_kind::global &&
          !eval_constraint(row, tr.states[t - 1], tr.actions[t - 1]))
        v.failures.push_back("global row " + std::to_string(idx) + " violated at step " +
                             std::to_string(t));
      ++idx;
    }
  }
  if (!tr.goal_ok) {
    int idx = 0;
    for (const auto& row : p.constraints) {
      if (row.kind == row_kind::goal && !eval_constraint(row, tr.states.back(), {}))
        v.failures.push_back("goal row " + std::to_string(idx) + " violated at step " +
                             std::to_string(p.horizon + 1));
      ++idx;
    }
  }
  v.ok = v.failures.empty();
  return v;
}

struct solve_report {
  solver_status status = solver_status::unknown;
  std::optional<std::vector<std::vector<std::uint8_t>>> plan;
  std::optional<trajectory> decoded;
  std::optional<std::int64_t> solver_cost;
  std::optional<std::int64_t> recomputed_scaled_reward;
  bool agree = false;
  double wall_seconds = 0.0;
  std::string note;
};

namespace detail {

inline std::vector<std::string> split_command(const std::string& cmd) {
  std::vector<std::string> out;
  std::istringstream is(cmd);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

struct temp_file {
  std::filesystem::path path;
  explicit temp_file(const std::string& stem) {
    static std::atomic<unsigned> counter{0};
    path = std::filesystem::temp_directory_path() /
           (stem + "." + std::to_string(getpid()) + "." + std::to_string(counter++) + ".wcnf");
  }
  ~temp_file() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

}  // namespace detail

// Writes the WCNF, runs `<solver_cmd> <path>`, parses the output and decodes
// the action variables into a plan. The plan is re-simulated and the solver's
// cost (falsified soft weight) reconciled against the recomputed reward:
//   cost == soft_sum - (scaled_reward - objective_offset).
// Failures land in the status/note, never as exceptions.
inline solve_report solve(const encoding_artifact& art, const planning_problem& p, const bnn& net,
                          const std::string& solver_cmd, double timeout_seconds,
                          wcnf_dialect dialect = wcnf_dialect::wcnf2021) {
  solve_report rep;
  auto started = std::chrono::steady_clock::now();
  auto done = [&]() -> solve_report& {
    rep.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return rep;
  };

  detail::temp_file tmp("bnnplan");
  {
    std::ofstream os(tmp.path, std::ios::binary);
    if (!os) {
      rep.note = "cannot write " + tmp.path.string();
      return done();
    }
    try {
      write_wcnf(art.formula, dialect, os, wcnf_comments(art));
    } catch (const io_error& e) {
      rep.note = e.what();
      return done();
    }
  }

  auto argv = detail::split_command(solver_cmd);
  if (argv.empty()) {
    rep.note = "empty solver command";
    return done();
  }
  argv.push_back(tmp.path.string());
  process_result pr = run_process(argv, timeout_seconds);
  if (!pr.spawned) {
    rep.note = pr.error.empty() ? "solver failed to start" : pr.error;
    return done();
  }
  if (pr.timed_out) {
    rep.note = "solver timed out";
    return done();
  }

  solver_output out;
  try {
    out = parse_solver_output(pr.output);
  } catch (const parse_error& e) {
    rep.note = e.what();
    return done();
  }
  rep.status = out.status;
  rep.solver_cost = out.cost;
  if (out.status != solver_status::optimum && out.status != solver_status::sat) return done();
  if (out.model.empty()) {
    rep.note = "solver reported a solution but no values";
    rep.status = solver_status::unknown;
    return done();
  }

  // absent variables default to false
  std::vector<std::uint8_t> value(static_cast<std::size_t>(art.formula.num_vars()) + 1, 0);
  for (lit l : out.model)
    if (l.var() < static_cast<int>(value.size())) value[l.var()] = l.positive() ? 1 : 0;

  std::vector<std::vector<std::uint8_t>> plan;
  for (int t = 1; t <= p.horizon; ++t) {
    std::vector<std::uint8_t> a(p.num_action_bits());
    for (int i = 0; i < p.num_action_bits(); ++i) a[i] = value[art.atlas.x(i, t)];
    plan.push_back(std::move(a));
  }
  rep.plan = plan;
  rep.decoded = simulate(net, p, plan);
  rep.recomputed_scaled_reward = rep.decoded->scaled_reward;
  if (rep.solver_cost) {
    std::int64_t expected = static_cast<std::int64_t>(art.formula.soft_weight_sum()) -
                            (rep.decoded->scaled_reward - art.objective_offset);
    rep.agree = *rep.solver_cost == expected;
  }
  return done();
}

}  // namespace bnnplan
