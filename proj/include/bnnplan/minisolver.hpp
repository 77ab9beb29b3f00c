#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnnplan/cnf.hpp"
#include "bnnplan/errors.hpp"

namespace bnnplan {

// Exhaustive DPLL search over a frozen formula: decision solving under
// assumptions, optimal weighted MaxSAT by branch and bound, and model
// enumeration. A test-scale tool, not a competitive solver; guarded by node
// and variable limits.
class mini_solver {
 public:
  struct limits {
    std::uint64_t max_nodes = 50'000'000;
    int max_vars = 1 << 20;
  };

  explicit mini_solver(const wcnf_formula& f, limits lim = limits()) : lim_(lim) {
    nvars_ = f.num_vars();
    if (nvars_ > lim_.max_vars)
      throw capacity_error("formula has " + std::to_string(nvars_) + " variables; limit " +
                           std::to_string(lim_.max_vars));
    occ_.resize(2 * static_cast<std::size_t>(nvars_) + 2);
    for (std::size_t i = 0; i < f.hard_count(); ++i) append(f.hard(i), 0, true);
    for (std::size_t i = 0; i < f.soft_count(); ++i) append(f.soft(i), f.soft_weight(i), false);
    val_.assign(nvars_ + 1, -1);
  }

  int num_vars() const { return nvars_; }

  // Blocking clauses for model enumeration; only valid between searches.
  void add_clause(clause_view c) {
    if (c.empty()) throw unsat_error("empty clause added to solver");
    append(c, 0, true);
  }

  // Finds any total assignment satisfying all hard clauses and the
  // assumptions, or nullopt. Soft clauses are ignored.
  std::optional<assignment> solve(std::span<const lit> assumptions = {}) {
    nodes_ = 0;
    std::optional<assignment> model;
    if (plant(assumptions) && propagate() && decide(1)) model = val_;
    undo_to(0);
    return model;
  }

  struct optimum {
    std::uint64_t falsified_weight = 0;
    assignment model;
  };

  // Minimizes the total weight of falsified soft clauses over all hard
  // models; nullopt when the hard clauses are unsatisfiable.
  std::optional<optimum> optimize(std::span<const lit> assumptions = {}) {
    nodes_ = 0;
    best_cost_ = UINT64_MAX;
    best_model_.clear();
    if (plant(assumptions) && propagate()) minimize(1);
    undo_to(0);
    if (best_model_.empty()) return std::nullopt;
    return optimum{best_cost_, std::move(best_model_)};
  }

  // Calls fn once per distinct projection of the hard models onto
  // `projection` (variable indices); mutates the solver with blocking
  // clauses.
  template <typename Fn>
  void for_each_model(std::span<const int> projection, Fn&& fn) {
    for (;;) {
      auto model = solve();
      if (!model) return;
      std::vector<std::uint8_t> proj;
      std::vector<lit> block;
      proj.reserve(projection.size());
      block.reserve(projection.size());
      for (int v : projection) {
        proj.push_back(static_cast<std::uint8_t>((*model)[v]));
        block.push_back(lit::of(v, (*model)[v] == 0));
      }
      fn(proj, *model);
      if (block.empty()) return;  // single (empty) projection
      add_clause(block);
    }
  }

 private:
  struct cls {
    std::vector<lit> lits;
    std::uint64_t weight = 0;
    bool hard = true;
    int ntrue = 0;
    int nunass = 0;
  };

  static std::size_t idx(lit l) {
    return 2 * static_cast<std::size_t>(l.var()) + (l.positive() ? 0 : 1);
  }

  void append(clause_view c, std::uint64_t weight, bool hard) {
    cls k;
    k.lits.assign(c.begin(), c.end());
    k.weight = weight;
    k.hard = hard;
    k.nunass = static_cast<int>(k.lits.size());
    int id = static_cast<int>(clauses_.size());
    for (lit l : k.lits) occ_[idx(l)].push_back(id);
    clauses_.push_back(std::move(k));
  }

  bool plant(std::span<const lit> assumptions) {
    for (lit l : assumptions) {
      std::int8_t want = l.positive() ? 1 : 0;
      if (val_[l.var()] == want) continue;
      if (val_[l.var()] != -1) return false;
      if (!put(l)) return false;
    }
    return true;
  }

  // Assigns l and maintains counters; false if a hard clause just died.
  bool put(lit l) {
    val_[l.var()] = l.positive() ? 1 : 0;
    trail_.push_back(l.var());
    bool ok = true;
    for (int c : occ_[idx(l)]) ++clauses_[c].ntrue;
    for (int c : occ_[idx(-l)]) {
      cls& k = clauses_[c];
      --k.nunass;
      if (k.ntrue == 0 && k.nunass == 0) {
        if (k.hard)
          ok = false;
        else
          falsified_ += k.weight;
      }
    }
    return ok;
  }

  void unput(int v) {
    lit l = lit::of(v, val_[v] == 1);
    for (int c : occ_[idx(-l)]) {
      cls& k = clauses_[c];
      if (k.ntrue == 0 && k.nunass == 0 && !k.hard) falsified_ -= k.weight;
      ++k.nunass;
    }
    for (int c : occ_[idx(l)]) --clauses_[c].ntrue;
    val_[v] = -1;
  }

  void undo_to(std::size_t mark) {
    while (trail_.size() > mark) {
      unput(trail_.back());
      trail_.pop_back();
    }
    qhead_ = std::min(qhead_, trail_.size());
  }

  bool propagate() {
    while (qhead_ < trail_.size()) {
      int v = trail_[qhead_++];
      lit l = lit::of(v, val_[v] == 1);
      for (int ci : occ_[idx(-l)]) {
        const cls& k = clauses_[ci];
        if (!k.hard || k.ntrue > 0) continue;
        if (k.nunass == 0) return false;
        if (k.nunass == 1) {
          for (lit u : k.lits) {
            if (val_[u.var()] != -1) continue;
            if (!put(u)) return false;
            break;
          }
        }
      }
    }
    return true;
  }

  int next_unassigned(int from) const {
    for (int v = from; v <= nvars_; ++v)
      if (val_[v] == -1) return v;
    return 0;
  }

  void bump() {
    if (++nodes_ > lim_.max_nodes)
      throw capacity_error("search node limit exceeded; shrink the instance");
  }

  bool decide(int from) {
    bump();
    int v = next_unassigned(from);
    if (v == 0) return true;
    for (std::int8_t value : {std::int8_t(0), std::int8_t(1)}) {
      std::size_t mark = trail_.size();
      if (put(lit::of(v, value == 1)) && propagate() && decide(v + 1)) return true;
      undo_to(mark);
    }
    return false;
  }

  void minimize(int from) {
    bump();
    if (falsified_ >= best_cost_) return;
    int v = next_unassigned(from);
    if (v == 0) {
      best_cost_ = falsified_;
      best_model_ = val_;
      return;
    }
    for (std::int8_t value : {std::int8_t(0), std::int8_t(1)}) {
      std::size_t mark = trail_.size();
      if (put(lit::of(v, value == 1)) && propagate() && falsified_ < best_cost_) minimize(v + 1);
      undo_to(mark);
    }
  }

  limits lim_;
  int nvars_ = 0;
  std::vector<cls> clauses_;
  std::vector<std::vector<int>> occ_;
  assignment val_;
  std::vector<int> trail_;
  std::size_t qhead_ = 0;
  std::uint64_t falsified_ = 0;
  std::uint64_t nodes_ = 0;
  std::uint64_t best_cost_ = UINT64_MAX;
  assignment best_model_;
};

}  // namespace bnnplan
