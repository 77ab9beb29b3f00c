#pragma once

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bnnplan/errors.hpp"

namespace bnnplan {

// DIMACS-style literal: var() >= 1, sign carried by the stored code.
struct lit {
  int code = 0;

  static lit of(int var, bool positive = true) {
    if (var < 1) throw structural_error("literal on variable " + std::to_string(var));
    return lit{positive ? var : -var};
  }
  static lit from_code(int c) {
    if (c == 0) throw structural_error("literal code 0");
    return lit{c};
  }

  int var() const { return code < 0 ? -code : code; }
  bool positive() const { return code > 0; }
  lit operator-() const { return lit{-code}; }
  friend bool operator==(const lit&, const lit&) = default;
  friend bool operator<(const lit& a, const lit& b) { return a.code < b.code; }
};

using clause_view = std::span<const lit>;

struct pb_term {
  std::int64_t coeff = 0;
  lit l;
};

// Linear row sum(coeff_i * lit_i) <= bound over Booleans.
struct pb_row {
  std::vector<pb_term> terms;
  std::int64_t bound = 0;
};

// All coefficients made positive (negations absorbed into the literals,
// bound adjusted), zero terms dropped.
inline pb_row normalize_pb(pb_row row) {
  pb_row out;
  out.bound = row.bound;
  out.terms.reserve(row.terms.size());
  for (const auto& t : row.terms) {
    if (t.coeff == 0) continue;
    if (t.coeff > 0) {
      out.terms.push_back(t);
    } else {
      out.terms.push_back({-t.coeff, -t.l});
      out.bound += -t.coeff;
    }
  }
  return out;
}

// -1 unassigned, 0 false, 1 true; index 0 unused.
using assignment = std::vector<std::int8_t>;

// Weighted partial CNF under construction: hard clauses, positively weighted
// soft clauses, and a fresh-variable counter. Clauses live in flat buffers;
// iteration hands out spans. Single writer while building.
class wcnf_formula {
 public:
  lit fresh() { return lit::of(++num_vars_); }

  // Block-allocates `count` variables, returns the first index.
  int reserve(int count) {
    if (count < 0) throw structural_error("negative reservation");
    int first = num_vars_ + 1;
    num_vars_ += count;
    return first;
  }

  int num_vars() const { return num_vars_; }

  void add_hard(clause_view c) {
    if (c.empty()) throw unsat_error("empty hard clause: formula is unsatisfiable");
    push(hard_lits_, hard_off_, c);
  }
  void add_hard(std::initializer_list<lit> c) { add_hard(clause_view(c.begin(), c.size())); }

  void add_soft(std::uint64_t weight, clause_view c) {
    if (weight < 1) throw structural_error("soft clause weight must be >= 1");
    if (c.empty()) throw structural_error("empty soft clause");
    push(soft_lits_, soft_off_, c);
    soft_weights_.push_back(weight);
    soft_sum_ += weight;
  }
  void add_soft(std::uint64_t weight, std::initializer_list<lit> c) {
    add_soft(weight, clause_view(c.begin(), c.size()));
  }

  std::size_t hard_count() const { return hard_off_.size() - 1; }
  std::size_t soft_count() const { return soft_weights_.size(); }

  clause_view hard(std::size_t i) const {
    return {hard_lits_.data() + hard_off_[i], hard_off_[i + 1] - hard_off_[i]};
  }
  clause_view soft(std::size_t i) const {
    return {soft_lits_.data() + soft_off_[i], soft_off_[i + 1] - soft_off_[i]};
  }
  std::uint64_t soft_weight(std::size_t i) const { return soft_weights_[i]; }

  std::uint64_t soft_weight_sum() const { return soft_sum_; }
  // Reserved hard weight; strictly larger than the sum of soft weights.
  std::uint64_t top() const { return soft_sum_ + 1; }

  struct eval_result {
    bool hard_ok = false;
    std::uint64_t soft_weight = 0;
  };

  // Evaluates a total assignment. Partial assignments are rejected.
  eval_result evaluate(const assignment& a) const {
    if (static_cast<int>(a.size()) != num_vars_ + 1)
      throw structural_error("assignment covers " + std::to_string(a.size() ? a.size() - 1 : 0) +
                             " of " + std::to_string(num_vars_) + " variables");
    for (int v = 1; v <= num_vars_; ++v)
      if (a[v] != 0 && a[v] != 1) throw structural_error("partial assignment at variable " + std::to_string(v));
    eval_result r;
    r.hard_ok = true;
    for (std::size_t i = 0; i < hard_count(); ++i)
      if (!satisfied(hard(i), a)) {
        r.hard_ok = false;
        break;
      }
    for (std::size_t i = 0; i < soft_count(); ++i)
      if (satisfied(soft(i), a)) r.soft_weight += soft_weights_[i];
    return r;
  }

  static bool satisfied(clause_view c, const assignment& a) {
    for (lit l : c)
      if (a[l.var()] == (l.positive() ? 1 : 0)) return true;
    return false;
  }

 private:
  void push(std::vector<lit>& lits, std::vector<std::size_t>& off, clause_view c) {
    for (lit l : c) {
      if (l.code == 0) throw structural_error("zero literal in clause");
      if (l.var() > num_vars_)
        throw structural_error("literal on unallocated variable " + std::to_string(l.var()));
    }
    lits.insert(lits.end(), c.begin(), c.end());
    off.push_back(lits.size());
  }

  int num_vars_ = 0;
  std::vector<lit> hard_lits_;
  std::vector<std::size_t> hard_off_{0};
  std::vector<lit> soft_lits_;
  std::vector<std::size_t> soft_off_{0};
  std::vector<std::uint64_t> soft_weights_;
  std::uint64_t soft_sum_ = 0;
};

}  // namespace bnnplan
