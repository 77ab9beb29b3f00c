#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "bnnplan/cnf.hpp"
#include "bnnplan/errors.hpp"

namespace bnnplan {

namespace detail {

struct unary_node {
  std::vector<lit> counters;  // counters[r-1] <-> at least r inputs true
  std::int64_t size = 0;      // leaves below this node
};

// Merges two unary counter blocks. Counter widths are capped at `cap`; with
// two_sided both derivation directions are emitted so every counter is exact
// in any model, otherwise only the lower-bound direction needed for <= rows.
inline unary_node merge_unary(wcnf_formula& f, const unary_node& a, const unary_node& b,
                              std::int64_t cap, bool two_sided) {
  unary_node out;
  out.size = a.size + b.size;
  const std::int64_t w = std::min(cap, out.size);
  out.counters.reserve(w);
  for (std::int64_t r = 0; r < w; ++r) out.counters.push_back(f.fresh());

  const std::int64_t wa = static_cast<std::int64_t>(a.counters.size());
  const std::int64_t wb = static_cast<std::int64_t>(b.counters.size());

  std::vector<lit> cl;
  // count(a) >= i and count(b) >= j imply count >= i+j
  for (std::int64_t i = 0; i <= wa; ++i) {
    for (std::int64_t j = 0; j <= wb; ++j) {
      const std::int64_t t = i + j;
      if (t < 1 || t > w) continue;
      cl.clear();
      if (i > 0) cl.push_back(-a.counters[i - 1]);
      if (j > 0) cl.push_back(-b.counters[j - 1]);
      cl.push_back(out.counters[t - 1]);
      f.add_hard(cl);
    }
  }
  if (two_sided) {
    // count(a) <= i and count(b) <= j imply count <= i+j
    for (std::int64_t i = 0; i <= wa; ++i) {
      for (std::int64_t j = 0; j <= wb; ++j) {
        const std::int64_t t = i + j + 1;
        if (t > w) continue;
        cl.clear();
        if (i < wa) cl.push_back(a.counters[i]);
        if (j < wb) cl.push_back(b.counters[j]);
        cl.push_back(-out.counters[t - 1]);
        f.add_hard(cl);
      }
    }
  }
  return out;
}

inline unary_node build_unary(wcnf_formula& f, std::span<const lit> in, std::int64_t cap,
                              bool two_sided) {
  if (in.size() == 1) return {{in[0]}, 1};
  const std::size_t half = in.size() / 2;
  unary_node a = build_unary(f, in.subspan(0, half), cap, two_sided);
  unary_node b = build_unary(f, in.subspan(half), cap, two_sided);
  return merge_unary(f, a, b, cap, two_sided);
}

// Sorted unary counters over `in`, truncated to the first `cap` outputs.
inline std::vector<lit> unary_counters(wcnf_formula& f, std::span<const lit> in, std::int64_t cap,
                                       bool two_sided) {
  return build_unary(f, in, cap, two_sided).counters;
}

struct weighted_node {
  // Attainable sums (clamped at the cap), ascending, with the literal that is
  // forced true whenever the sum below this node reaches the value.
  std::vector<std::pair<std::int64_t, lit>> values;
};

inline weighted_node merge_weighted(wcnf_formula& f, const weighted_node& a,
                                    const weighted_node& b, std::int64_t cap) {
  std::vector<std::int64_t> sums;
  sums.reserve(a.values.size() + b.values.size() + a.values.size() * b.values.size());
  for (const auto& [u, ul] : a.values) sums.push_back(u);
  for (const auto& [v, vl] : b.values) sums.push_back(v);
  for (const auto& [u, ul] : a.values)
    for (const auto& [v, vl] : b.values) sums.push_back(std::min(u + v, cap));
  std::sort(sums.begin(), sums.end());
  sums.erase(std::unique(sums.begin(), sums.end()), sums.end());

  weighted_node out;
  out.values.reserve(sums.size());
  std::map<std::int64_t, lit> at;
  for (std::int64_t s : sums) {
    lit l = f.fresh();
    out.values.emplace_back(s, l);
    at.emplace(s, l);
  }

  for (const auto& [u, ul] : a.values) f.add_hard({-ul, at.at(u)});
  for (const auto& [v, vl] : b.values) f.add_hard({-vl, at.at(v)});
  for (const auto& [u, ul] : a.values)
    for (const auto& [v, vl] : b.values) f.add_hard({-ul, -vl, at.at(std::min(u + v, cap))});
  return out;
}

inline weighted_node build_weighted(wcnf_formula& f, std::span<const pb_term> terms,
                                    std::int64_t cap) {
  if (terms.size() == 1) return {{{std::min(terms[0].coeff, cap), terms[0].l}}};
  const std::size_t half = terms.size() / 2;
  weighted_node a = build_weighted(f, terms.subspan(0, half), cap);
  weighted_node b = build_weighted(f, terms.subspan(half), cap);
  return merge_weighted(f, a, b, cap);
}

}  // namespace detail

// CNF encoding of a linear <= row. Unit-coefficient rows go through a unary
// counter network, general rows through a sum-merging (generalized totalizer)
// tree. Models restricted to the row's literals are exactly the assignments
// satisfying the row; a row contradictory on its own raises unsat_error.
inline void encode_linear_le(wcnf_formula& f, pb_row row) {
  row = normalize_pb(std::move(row));
  if (row.bound < 0)
    throw unsat_error("linear constraint unsatisfiable: bound " + std::to_string(row.bound) +
                      " after normalization");
  std::int64_t total = 0;
  for (const auto& t : row.terms) total += t.coeff;
  if (total <= row.bound) return;  // tautology

  bool all_unit = true;
  for (const auto& t : row.terms)
    if (t.coeff != 1) all_unit = false;

  if (row.bound == 0) {
    // every term with a positive coefficient must be off
    for (const auto& t : row.terms) f.add_hard({-t.l});
    return;
  }

  if (all_unit) {
    std::vector<lit> lits;
    lits.reserve(row.terms.size());
    for (const auto& t : row.terms) lits.push_back(t.l);
    const std::int64_t k = row.bound;
    auto counters = detail::unary_counters(f, lits, k + 1, /*two_sided=*/false);
    f.add_hard({-counters[static_cast<std::size_t>(k)]});
  } else {
    const std::int64_t cap = row.bound + 1;
    auto root = detail::build_weighted(f, row.terms, cap);
    // the total exceeds the bound, so the clamped overflow value is attainable
    for (const auto& [v, l] : root.values)
      if (v == cap) {
        f.add_hard({-l});
        return;
      }
    throw structural_error("overflow counter missing in weighted merge");
  }
}

// Two-sided threshold equivalence: out <-> (at least k of `inputs` are true).
// Degenerate thresholds collapse to unit clauses; otherwise the k-th sorted
// counter of a unary network is unified with `out` by two binary clauses.
inline void encode_at_least_equiv(wcnf_formula& f, std::span<const lit> inputs, std::int64_t k,
                                  lit out) {
  if (inputs.empty()) throw structural_error("threshold over no inputs");
  if (k <= 0) {
    f.add_hard({out});
    return;
  }
  if (k > static_cast<std::int64_t>(inputs.size())) {
    f.add_hard({-out});
    return;
  }
  auto counters = detail::unary_counters(f, inputs, k, /*two_sided=*/true);
  lit kth = counters[static_cast<std::size_t>(k - 1)];
  f.add_hard({-out, kth});
  f.add_hard({out, -kth});
}

}  // namespace bnnplan
