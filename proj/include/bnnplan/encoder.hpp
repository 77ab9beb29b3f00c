#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "bnnplan/bnn.hpp"
#include "bnnplan/cardinality.hpp"
#include "bnnplan/cnf.hpp"
#include "bnnplan/errors.hpp"
#include "bnnplan/problem.hpp"

namespace bnnplan {

// Solver variable numbering for the time-indexed problem variables. Action
// vars x(i,t) come first (t = 1..H), then state vars y(i,t) (t = 1..H+1),
// then neuron vars z(j,l,t) (layers 1..L, t = 1..H); every auxiliary variable
// is allocated after this block. Indices i/j are 0-based, t and l 1-based.
class var_atlas {
 public:
  var_atlas() = default;
  var_atlas(const planning_problem& p, const bnn& net)
      : num_state_(p.num_state_bits()),
        num_action_(p.num_action_bits()),
        horizon_(p.horizon),
        widths_(net.widths()) {
    layer_offset_.resize(widths_.size());
    std::partial_sum(widths_.begin(), widths_.end() - 1, layer_offset_.begin() + 1);
    per_step_ = layer_offset_.back() + widths_.back();
    x_base_ = 1;
    y_base_ = x_base_ + num_action_ * horizon_;
    z_base_ = y_base_ + num_state_ * (horizon_ + 1);
  }

  int x(int i, int t) const {
    check(i >= 0 && i < num_action_ && t >= 1 && t <= horizon_, "x");
    return x_base_ + (t - 1) * num_action_ + i;
  }
  int y(int i, int t) const {
    check(i >= 0 && i < num_state_ && t >= 1 && t <= horizon_ + 1, "y");
    return y_base_ + (t - 1) * num_state_ + i;
  }
  int z(int j, int l, int t) const {
    check(l >= 1 && l <= static_cast<int>(widths_.size()) && j >= 0 && j < widths_[l - 1] &&
              t >= 1 && t <= horizon_,
          "z");
    return z_base_ + (t - 1) * per_step_ + layer_offset_[l - 1] + j;
  }

  int num_state() const { return num_state_; }
  int num_action() const { return num_action_; }
  int horizon() const { return horizon_; }
  const std::vector<int>& layer_widths() const { return widths_; }
  int total() const { return num_action_ * horizon_ + num_state_ * (horizon_ + 1) + per_step_ * horizon_; }

 private:
  static void check(bool ok, const char* what) {
    if (!ok) throw structural_error(std::string("atlas index out of range: ") + what);
  }

  int num_state_ = 0;
  int num_action_ = 0;
  int horizon_ = 0;
  std::vector<int> widths_;
  std::vector<int> layer_offset_;
  int per_step_ = 0;
  int x_base_ = 1;
  int y_base_ = 1;
  int z_base_ = 1;
};

// The compiled weighted partial MaxSAT instance plus everything needed to
// decode models and reconcile costs: for any total assignment with hard_ok,
// satisfied soft weight + objective_offset = 10^scale_pow10 * plan reward.
struct encoding_artifact {
  wcnf_formula formula;
  var_atlas atlas;
  std::int64_t objective_offset = 0;
  int scale_pow10 = 0;
};

// Initial state: one unit clause per state bit, the constant-folded form of
// (~y | V) & (y | ~V).
inline void encode_initial(const planning_problem& p, const var_atlas& atlas, wcnf_formula& f) {
  for (int i = 0; i < p.num_state_bits(); ++i)
    f.add_hard({lit::of(atlas.y(i, 1), p.initial[i] != 0)});
}

inline pb_row row_to_pb(const linear_constraint& row, const var_atlas& atlas, int t_state,
                        int t_action) {
  pb_row pb;
  pb.bound = row.bound;
  for (const auto& term : row.state)
    pb.terms.push_back({term.coeff, lit::of(atlas.y(term.bit, t_state))});
  for (const auto& term : row.action)
    pb.terms.push_back({term.coeff, lit::of(atlas.x(term.bit, t_action))});
  return pb;
}

// Goal rows over the final state.
inline void encode_goal(const planning_problem& p, const var_atlas& atlas, wcnf_formula& f) {
  for (const auto& row : p.constraints)
    if (row.kind == row_kind::goal)
      encode_linear_le(f, row_to_pb(row, atlas, p.horizon + 1, -1));
}

// Global rows replicated at every step.
inline void encode_global(const planning_problem& p, const var_atlas& atlas, wcnf_formula& f) {
  for (int t = 1; t <= p.horizon; ++t)
    for (const auto& row : p.constraints)
      if (row.kind == row_kind::global) encode_linear_le(f, row_to_pb(row, atlas, t, t));
}

// Ties the network's first and last layers to the state/action variables,
// one equivalence (two binary clauses) per mapped neuron per step; frozen
// state bits get copy clauses instead.
inline void encode_bnn_link(const planning_problem& p, const bnn& net, const var_atlas& atlas,
                            wcnf_formula& f) {
  const int last = net.depth();
  for (int t = 1; t <= p.horizon; ++t) {
    for (std::size_t pos = 0; pos < net.input_map.size(); ++pos) {
      const auto& r = net.input_map[pos];
      int zvar = atlas.z(static_cast<int>(pos), 1, t);
      int pvar = r.kind == input_ref_kind::state ? atlas.y(r.bit, t) : atlas.x(r.bit, t);
      f.add_hard({lit::of(pvar, false), lit::of(zvar)});
      f.add_hard({lit::of(pvar), lit::of(zvar, false)});
    }
    for (std::size_t j = 0; j < net.output_map.size(); ++j) {
      int zvar = atlas.z(static_cast<int>(j), last, t);
      int yvar = atlas.y(net.output_map[j], t + 1);
      f.add_hard({lit::of(yvar, false), lit::of(zvar)});
      f.add_hard({lit::of(yvar), lit::of(zvar, false)});
    }
    for (const auto& [bit, rule] : net.uncovered) {
      if (rule != uncovered_rule::frozen)
        throw structural_error("state bit " + std::to_string(bit) + " has no usable evolution rule");
      f.add_hard({lit::of(atlas.y(bit, t + 1), false), lit::of(atlas.y(bit, t))});
      f.add_hard({lit::of(atlas.y(bit, t + 1)), lit::of(atlas.y(bit, t), false)});
    }
  }
}

inline std::int64_t ceil_div2(std::int64_t a) {
  return a / 2 + ((a % 2 != 0 && a > 0) ? 1 : 0);
}

// Activation semantics per neuron and step: with literals l_i = z_i when the
// incoming weight is +1 and ~z_i otherwise, the sign test
// sum w*(2z-1) + B >= 0 is exactly "at least ceil((W_prev - B)/2) of the l_i
// are true"; emitted as a two-sided threshold equivalence.
inline void encode_activations(const bnn& net, const var_atlas& atlas, wcnf_formula& f) {
  for (int t = 1; t <= atlas.horizon(); ++t) {
    for (std::size_t li = 0; li < net.layers.size(); ++li) {
      const auto& layer = net.layers[li];
      const int prev_layer = static_cast<int>(li) + 1;
      const int prev_width = net.width(prev_layer);
      std::vector<lit> lits(prev_width);
      for (int j = 0; j < layer.width; ++j) {
        for (int i = 0; i < prev_width; ++i)
          lits[i] = lit::of(atlas.z(i, prev_layer, t), layer.weights[i][j] > 0);
        std::int64_t k = ceil_div2(prev_width - layer.bias[j]);
        encode_at_least_equiv(f, lits, k, lit::of(atlas.z(j, prev_layer + 1, t)));
      }
    }
  }
}

// Reward soft clauses. Positive scaled coefficients reward the literal being
// true; negative ones are rewritten by polarity flip, the constant moving
// into the returned offset so that soft weight + offset equals the scaled
// trajectory reward identically.
inline std::int64_t encode_reward(const planning_problem& p, const var_atlas& atlas,
                                  wcnf_formula& f) {
  std::int64_t offset = 0;
  auto emit = [&](std::int64_t coeff, int var) {
    if (coeff == 0) return;
    if (coeff > 0) {
      f.add_soft(static_cast<std::uint64_t>(coeff), {lit::of(var)});
    } else {
      f.add_soft(static_cast<std::uint64_t>(-coeff), {lit::of(var, false)});
      offset += coeff;
    }
  };
  for (int t = 1; t <= p.horizon; ++t) {
    for (int i = 0; i < p.num_state_bits(); ++i)
      emit(p.reward.scaled_state_coeff(i), atlas.y(i, t + 1));
    for (int i = 0; i < p.num_action_bits(); ++i)
      emit(p.reward.scaled_action_coeff(i), atlas.x(i, t));
  }
  return offset;
}

// Full compilation, clause groups in fixed order: initial, goal, global,
// network link, activations, reward.
inline encoding_artifact encode(const planning_problem& p, const bnn& net) {
  if (auto diags = validate_problem(p); !diags.empty())
    throw structural_error("invalid problem: " + diags.front());
  if (auto diags = validate_bnn(net, p); !diags.empty())
    throw structural_error("invalid network: " + diags.front());

  encoding_artifact art;
  art.atlas = var_atlas(p, net);
  art.formula.reserve(art.atlas.total());
  encode_initial(p, art.atlas, art.formula);
  encode_goal(p, art.atlas, art.formula);
  encode_global(p, art.atlas, art.formula);
  encode_bnn_link(p, net, art.atlas, art.formula);
  encode_activations(net, art.atlas, art.formula);
  art.objective_offset = encode_reward(p, art.atlas, art.formula);
  art.scale_pow10 = p.reward.scale_pow10();
  return art;
}

}  // namespace bnnplan
