#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bnnplan/errors.hpp"
#include "bnnplan/problem.hpp"
#include "bnnplan/rational.hpp"

namespace bnnplan {

struct batch_norm_params {
  rational mu;      // input mean
  rational sigma2;  // input variance, >= 0
  rational eps;     // stability constant, > 0
  rational gamma;   // input scaling, != 0
  rational beta;    // input bias
};

// Integer bias folded out of batch normalization:
//   ceil(beta * sqrt(sigma2 + eps) / gamma - mu)
// computed exactly: the square root never materializes, candidates are
// compared through squared rational inequalities and pinned by bisection.
inline std::int64_t compute_bias(const batch_norm_params& p) {
  if (p.gamma.is_zero()) throw parameter_error("batch norm gamma must be nonzero");
  const rational q = p.sigma2 + p.eps;
  if (q.sign() <= 0) throw parameter_error("batch norm sigma2 + eps must be positive");
  const rational c = p.beta / p.gamma;

  // c*sqrt(q) - mu <= r, decided without evaluating the root
  auto below = [&](const bigint& r) {
    rational d = rational(r, 1) + p.mu;
    int cs = c.sign();
    int ds = d.sign();
    if (cs == 0) return ds >= 0;
    if (cs > 0 && ds < 0) return false;
    if (cs < 0 && ds >= 0) return true;
    rational c2q = c * c * q;
    rational d2 = d * d;
    return cs > 0 ? c2q <= d2 : c2q >= d2;
  };

  // sqrt(q) lies in [root, root+1] / den with root = isqrt(num*den)
  const bigint num_den = q.num() * q.den();
  bigint root = boost::multiprecision::sqrt(num_den);
  rational s_lo(root, q.den());
  rational s_hi(root + 1, q.den());
  rational e_lo = (c.sign() >= 0 ? c * s_lo : c * s_hi) - p.mu;
  rational e_hi = (c.sign() >= 0 ? c * s_hi : c * s_lo) - p.mu;

  bigint lo = e_lo.floor();
  if (below(lo)) return to_int64(lo);
  bigint hi = e_hi.ceil();
  while (hi - lo > 1) {
    bigint mid = (lo + hi) / 2;
    if (below(mid))
      hi = mid;
    else
      lo = mid;
  }
  return to_int64(hi);
}

// Boolean-abstracted sign activation: with inputs z in {0,1} standing for
// the trained -1/+1 levels, fires iff sum_i w_i * (2 z_i - 1) + bias >= 0.
inline bool neuron_fires(std::span<const std::int8_t> weights_column,
                         std::span<const std::uint8_t> inputs, std::int64_t bias) {
  if (weights_column.size() != inputs.size())
    throw structural_error("neuron arity mismatch: " + std::to_string(weights_column.size()) +
                           " weights, " + std::to_string(inputs.size()) + " inputs");
  std::int64_t sum = bias;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    int pm = inputs[i] ? 1 : -1;
    sum += weights_column[i] * pm;
  }
  return sum >= 0;
}

struct bnn_layer {
  int width = 0;                               // W_l
  std::vector<std::vector<std::int8_t>> weights;  // [W_{l-1}][W_l], entries +-1
  std::vector<std::int64_t> bias;              // per neuron
  std::vector<std::optional<batch_norm_params>> batch_norm;  // per neuron, optional
};

enum class input_ref_kind { state, action };

struct input_ref {
  input_ref_kind kind = input_ref_kind::state;
  int bit = 0;
  friend bool operator==(const input_ref&, const input_ref&) = default;
};

enum class uncovered_rule { frozen, forbidden };

// The learned transition network: input neurons map onto (a subset of the)
// state bits followed by all action bits; output neurons map injectively
// onto state bits. State bits the network does not produce must carry an
// uncovered rule ("frozen" copies the previous value). Immutable after load.
struct bnn {
  std::vector<input_ref> input_map;    // neuron order of layer 1
  std::vector<bnn_layer> layers;       // layers 2..L
  std::vector<int> output_map;         // output neuron -> state bit
  std::map<int, uncovered_rule> uncovered;  // state bit -> rule

  int input_width() const { return static_cast<int>(input_map.size()); }
  int depth() const { return static_cast<int>(layers.size()) + 1; }  // L
  int width(int layer) const {  // layer 1..L
    return layer == 1 ? input_width() : layers[layer - 2].width;
  }
  std::vector<int> widths() const {
    std::vector<int> w{input_width()};
    for (const auto& l : layers) w.push_back(l.width);
    return w;
  }
};

inline std::vector<std::string> validate_bnn(const bnn& net, const planning_problem& p) {
  std::vector<std::string> diags;
  const int n = p.num_state_bits();
  const int m = p.num_action_bits();

  if (net.layers.empty()) diags.push_back("network has no weight layers");

  // input map: state bits ascending, then all action bits ascending
  int seen_actions = 0;
  int prev_state = -1, prev_action = -1;
  bool in_actions = false;
  for (std::size_t i = 0; i < net.input_map.size(); ++i) {
    const auto& r = net.input_map[i];
    if (r.kind == input_ref_kind::state) {
      if (in_actions) diags.push_back("input_map: state bit after action bits at neuron " + std::to_string(i));
      if (r.bit < 0 || r.bit >= n) diags.push_back("input_map: state bit out of range at neuron " + std::to_string(i));
      else if (r.bit <= prev_state) diags.push_back("input_map: state bits not strictly ascending at neuron " + std::to_string(i));
      prev_state = r.bit;
    } else {
      in_actions = true;
      ++seen_actions;
      if (r.bit < 0 || r.bit >= m) diags.push_back("input_map: action bit out of range at neuron " + std::to_string(i));
      else if (r.bit <= prev_action) diags.push_back("input_map: action bits not strictly ascending at neuron " + std::to_string(i));
      prev_action = r.bit;
    }
  }
  if (seen_actions != m)
    diags.push_back("input_map covers " + std::to_string(seen_actions) + " of " +
                    std::to_string(m) + " action bits");

  int prev_width = net.input_width();
  for (std::size_t li = 0; li < net.layers.size(); ++li) {
    const auto& layer = net.layers[li];
    const std::string at = "layer " + std::to_string(li + 2);
    if (layer.width < 1) diags.push_back(at + ": non-positive width");
    if (static_cast<int>(layer.weights.size()) != prev_width)
      diags.push_back(at + ": weight rows " + std::to_string(layer.weights.size()) +
                      ", expected " + std::to_string(prev_width));
    for (const auto& row : layer.weights) {
      if (static_cast<int>(row.size()) != layer.width) {
        diags.push_back(at + ": weight row width mismatch");
        break;
      }
      for (std::int8_t w : row)
        if (w != 1 && w != -1) {
          diags.push_back(at + ": weight not in {-1,+1}");
          break;
        }
    }
    if (static_cast<int>(layer.bias.size()) != layer.width)
      diags.push_back(at + ": bias count mismatch");
    if (!layer.batch_norm.empty()) {
      if (static_cast<int>(layer.batch_norm.size()) != layer.width) {
        diags.push_back(at + ": batch norm count mismatch");
      } else {
        for (int j = 0; j < layer.width; ++j)
          if (layer.batch_norm[j] && compute_bias(*layer.batch_norm[j]) != layer.bias[j])
            diags.push_back(at + ": bias and batch norm disagree at neuron " + std::to_string(j));
      }
    }
    prev_width = layer.width;
  }

  if (!net.layers.empty() && static_cast<int>(net.output_map.size()) != net.layers.back().width)
    diags.push_back("output_map size " + std::to_string(net.output_map.size()) +
                    " does not match last layer width");
  std::vector<int> covered(n, 0);
  for (std::size_t j = 0; j < net.output_map.size(); ++j) {
    int bit = net.output_map[j];
    if (bit < 0 || bit >= n) {
      diags.push_back("output_map: state bit out of range at neuron " + std::to_string(j));
      continue;
    }
    if (covered[bit]++) diags.push_back("output_map: state bit " + std::to_string(bit) + " mapped twice");
  }
  for (const auto& [bit, rule] : net.uncovered) {
    if (bit < 0 || bit >= n) {
      diags.push_back("uncovered rule on out-of-range state bit " + std::to_string(bit));
      continue;
    }
    if (covered[bit]) diags.push_back("uncovered rule on produced state bit " + std::to_string(bit));
  }
  for (int bit = 0; bit < n; ++bit) {
    if (covered[bit]) continue;
    auto it = net.uncovered.find(bit);
    if (it == net.uncovered.end())
      diags.push_back("state bit " + std::to_string(bit) +
                      " is not produced by the network and has no evolution rule");
    else if (it->second == uncovered_rule::forbidden)
      diags.push_back("state bit " + std::to_string(bit) + " is marked forbidden");
  }

  return diags;
}

// One forward pass; uncovered frozen bits keep their current value.
inline std::vector<std::uint8_t> forward(const bnn& net, std::span<const std::uint8_t> state,
                                         std::span<const std::uint8_t> action) {
  std::vector<std::uint8_t> z;
  z.reserve(net.input_map.size());
  for (const auto& r : net.input_map) {
    if (r.kind == input_ref_kind::state) {
      if (r.bit >= static_cast<int>(state.size())) throw structural_error("state narrower than input map");
      z.push_back(state[r.bit]);
    } else {
      if (r.bit >= static_cast<int>(action.size())) throw structural_error("action narrower than input map");
      z.push_back(action[r.bit]);
    }
  }
  for (const auto& layer : net.layers) {
    if (z.size() != layer.weights.size()) throw structural_error("layer width mismatch in forward pass");
    std::vector<std::int64_t> sum(layer.width);
    for (int j = 0; j < layer.width; ++j) sum[j] = layer.bias[j];
    for (std::size_t i = 0; i < z.size(); ++i) {
      const int pm = z[i] ? 1 : -1;
      const auto& row = layer.weights[i];
      for (int j = 0; j < layer.width; ++j) sum[j] += row[j] * pm;
    }
    std::vector<std::uint8_t> next(layer.width);
    for (int j = 0; j < layer.width; ++j) next[j] = sum[j] >= 0 ? 1 : 0;
    z = std::move(next);
  }
  std::vector<std::uint8_t> out(state.begin(), state.end());  // frozen bits carry over
  for (std::size_t j = 0; j < net.output_map.size(); ++j) out[net.output_map[j]] = z[j];
  return out;
}

// A rollout with bookkeeping: states s^1..s^{H+1}, the actions taken, the
// per-step global-row flags, goal satisfaction, and the scaled total reward
// sum_t R(s^{t+1}, a^t).
struct trajectory {
  std::vector<std::vector<std::uint8_t>> states;
  std::vector<std::vector<std::uint8_t>> actions;
  std::vector<std::uint8_t> global_ok;
  bool goal_ok = false;
  std::int64_t scaled_reward = 0;

  bool feasible() const {
    for (auto ok : global_ok)
      if (!ok) return false;
    return goal_ok;
  }
};

inline trajectory simulate(const bnn& net, const planning_problem& p,
                           std::span<const std::vector<std::uint8_t>> actions) {
  if (static_cast<int>(actions.size()) != p.horizon)
    throw structural_error("plan length " + std::to_string(actions.size()) + ", horizon " +
                           std::to_string(p.horizon));
  trajectory tr;
  tr.states.push_back(p.initial);
  tr.actions.assign(actions.begin(), actions.end());
  for (int t = 0; t < p.horizon; ++t) {
    if (static_cast<int>(actions[t].size()) != p.num_action_bits())
      throw structural_error("action vector arity mismatch at step " + std::to_string(t + 1));
    const auto& s = tr.states.back();
    bool ok = true;
    for (const auto& row : p.constraints)
      if (row.kind == row_kind::global && !eval_constraint(row, s, actions[t])) ok = false;
    tr.global_ok.push_back(ok ? 1 : 0);
    tr.states.push_back(forward(net, s, actions[t]));

    const auto& s_next = tr.states.back();
    for (int i = 0; i < p.num_state_bits(); ++i)
      if (s_next[i]) tr.scaled_reward += p.reward.scaled_state_coeff(i);
    for (int i = 0; i < p.num_action_bits(); ++i)
      if (actions[t][i]) tr.scaled_reward += p.reward.scaled_action_coeff(i);
  }
  tr.goal_ok = true;
  for (const auto& row : p.constraints)
    if (row.kind == row_kind::goal && !eval_constraint(row, tr.states.back(), {})) tr.goal_ok = false;
  return tr;
}

// Exhaustive optimal planner: depth-first over per-step action patterns in
// lexicographic order (bit 0 most significant), pruning on violated global
// rows. Ties keep the first (lexicographically smallest) sequence. Guarded:
// patterns^H must stay within 2^22.
inline std::optional<trajectory> brute_force_optimal(const bnn& net, const planning_problem& p) {
  const int m = p.num_action_bits();
  if (m > 20) throw capacity_error("too many action bits for exhaustive search");

  // patterns that pass the action-only global rows, in lexicographic order
  std::vector<std::vector<std::uint8_t>> patterns;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<std::uint8_t> a(m);
    for (int i = 0; i < m; ++i) a[i] = (mask >> (m - 1 - i)) & 1;
    bool ok = true;
    for (const auto& row : p.constraints)
      if (row.kind == row_kind::global && row.state.empty() && !eval_constraint(row, {}, a))
        ok = false;
    if (ok) patterns.push_back(std::move(a));
  }

  double log_nodes = p.horizon * std::log2(std::max<std::size_t>(patterns.size(), 1));
  if (patterns.empty() || log_nodes > 22.0)
    throw capacity_error("exhaustive planning would visit ~" + std::to_string(patterns.size()) +
                         "^" + std::to_string(p.horizon) + " sequences; shrink the instance");

  std::optional<trajectory> best;
  std::vector<std::vector<std::uint8_t>> plan;
  std::vector<std::vector<std::uint8_t>> states{p.initial};

  auto rec = [&](auto&& self, int t) -> void {
    if (t == p.horizon) {
      trajectory tr = simulate(net, p, plan);
      if (!tr.feasible()) throw structural_error("pruned search produced an infeasible candidate");
      if (!best || tr.scaled_reward > best->scaled_reward) best = std::move(tr);
      return;
    }
    for (const auto& a : patterns) {
      bool ok = true;
      for (const auto& row : p.constraints)
        if (row.kind == row_kind::global && !eval_constraint(row, states.back(), a)) ok = false;
      if (!ok) continue;
      plan.push_back(a);
      states.push_back(forward(net, states.back(), a));
      bool goal_reachable = true;
      if (t + 1 == p.horizon) {
        for (const auto& row : p.constraints)
          if (row.kind == row_kind::goal && !eval_constraint(row, states.back(), {}))
            goal_reachable = false;
      }
      if (goal_reachable) self(self, t + 1);
      states.pop_back();
      plan.pop_back();
    }
  };
  rec(rec, 0);
  return best;
}

}  // namespace bnnplan
