#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bnnplan/bnn.hpp"
#include "bnnplan/errors.hpp"
#include "bnnplan/problem.hpp"

namespace bnnplan {

enum class family { navigation, inventory, sysadmin, cellda };
enum class enemy_policy { x_axis, y_axis };
enum class weight_mode { random_weights, handcrafted };

inline std::string family_name(family f) {
  switch (f) {
    case family::navigation: return "navigation";
    case family::inventory: return "inventory";
    case family::sysadmin: return "sysadmin";
    case family::cellda: return "cellda";
  }
  throw parameter_error("unknown family");
}

inline family family_from_name(std::string_view s) {
  if (s == "navigation") return family::navigation;
  if (s == "inventory") return family::inventory;
  if (s == "sysadmin") return family::sysadmin;
  if (s == "cellda") return family::cellda;
  throw parameter_error("unknown family: '" + std::string(s) + "'");
}

inline std::string policy_name(enemy_policy p) {
  return p == enemy_policy::x_axis ? "x-axis" : "y-axis";
}

inline enemy_policy policy_from_name(std::string_view s) {
  if (s == "x-axis") return enemy_policy::x_axis;
  if (s == "y-axis") return enemy_policy::y_axis;
  throw parameter_error("unknown enemy policy: '" + std::string(s) + "'");
}

inline std::string weight_mode_name(weight_mode m) {
  return m == weight_mode::random_weights ? "random" : "handcrafted";
}

inline weight_mode weight_mode_from_name(std::string_view s) {
  if (s == "random") return weight_mode::random_weights;
  if (s == "handcrafted") return weight_mode::handcrafted;
  throw parameter_error("unknown weight mode: '" + std::string(s) + "'");
}

struct domain_spec {
  family fam = family::navigation;
  int n = 3;
  int horizon = 4;
  enemy_policy policy = enemy_policy::x_axis;  // cellda only
  std::uint64_t seed = 0;
  weight_mode weights = weight_mode::random_weights;
  std::optional<std::vector<int>> architecture_override;
};

struct generated_instance {
  planning_problem problem;
  bnn net;
  domain_spec spec;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string instance_name(const domain_spec& spec) {
  std::string name = family_name(spec.fam) + "_N" + std::to_string(spec.n) + "_H" +
                     std::to_string(spec.horizon);
  if (spec.fam == family::cellda) name += "_" + policy_name(spec.policy);
  return name;
}

// Published layer widths per family and size.
inline std::vector<int> table_architecture(const domain_spec& spec) {
  if (spec.architecture_override) return *spec.architecture_override;
  switch (spec.fam) {
    case family::navigation:
      if (spec.n == 3) return {13, 36, 36, 9};
      if (spec.n == 4) return {20, 96, 96, 16};
      if (spec.n == 5) return {29, 128, 128, 25};
      break;
    case family::inventory:
      if (spec.n == 2) return {7, 96, 96, 5};
      if (spec.n == 4) return {8, 128, 128, 5};
      break;
    case family::sysadmin:
      if (spec.n == 4) return {16, 128, 128, 12};
      if (spec.n == 5) return {20, 128, 128, 128, 15};
      break;
    case family::cellda:
      if (spec.n == 4) return {12, 256, 256, 4};
      break;
  }
  throw parameter_error("no published architecture for " + family_name(spec.fam) + " N=" +
                        std::to_string(spec.n) + "; pass an explicit one");
}

inline bool in_submitted_grid(const domain_spec& spec) {
  switch (spec.fam) {
    case family::navigation:
      return spec.n >= 3 && spec.n <= 5 && spec.horizon >= 4 && spec.horizon <= 10;
    case family::inventory:
      return (spec.n == 2 || spec.n == 4) && spec.horizon >= 5 && spec.horizon <= 8;
    case family::sysadmin:
      return (spec.n == 4 || spec.n == 5) && spec.horizon >= 2 && spec.horizon <= 4;
    case family::cellda:
      return spec.n == 4 && spec.horizon >= 8 && spec.horizon <= 12;
  }
  return false;
}

// The submitted benchmark set: 21 navigation, 8 inventory, 6 sysadmin and
// 10 cellda instances. Seeds are derived from the instance names.
inline std::vector<domain_spec> parameter_grid(family f) {
  std::vector<domain_spec> out;
  auto add = [&](domain_spec s) {
    s.seed = fnv1a64(instance_name(s));
    out.push_back(std::move(s));
  };
  switch (f) {
    case family::navigation:
      for (int n : {3, 4, 5})
        for (int h = 4; h <= 10; ++h) add({family::navigation, n, h});
      break;
    case family::inventory:
      for (int n : {2, 4})
        for (int h = 5; h <= 8; ++h) add({family::inventory, n, h});
      break;
    case family::sysadmin:
      for (int n : {4, 5})
        for (int h = 2; h <= 4; ++h) add({family::sysadmin, n, h});
      break;
    case family::cellda:
      for (int h = 8; h <= 12; ++h)
        for (auto pol : {enemy_policy::x_axis, enemy_policy::y_axis})
          add({family::cellda, 4, h, pol});
      break;
  }
  return out;
}

namespace detail {

inline int ceil_log2(int n) {
  int b = 0;
  while ((1 << b) < n) ++b;
  return b;
}

// ---- per-family problem construction -------------------------------------

inline void append_rows(planning_problem& p, std::vector<linear_constraint> rows) {
  for (auto& r : rows) p.constraints.push_back(std::move(r));
}

inline planning_problem navigation_problem(int N, int H) {
  planning_problem p;
  const int n = N * N;
  for (int i = 1; i <= n; ++i) p.state_bits.push_back({"pos_" + std::to_string(i)});
  p.action_bits = {{"up"}, {"down"}, {"right"}, {"left"}};
  append_rows(p, make_rows(row_kind::global, relation::le, {},
                           {{0, 1}, {1, 1}, {2, 1}, {3, 1}}, 1));
  const int goal_bit = n - 1;  // opposite corner from the start
  append_rows(p, make_rows(row_kind::goal, relation::ge, {{goal_bit, 1}}, {}, 1));
  std::vector<linear_term> others;
  for (int i = 0; i < n; ++i)
    if (i != goal_bit) others.push_back({i, 1});
  append_rows(p, make_rows(row_kind::goal, relation::le, std::move(others), {}, 0));
  p.reward = reward_spec::from_coefficients(std::vector<rational>(n, rational(0)),
                                            std::vector<rational>(4, rational(-1)));
  p.initial.assign(n, 0);
  p.initial[0] = 1;
  p.horizon = H;
  return p;
}

// Inventory level in 4 fixed-point bits, demand-cycle phase as a plain bit
// counter, one demand-met flag. Unit storage cost on the level.
inline planning_problem inventory_problem(int N, int H) {
  planning_problem p;
  const int m1 = 4;
  const int pb = ceil_log2(N);
  for (int i = 0; i < m1; ++i) p.state_bits.push_back({"level_b" + std::to_string(i)});
  for (int i = 0; i < pb; ++i) p.state_bits.push_back({"phase_b" + std::to_string(i)});
  p.state_bits.push_back({"demand_met"});
  p.action_bits = {{"order"}};
  p.binarizations.push_back({0, m1, 0});
  const int dm = m1 + pb;
  append_rows(p, make_rows(row_kind::global, relation::ge, {{dm, 1}}, {}, 1));
  append_rows(p, make_rows(row_kind::goal, relation::ge, {{dm, 1}}, {}, 1));
  std::vector<rational> rs(p.state_bits.size(), rational(0));
  for (int i = 0; i + 1 < m1; ++i) rs[i] = rational(-(std::int64_t{1} << i));
  rs[m1 - 1] = rational(std::int64_t{1} << (m1 - 1));  // storage cost, sign bit flips
  p.reward = reward_spec::from_coefficients(std::move(rs), {rational(0)});
  p.initial.assign(p.state_bits.size(), 0);
  {
    auto bits = encode_binarized_mantissa(2, m1);  // starting stock
    std::copy(bits.begin(), bits.end(), p.initial.begin());
  }
  p.initial[dm] = 1;
  p.horizon = H;
  return p;
}

inline planning_problem sysadmin_problem(int N, int H) {
  planning_problem p;
  const int m1 = 3;
  const int amax = 1;
  for (int i = 1; i <= N; ++i)
    for (int b = 0; b < m1; ++b)
      p.state_bits.push_back({"age" + std::to_string(i) + "_b" + std::to_string(b)});
  for (int i = 1; i <= N; ++i) p.state_bits.push_back({"run_" + std::to_string(i)});
  for (int i = 1; i <= N; ++i) p.action_bits.push_back({"reboot_" + std::to_string(i)});
  for (int i = 0; i < N; ++i) p.binarizations.push_back({m1 * i, m1, 0});
  std::vector<linear_term> reboots;
  for (int i = 0; i < N; ++i) reboots.push_back({i, 1});
  append_rows(p, make_rows(row_kind::global, relation::le, {}, std::move(reboots), amax));
  for (int i = 0; i < N; ++i)
    append_rows(p, make_rows(row_kind::global, relation::ge, {{m1 * N + i, 1}}, {}, 1));
  for (int i = 0; i < N; ++i)
    append_rows(p, make_rows(row_kind::goal, relation::ge, {{m1 * N + i, 1}}, {}, 1));
  p.reward = reward_spec::from_coefficients(std::vector<rational>(p.state_bits.size(), rational(0)),
                                            std::vector<rational>(N, rational(-1)));
  p.initial.assign(p.state_bits.size(), 0);
  for (int i = 0; i < N; ++i) p.initial[m1 * N + i] = 1;
  p.horizon = H;
  return p;
}

// Coordinates are stored as 2-bit fixed point; maze coordinate = value + 2.
// Constants below (door, enemy start, key cell) are the generator's fixed
// layout; see the reference-dynamics notes in the README.
inline constexpr int kCelldaM1 = 2;
inline constexpr int kCelldaCoordOffset = 1 << (kCelldaM1 - 1);

inline planning_problem cellda_problem(int N, int H) {
  planning_problem p;
  const char* axes[] = {"agent_x", "agent_y", "enemy_x", "enemy_y"};
  for (const char* a : axes)
    for (int b = 0; b < kCelldaM1; ++b)
      p.state_bits.push_back({std::string(a) + "_b" + std::to_string(b)});
  p.state_bits.push_back({"key"});
  p.state_bits.push_back({"alive"});
  p.action_bits = {{"up"}, {"down"}, {"right"}, {"left"}};
  for (int g = 0; g < 4; ++g) p.binarizations.push_back({kCelldaM1 * g, kCelldaM1, 0});
  const int key_bit = 4 * kCelldaM1;
  const int alive_bit = key_bit + 1;

  append_rows(p, make_rows(row_kind::global, relation::le, {},
                           {{0, 1}, {1, 1}, {2, 1}, {3, 1}}, 1));
  for (int axis = 0; axis < 2; ++axis) {  // agent inside the maze
    std::vector<linear_term> mant = {{kCelldaM1 * axis, 1}, {kCelldaM1 * axis + 1, -2}};
    append_rows(p, make_rows(row_kind::global, relation::ge, mant, {}, -kCelldaCoordOffset));
    append_rows(p, make_rows(row_kind::global, relation::le, mant, {}, N - 1 - kCelldaCoordOffset));
  }
  append_rows(p, make_rows(row_kind::global, relation::ge, {{alive_bit, 1}}, {}, 1));

  const int door_x = N - 1, door_y = N - 1;
  for (int axis = 0; axis < 2; ++axis) {
    std::vector<linear_term> mant = {{kCelldaM1 * axis, 1}, {kCelldaM1 * axis + 1, -2}};
    int target = (axis == 0 ? door_x : door_y) - kCelldaCoordOffset;
    append_rows(p, make_rows(row_kind::goal, relation::eq, mant, {}, target));
  }
  append_rows(p, make_rows(row_kind::goal, relation::ge, {{key_bit, 1}}, {}, 1));
  append_rows(p, make_rows(row_kind::goal, relation::ge, {{alive_bit, 1}}, {}, 1));

  p.reward = reward_spec::from_coefficients(std::vector<rational>(p.state_bits.size(), rational(0)),
                                            std::vector<rational>(4, rational(-1)));
  p.initial.assign(p.state_bits.size(), 0);
  auto put_coord = [&](int group, int coord) {
    auto bits = encode_binarized_mantissa(coord - kCelldaCoordOffset, kCelldaM1);
    std::copy(bits.begin(), bits.end(), p.initial.begin() + kCelldaM1 * group);
  };
  put_coord(0, 0);      // agent at (0,0)
  put_coord(1, 0);
  put_coord(2, N - 1);  // enemy at (N-1,0)
  put_coord(3, 0);
  // The published widths leave no output neurons for the key bit, so the
  // synthetic instances hold it (frozen) at true to keep goals reachable.
  p.initial[key_bit] = 1;
  p.initial[alive_bit] = 1;
  p.horizon = H;
  return p;
}

// ---- reference dynamics ---------------------------------------------------

inline int onehot_index(std::span<const std::uint8_t> bits) {
  int idx = -1;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!bits[i]) continue;
    if (idx >= 0) return -2;
    idx = static_cast<int>(i);
  }
  return idx;  // -1 when all zero
}

inline int nav_move(int N, int cell, int dir) {
  int row = cell / N, col = cell % N;  // row 0 is the bottom
  switch (dir) {
    case 0: return row + 1 < N ? cell + N : cell;  // up
    case 1: return row > 0 ? cell - N : cell;      // down
    case 2: return col + 1 < N ? cell + 1 : cell;  // right
    case 3: return col > 0 ? cell - 1 : cell;      // left
  }
  return cell;
}

inline std::vector<std::uint8_t> navigation_truth(int N, std::span<const std::uint8_t> state,
                                                  std::span<const std::uint8_t> action) {
  const int n = N * N;
  if (static_cast<int>(state.size()) != n || action.size() != 4)
    throw structural_error("navigation arity mismatch");
  int cell = onehot_index(state);
  int dir = onehot_index(action);
  if (cell < 0 || dir == -2)
    throw structural_error("navigation out of domain: needs one-hot position and at most one move");
  int next = dir == -1 ? cell : nav_move(N, cell, dir);
  std::vector<std::uint8_t> out(n, 0);
  out[next] = 1;
  return out;
}

inline std::vector<std::uint8_t> inventory_truth(int N, std::span<const std::uint8_t> state,
                                                 std::span<const std::uint8_t> action) {
  const int m1 = 4;
  const int pb = ceil_log2(N);
  if (static_cast<int>(state.size()) != m1 + pb + 1 || action.size() != 1)
    throw structural_error("inventory arity mismatch");
  std::int64_t level = decode_binarized_mantissa(state.subspan(0, m1));
  int phase = 0;
  for (int i = 0; i < pb; ++i) phase |= (state[m1 + i] ? 1 : 0) << i;
  if (level < 0 || phase >= N) throw structural_error("inventory out of domain");
  const std::int64_t order = action[0] ? 1 : 0;        // fixed order quantity
  const std::int64_t demand = phase == N - 1 ? 1 : 0;  // unit demand in the peak phase
  std::int64_t raw = level + order - demand;           // arrivals before demand
  std::vector<std::uint8_t> out(state.begin(), state.end());
  auto bits = encode_binarized_mantissa(std::clamp<std::int64_t>(raw, 0, 7), m1);
  std::copy(bits.begin(), bits.end(), out.begin());
  int next_phase = (phase + 1) % N;
  for (int i = 0; i < pb; ++i) out[m1 + i] = (next_phase >> i) & 1;
  out[m1 + pb] = raw >= 0 ? 1 : 0;
  return out;
}

inline std::vector<std::uint8_t> sysadmin_truth(int N, std::span<const std::uint8_t> state,
                                                std::span<const std::uint8_t> action) {
  const int m1 = 3;
  const std::int64_t age_cap = (std::int64_t{1} << (m1 - 1)) - 1;
  const std::int64_t fail_age = 2;  // runs this long without a reboot
  if (static_cast<int>(state.size()) != 4 * N || static_cast<int>(action.size()) != N)
    throw structural_error("sysadmin arity mismatch");
  std::vector<std::uint8_t> out(state.begin(), state.end());
  for (int i = 0; i < N; ++i) {
    std::int64_t age = decode_binarized_mantissa(state.subspan(m1 * i, m1));
    if (age < 0) throw structural_error("sysadmin out of domain: negative age");
    bool running = state[m1 * N + i];
    std::int64_t next_age;
    bool next_running;
    if (action[i]) {
      next_age = 0;
      next_running = true;
    } else {
      next_age = std::min(age + 1, age_cap);
      next_running = running && age + 1 <= fail_age;
    }
    auto bits = encode_binarized_mantissa(next_age, m1);
    std::copy(bits.begin(), bits.end(), out.begin() + m1 * i);
    out[m1 * N + i] = next_running ? 1 : 0;
  }
  return out;
}

inline std::vector<std::uint8_t> cellda_truth(int N, enemy_policy policy,
                                              std::span<const std::uint8_t> state,
                                              std::span<const std::uint8_t> action) {
  if (static_cast<int>(state.size()) != 4 * kCelldaM1 + 2 || action.size() != 4)
    throw structural_error("cellda arity mismatch");
  auto coord = [&](int group) {
    return static_cast<int>(
               decode_binarized_mantissa(state.subspan(kCelldaM1 * group, kCelldaM1))) +
           kCelldaCoordOffset;
  };
  int ax = coord(0), ay = coord(1), ex = coord(2), ey = coord(3);
  int dir = onehot_index(action);
  if (dir == -2) throw structural_error("cellda out of domain: several moves at once");
  bool key = state[4 * kCelldaM1];
  bool alive = state[4 * kCelldaM1 + 1];

  int nax = ax, nay = ay;
  if (dir == 0) nay = std::min(ay + 1, N - 1);
  if (dir == 1) nay = std::max(ay - 1, 0);
  if (dir == 2) nax = std::min(ax + 1, N - 1);
  if (dir == 3) nax = std::max(ax - 1, 0);

  // chase one cell along the policy axis toward the agent's previous cell
  int nex = ex, ney = ey;
  if (policy == enemy_policy::x_axis)
    nex += ex < ax ? 1 : (ex > ax ? -1 : 0);
  else
    ney += ey < ay ? 1 : (ey > ay ? -1 : 0);

  const int key_x = 0, key_y = N - 1;
  bool next_key = key || (nax == key_x && nay == key_y);
  bool next_alive = alive && !(nax == nex && nay == ney);

  std::vector<std::uint8_t> out(state.begin(), state.end());
  auto put = [&](int group, int c) {
    auto bits = encode_binarized_mantissa(c - kCelldaCoordOffset, kCelldaM1);
    std::copy(bits.begin(), bits.end(), out.begin() + kCelldaM1 * group);
  };
  put(0, nax);
  put(1, nay);
  put(2, nex);
  put(3, ney);
  out[4 * kCelldaM1] = next_key ? 1 : 0;
  out[4 * kCelldaM1 + 1] = next_alive ? 1 : 0;
  return out;
}

// ---- network construction -------------------------------------------------

inline std::vector<input_ref> full_input_map(int n, int m) {
  std::vector<input_ref> map;
  for (int i = 0; i < n; ++i) map.push_back({input_ref_kind::state, i});
  for (int i = 0; i < m; ++i) map.push_back({input_ref_kind::action, i});
  return map;
}

// Seeded +-1 weights laid down row-major per layer, then biases in a band
// around zero so neurons stay responsive. Raw engine draws only; the
// standard-library distributions are not byte-stable across platforms.
inline bnn random_net(std::uint64_t seed, const std::vector<int>& widths,
                      std::vector<input_ref> input_map, std::vector<int> output_map,
                      std::map<int, uncovered_rule> uncovered) {
  if (widths.size() < 2) throw parameter_error("network needs at least one weight layer");
  if (static_cast<int>(input_map.size()) != widths.front())
    throw parameter_error("input width " + std::to_string(widths.front()) +
                          " does not cover the " + std::to_string(input_map.size()) +
                          " mapped bits");
  if (static_cast<int>(output_map.size()) != widths.back())
    throw parameter_error("output width " + std::to_string(widths.back()) +
                          " does not cover the " + std::to_string(output_map.size()) +
                          " mapped bits");
  std::mt19937_64 rng(seed);
  bnn net;
  net.input_map = std::move(input_map);
  net.output_map = std::move(output_map);
  net.uncovered = std::move(uncovered);
  for (std::size_t l = 1; l < widths.size(); ++l) {
    bnn_layer layer;
    layer.width = widths[l];
    layer.weights.assign(widths[l - 1], std::vector<std::int8_t>(widths[l]));
    for (auto& row : layer.weights)
      for (auto& w : row) w = (rng() & 1) ? 1 : -1;
    std::int64_t band = 1;
    while (band * band < widths[l - 1]) ++band;
    for (int j = 0; j < widths[l]; ++j)
      layer.bias.push_back(static_cast<std::int64_t>(rng() % (2 * band + 1)) - band);
    net.layers.push_back(std::move(layer));
  }
  return net;
}

// Builds one layer of a hand-constructed net: each neuron is given a +-1
// weight column and the subset of the valid input patterns it must fire on;
// the bias is pinned from the pattern sums and the separation is checked.
struct crafted_layer {
  int prev_width = 0;
  int width = 0;
  std::vector<std::vector<std::int8_t>> columns;
  std::vector<std::int64_t> bias;

  void add(const std::vector<std::int8_t>& column,
           const std::vector<std::vector<std::uint8_t>>& patterns,
           const std::vector<std::uint8_t>& fire) {
    std::int64_t min_fire = INT64_MAX, max_rest = INT64_MIN;
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      std::int64_t sum = 0;
      for (int i = 0; i < prev_width; ++i) sum += column[i] * (patterns[p][i] ? 1 : -1);
      if (fire[p])
        min_fire = std::min(min_fire, sum);
      else
        max_rest = std::max(max_rest, sum);
    }
    std::int64_t b;
    if (min_fire == INT64_MAX)
      b = -(max_rest + 1);  // never fires on valid inputs
    else if (max_rest == INT64_MIN)
      b = -min_fire;
    else if (max_rest < min_fire)
      b = -min_fire;
    else
      throw structural_error("handcrafted neuron is not linearly separable");
    columns.push_back(column);
    bias.push_back(b);
  }

  void pad_to(int target, const std::vector<std::vector<std::uint8_t>>& patterns) {
    std::vector<std::int8_t> column(prev_width, -1);
    while (static_cast<int>(columns.size()) < target)
      add(column, patterns, std::vector<std::uint8_t>(patterns.size(), 0));
  }

  bnn_layer finish() const {
    bnn_layer layer;
    layer.width = width;
    layer.bias = bias;
    layer.weights.assign(prev_width, std::vector<std::int8_t>(width));
    for (int i = 0; i < prev_width; ++i)
      for (int j = 0; j < width; ++j) layer.weights[i][j] = columns[j][i];
    return layer;
  }

  std::vector<std::vector<std::uint8_t>> outputs(
      const std::vector<std::vector<std::uint8_t>>& patterns) const {
    std::vector<std::vector<std::uint8_t>> out;
    out.reserve(patterns.size());
    for (const auto& pat : patterns) {
      std::vector<std::uint8_t> o(width);
      for (int j = 0; j < width; ++j) {
        std::int64_t sum = bias[j];
        for (int i = 0; i < prev_width; ++i) sum += columns[j][i] * (pat[i] ? 1 : -1);
        o[j] = sum >= 0 ? 1 : 0;
      }
      out.push_back(std::move(o));
    }
    return out;
  }
};

// Threshold-logic grid dynamics in the published navigation shape. First
// hidden layer: position / action / position-with-no-move detectors; second:
// one detector per (cell, effective move) outcome; output: an OR per cell.
// Exact on every (position, move-or-noop) input; spare neurons are constants.
inline bnn handcrafted_navigation_net(int N, const std::vector<int>& widths) {
  const int n = N * N, m = 4;
  if (widths.size() != 4 || widths[0] != n + m || widths[3] != n)
    throw parameter_error("handcrafted navigation needs a W1=N^2+4 .. W4=N^2 shape");

  struct situation {
    int cell;
    int dir;  // -1 = no move
  };
  std::vector<situation> cases;
  std::vector<std::vector<std::uint8_t>> l1;
  for (int cell = 0; cell < n; ++cell) {
    for (int dir = -1; dir < 4; ++dir) {
      cases.push_back({cell, dir});
      std::vector<std::uint8_t> bits(n + m, 0);
      bits[cell] = 1;
      if (dir >= 0) bits[n + dir] = 1;
      l1.push_back(std::move(bits));
    }
  }
  auto fires = [&](auto&& pred) {
    std::vector<std::uint8_t> f(cases.size());
    for (std::size_t i = 0; i < cases.size(); ++i) f[i] = pred(cases[i]) ? 1 : 0;
    return f;
  };
  auto column_for = [](int prev, std::span<const int> positives) {
    std::vector<std::int8_t> c(prev, -1);
    for (int i : positives) c[i] = 1;
    return c;
  };

  crafted_layer l2{n + m, widths[1]};
  for (int i = 0; i < n; ++i)  // position detectors
    l2.add(column_for(n + m, std::array{i}), l1, fires([&](auto s) { return s.cell == i; }));
  for (int k = 0; k < m; ++k)  // move detectors
    l2.add(column_for(n + m, std::array{n + k}), l1, fires([&](auto s) { return s.dir == k; }));
  for (int i = 0; i < n; ++i)  // position-and-no-move detectors
    l2.add(column_for(n + m, std::array{i}), l1, fires([&](auto s) { return s.cell == i && s.dir == -1; }));
  if (l2.width < 2 * n + m) throw parameter_error("hidden layer too narrow for the grid size");
  l2.pad_to(l2.width, l1);
  auto l2_out = l2.outputs(l1);

  const int pos_at = 0, act_at = n, stillpos_at = n + m;
  crafted_layer l3{widths[1], widths[2]};
  std::vector<std::pair<int, int>> movers;  // (cell, dir) with an actual displacement
  for (int p = 0; p < n; ++p) {  // "stays at p": no move or a wall-blocked move
    std::vector<int> pos = {pos_at + p, stillpos_at + p};
    for (int k = 0; k < m; ++k)
      if (nav_move(N, p, k) == p) pos.push_back(act_at + k);
    l3.add(column_for(widths[1], pos), l2_out, fires([&](auto s) {
             return s.cell == p && (s.dir == -1 || nav_move(N, p, s.dir) == p);
           }));
  }
  for (int p = 0; p < n; ++p)
    for (int k = 0; k < m; ++k) {
      if (nav_move(N, p, k) == p) continue;
      movers.emplace_back(p, k);
      l3.add(column_for(widths[1], std::array{pos_at + p, act_at + k}), l2_out,
             fires([&](auto s) { return s.cell == p && s.dir == k; }));
    }
  if (static_cast<int>(l3.columns.size()) > l3.width)
    throw parameter_error("hidden layer too narrow for the movement detectors");
  l3.pad_to(l3.width, l2_out);
  auto l3_out = l3.outputs(l2_out);

  crafted_layer l4{widths[2], widths[3]};
  for (int j = 0; j < n; ++j) {
    std::vector<int> pos = {j};  // the stay detector for j
    for (std::size_t d = 0; d < movers.size(); ++d)
      if (nav_move(N, movers[d].first, movers[d].second) == j)
        pos.push_back(n + static_cast<int>(d));
    l4.add(column_for(widths[2], pos), l3_out, fires([&](auto s) {
             int next = s.dir == -1 ? s.cell : nav_move(N, s.cell, s.dir);
             return next == j;
           }));
  }

  bnn net;
  net.input_map = full_input_map(n, m);
  for (int i = 0; i < n; ++i) net.output_map.push_back(i);
  net.layers = {l2.finish(), l3.finish(), l4.finish()};
  return net;
}

}  // namespace detail

// Reference next-state map for a family; total on the documented domain,
// structural_error outside it. This is the oracle side only: random synthetic
// networks do not follow it.
inline std::vector<std::uint8_t> ground_truth_step(const domain_spec& spec,
                                                   std::span<const std::uint8_t> state,
                                                   std::span<const std::uint8_t> action) {
  switch (spec.fam) {
    case family::navigation: return detail::navigation_truth(spec.n, state, action);
    case family::inventory: return detail::inventory_truth(spec.n, state, action);
    case family::sysadmin: return detail::sysadmin_truth(spec.n, state, action);
    case family::cellda: return detail::cellda_truth(spec.n, spec.policy, state, action);
  }
  throw parameter_error("unknown family");
}

// Produces the symbolic problem plus a network in the published architecture:
// seeded random weights by default, or the exact grid dynamics for
// navigation. Deterministic per spec (seed included).
inline generated_instance generate(const domain_spec& spec) {
  if (spec.n < 1) throw parameter_error("size must be positive");
  if (spec.horizon < 1) throw parameter_error("horizon must be positive");
  const std::vector<int> widths = table_architecture(spec);

  planning_problem problem;
  std::vector<input_ref> input_map;
  std::vector<int> output_map;
  std::map<int, uncovered_rule> uncovered;

  switch (spec.fam) {
    case family::navigation: {
      problem = detail::navigation_problem(spec.n, spec.horizon);
      input_map = detail::full_input_map(problem.num_state_bits(), 4);
      for (int i = 0; i < problem.num_state_bits(); ++i) output_map.push_back(i);
      break;
    }
    case family::inventory: {
      problem = detail::inventory_problem(spec.n, spec.horizon);
      const int pb = detail::ceil_log2(spec.n);
      input_map = detail::full_input_map(problem.num_state_bits(), 1);
      for (int i = 0; i < 4; ++i) output_map.push_back(i);  // level bits
      output_map.push_back(4 + pb);                         // demand-met flag
      for (int i = 0; i < pb; ++i) uncovered.emplace(4 + i, uncovered_rule::frozen);
      break;
    }
    case family::sysadmin: {
      problem = detail::sysadmin_problem(spec.n, spec.horizon);
      for (int i = 0; i < 3 * spec.n; ++i) input_map.push_back({input_ref_kind::state, i});
      for (int i = 0; i < spec.n; ++i) input_map.push_back({input_ref_kind::action, i});
      for (int i = 0; i < 3 * spec.n; ++i) output_map.push_back(i);  // age bits
      for (int i = 0; i < spec.n; ++i)
        uncovered.emplace(3 * spec.n + i, uncovered_rule::frozen);  // running flags
      break;
    }
    case family::cellda: {
      problem = detail::cellda_problem(spec.n, spec.horizon);
      for (int i = 0; i < 2 * detail::kCelldaM1; ++i)
        input_map.push_back({input_ref_kind::state, i});  // agent coordinates
      for (int i = 0; i < 2 * detail::kCelldaM1; ++i)
        input_map.push_back({input_ref_kind::state, 2 * detail::kCelldaM1 + i});  // enemy
      for (int i = 0; i < 4; ++i) input_map.push_back({input_ref_kind::action, i});
      for (int i = 0; i < 2 * detail::kCelldaM1; ++i) output_map.push_back(i);
      for (int i = 2 * detail::kCelldaM1; i < problem.num_state_bits(); ++i)
        uncovered.emplace(i, uncovered_rule::frozen);  // enemy, key, alive
      break;
    }
  }

  generated_instance out;
  out.problem = std::move(problem);
  out.spec = spec;
  if (spec.weights == weight_mode::handcrafted) {
    if (spec.fam != family::navigation)
      throw parameter_error("handcrafted weights exist for navigation only");
    out.net = detail::handcrafted_navigation_net(spec.n, widths);
    // the construction must reproduce the reference dynamics exactly
    for (int cell = 0; cell < spec.n * spec.n; ++cell) {
      for (int dir = -1; dir < 4; ++dir) {
        std::vector<std::uint8_t> s(spec.n * spec.n, 0), a(4, 0);
        s[cell] = 1;
        if (dir >= 0) a[dir] = 1;
        if (forward(out.net, s, a) != ground_truth_step(spec, s, a))
          throw structural_error("handcrafted navigation net diverges from the grid dynamics");
      }
    }
  } else {
    out.net = detail::random_net(spec.seed, widths, std::move(input_map), std::move(output_map),
                                 std::move(uncovered));
  }
  if (auto diags = validate_problem(out.problem); !diags.empty())
    throw structural_error("generated problem invalid: " + diags.front());
  if (auto diags = validate_bnn(out.net, out.problem); !diags.empty())
    throw structural_error("generated network invalid: " + diags.front());
  return out;
}

}  // namespace bnnplan
