#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bnnplan/errors.hpp"
#include "bnnplan/rational.hpp"

namespace bnnplan {

// A group of m1 consecutive state bits holding a fixed-point integer:
// value = (-2^(m1-1) * b[m1-1] + sum_{i<m1-1} 2^i * b[i]) * 10^m2,
// little endian, the last bit of the group is the sign bit.
struct binarization {
  int first_bit = 0;
  int m1 = 1;
  int m2 = 0;
};

struct bit_descriptor {
  std::string name;
};

enum class row_kind { global, goal };
enum class relation { le, ge, eq };

struct linear_term {
  int bit = 0;
  std::int64_t coeff = 0;
};

// One row in <= form. Goal rows range over state bits only.
struct linear_constraint {
  row_kind kind = row_kind::global;
  std::vector<linear_term> state;
  std::vector<linear_term> action;
  std::int64_t bound = 0;
};

namespace detail {

inline std::vector<linear_term> drop_zero_terms(std::vector<linear_term> terms) {
  std::vector<linear_term> out;
  out.reserve(terms.size());
  for (const auto& t : terms)
    if (t.coeff != 0) out.push_back(t);
  return out;
}

inline std::vector<linear_term> negate_terms(std::vector<linear_term> terms) {
  for (auto& t : terms) t.coeff = -t.coeff;
  return terms;
}

}  // namespace detail

// Lowers a relation to one or two <= rows: `>=` negates, `=` becomes both.
inline std::vector<linear_constraint> make_rows(row_kind kind, relation rel,
                                                std::vector<linear_term> state,
                                                std::vector<linear_term> action,
                                                std::int64_t bound) {
  state = detail::drop_zero_terms(std::move(state));
  action = detail::drop_zero_terms(std::move(action));
  std::vector<linear_constraint> rows;
  if (rel == relation::le || rel == relation::eq)
    rows.push_back({kind, state, action, bound});
  if (rel == relation::ge || rel == relation::eq)
    rows.push_back({kind, detail::negate_terms(state), detail::negate_terms(action), -bound});
  return rows;
}

// Linear reward coefficients, one per state/action bit, kept exact as
// rationals. scale_pow10 is the smallest power of ten (capped at 6) that
// turns every coefficient into an integer; MaxSAT weights use the scaled
// values.
class reward_spec {
 public:
  reward_spec() = default;

  static reward_spec from_coefficients(std::vector<rational> state, std::vector<rational> action) {
    reward_spec r;
    r.state_ = std::move(state);
    r.action_ = std::move(action);
    int scale = 0;
    for (const auto& c : r.state_) scale = std::max(scale, c.decimal_scale());
    for (const auto& c : r.action_) scale = std::max(scale, c.decimal_scale());
    if (scale > kMaxScale)
      throw parameter_error("reward needs 10^" + std::to_string(scale) +
                            " scaling; cap is 10^" + std::to_string(kMaxScale));
    r.scale_pow10_ = scale;
    return r;
  }

  int scale_pow10() const { return scale_pow10_; }
  const std::vector<rational>& state_coeffs() const { return state_; }
  const std::vector<rational>& action_coeffs() const { return action_; }

  std::int64_t scaled_state_coeff(std::size_t i) const { return scaled(state_[i]); }
  std::int64_t scaled_action_coeff(std::size_t i) const { return scaled(action_[i]); }

  static constexpr int kMaxScale = 6;

 private:
  std::int64_t scaled(const rational& c) const {
    bigint p10 = 1;
    for (int i = 0; i < scale_pow10_; ++i) p10 *= 10;
    bigint v = c.num() * p10;
    if (v % c.den() != 0) throw parameter_error("reward coefficient not integral after scaling");
    return to_int64(v / c.den());
  }

  std::vector<rational> state_;
  std::vector<rational> action_;
  int scale_pow10_ = 0;
};

// The planning instance proper: bit-level state/action spaces, fixed-point
// groups, <=-form global and goal rows, reward, initial values, horizon.
// Immutable by convention after construction.
struct planning_problem {
  std::vector<bit_descriptor> state_bits;
  std::vector<bit_descriptor> action_bits;
  std::vector<binarization> binarizations;
  std::vector<linear_constraint> constraints;
  reward_spec reward;
  std::vector<std::uint8_t> initial;
  int horizon = 1;

  int num_state_bits() const { return static_cast<int>(state_bits.size()); }
  int num_action_bits() const { return static_cast<int>(action_bits.size()); }
};

// Signed fixed-point decode of a full bit group; m1 is the group size.
inline std::int64_t decode_binarized_mantissa(std::span<const std::uint8_t> bits) {
  if (bits.empty()) throw structural_error("decode of empty bit group");
  std::int64_t v = 0;
  for (std::size_t i = 0; i + 1 < bits.size(); ++i)
    if (bits[i]) v += std::int64_t{1} << i;
  if (bits.back()) v -= std::int64_t{1} << (bits.size() - 1);
  return v;
}

inline rational decode_binarized(std::span<const std::uint8_t> bits, const binarization& bin) {
  if (static_cast<int>(bits.size()) != bin.m1)
    throw structural_error("bit group length " + std::to_string(bits.size()) +
                           " does not match m1=" + std::to_string(bin.m1));
  std::int64_t mantissa = decode_binarized_mantissa(bits);
  bigint p10 = 1;
  for (int i = 0; i < (bin.m2 < 0 ? -bin.m2 : bin.m2); ++i) p10 *= 10;
  return bin.m2 >= 0 ? rational(bigint(mantissa) * p10, 1) : rational(bigint(mantissa), p10);
}

// Inverse of decode_binarized_mantissa; value must be representable in m1 bits.
inline std::vector<std::uint8_t> encode_binarized_mantissa(std::int64_t value, int m1) {
  if (m1 < 1) throw parameter_error("m1 must be positive");
  std::int64_t lo = -(std::int64_t{1} << (m1 - 1));
  std::int64_t hi = (std::int64_t{1} << (m1 - 1)) - 1;
  if (value < lo || value > hi)
    throw parameter_error("value " + std::to_string(value) + " not representable in " +
                          std::to_string(m1) + " bits");
  std::vector<std::uint8_t> bits(m1, 0);
  std::uint64_t u = static_cast<std::uint64_t>(value - lo);  // offset form
  for (int i = 0; i + 1 < m1; ++i) bits[i] = (u >> i) & 1;
  bits[m1 - 1] = value < 0 ? 1 : 0;
  return bits;
}

inline bool eval_constraint(const linear_constraint& row, std::span<const std::uint8_t> state,
                            std::span<const std::uint8_t> action) {
  std::int64_t sum = 0;
  for (const auto& t : row.state) sum += t.coeff * (state[t.bit] ? 1 : 0);
  for (const auto& t : row.action) sum += t.coeff * (action[t.bit] ? 1 : 0);
  return sum <= row.bound;
}

// Pure structural check; returns one message per violated invariant.
inline std::vector<std::string> validate_problem(const planning_problem& p) {
  std::vector<std::string> diags;
  const int n = p.num_state_bits();
  const int m = p.num_action_bits();

  if (static_cast<int>(p.initial.size()) != n)
    diags.push_back("initial length: expected " + std::to_string(n) + ", got " +
                    std::to_string(p.initial.size()));
  for (std::size_t i = 0; i < p.initial.size(); ++i)
    if (p.initial[i] > 1) diags.push_back("initial[" + std::to_string(i) + "] not Boolean");

  if (p.horizon < 1) diags.push_back("horizon must be >= 1, got " + std::to_string(p.horizon));

  std::vector<int> owner(n, -1);
  for (std::size_t g = 0; g < p.binarizations.size(); ++g) {
    const auto& b = p.binarizations[g];
    if (b.m1 < 1) {
      diags.push_back("binarization " + std::to_string(g) + ": m1 must be >= 1");
      continue;
    }
    if (b.first_bit < 0 || b.first_bit + b.m1 > n) {
      diags.push_back("binarization " + std::to_string(g) + ": bits out of range");
      continue;
    }
    for (int i = b.first_bit; i < b.first_bit + b.m1; ++i) {
      if (owner[i] != -1)
        diags.push_back("binarization " + std::to_string(g) + ": overlaps group " +
                        std::to_string(owner[i]) + " at bit " + std::to_string(i));
      owner[i] = static_cast<int>(g);
    }
  }

  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    const auto& row = p.constraints[j];
    for (const auto& t : row.state)
      if (t.bit < 0 || t.bit >= n)
        diags.push_back("row " + std::to_string(j) + ": state index " + std::to_string(t.bit) +
                        " out of range");
    for (const auto& t : row.action)
      if (t.bit < 0 || t.bit >= m)
        diags.push_back("row " + std::to_string(j) + ": action index " + std::to_string(t.bit) +
                        " out of range");
    if (row.kind == row_kind::goal && !row.action.empty())
      diags.push_back("goal over actions: row " + std::to_string(j) +
                      " has action coefficients");
  }

  if (static_cast<int>(p.reward.state_coeffs().size()) != n)
    diags.push_back("reward state length: expected " + std::to_string(n) + ", got " +
                    std::to_string(p.reward.state_coeffs().size()));
  if (static_cast<int>(p.reward.action_coeffs().size()) != m)
    diags.push_back("reward action length: expected " + std::to_string(m) + ", got " +
                    std::to_string(p.reward.action_coeffs().size()));

  return diags;
}

}  // namespace bnnplan
