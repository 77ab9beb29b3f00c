#pragma once

#include <charconv>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bnnplan/bnn.hpp"
#include "bnnplan/domains.hpp"
#include "bnnplan/encoder.hpp"
#include "bnnplan/errors.hpp"
#include "bnnplan/problem.hpp"

namespace bnnplan {

inline constexpr int kManifestSchemaVersion = 1;
inline constexpr const char* kGeneratorVersion = "1.0.0";

// A self-contained instance description: the symbolic problem, the network,
// and provenance. Serialized as canonical JSON (sorted keys, decimal strings
// for batch-norm rationals); schema documented in schemas/instance.v1.json.
struct instance {
  planning_problem problem;
  bnn net;
  domain_spec spec;
  std::string generator_version = kGeneratorVersion;
};

// ---- WCNF ------------------------------------------------------------------

enum class wcnf_dialect { wcnf2021, wcnf2022 };

inline wcnf_dialect dialect_from_name(std::string_view s) {
  if (s == "wcnf2021") return wcnf_dialect::wcnf2021;
  if (s == "wcnf2022") return wcnf_dialect::wcnf2022;
  throw parameter_error("unknown wcnf dialect: '" + std::string(s) + "'");
}

namespace detail {

inline void append_int(std::string& buf, std::int64_t v) {
  char tmp[24];
  auto [end, ec] = std::to_chars(tmp, tmp + sizeof tmp, v);
  buf.append(tmp, end);
}

inline void append_uint(std::string& buf, std::uint64_t v) {
  char tmp[24];
  auto [end, ec] = std::to_chars(tmp, tmp + sizeof tmp, v);
  buf.append(tmp, end);
}

inline void flush_if_large(std::string& buf, std::ostream& os) {
  if (buf.size() >= (1u << 20)) {
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    buf.clear();
  }
}

}  // namespace detail

// Streams the formula in the selected dialect. wcnf2021 carries the
// `p wcnf vars clauses top` header and marks hard clauses with the top
// weight; wcnf2022 is headerless with `h` hard lines. Byte-deterministic.
inline void write_wcnf(const wcnf_formula& f, wcnf_dialect dialect, std::ostream& os,
                       const std::vector<std::string>& comments = {}) {
  std::string buf;
  for (const auto& c : comments) {
    buf += "c ";
    buf += c;
    buf += '\n';
  }
  if (dialect == wcnf_dialect::wcnf2021) {
    buf += "p wcnf ";
    detail::append_int(buf, f.num_vars());
    buf += ' ';
    detail::append_uint(buf, f.hard_count() + f.soft_count());
    buf += ' ';
    detail::append_uint(buf, f.top());
    buf += '\n';
  }
  auto emit_clause = [&](clause_view c) {
    for (lit l : c) {
      detail::append_int(buf, l.code);
      buf += ' ';
    }
    buf += "0\n";
  };
  for (std::size_t i = 0; i < f.hard_count(); ++i) {
    if (dialect == wcnf_dialect::wcnf2021)
      detail::append_uint(buf, f.top());
    else
      buf += 'h';
    buf += ' ';
    emit_clause(f.hard(i));
    detail::flush_if_large(buf, os);
  }
  for (std::size_t i = 0; i < f.soft_count(); ++i) {
    detail::append_uint(buf, f.soft_weight(i));
    buf += ' ';
    emit_clause(f.soft(i));
    detail::flush_if_large(buf, os);
  }
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!os) throw io_error("wcnf write failed");
}

struct parsed_wcnf {
  wcnf_dialect dialect = wcnf_dialect::wcnf2021;
  int num_vars = 0;  // declared (2021) or maximum seen (2022)
  std::uint64_t top = 0;
  std::vector<std::vector<lit>> hard;
  std::vector<std::pair<std::uint64_t, std::vector<lit>>> soft;
};

// Strict reader for both dialects, auto-detected from the first significant
// line. Checks terminators, variable ranges and (2021) header arithmetic.
inline parsed_wcnf read_wcnf(std::istream& is) {
  parsed_wcnf out;
  bool have_header = false;
  bool detected = false;
  std::uint64_t declared_clauses = 0;
  std::string line;
  std::size_t lineno = 0;
  int max_var = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == 'c') continue;
    std::istringstream ls(line);
    auto fail = [&](const std::string& why) -> parse_error {
      return parse_error("wcnf line " + std::to_string(lineno) + ": " + why);
    };
    if (!detected) {
      detected = true;
      if (line.rfind("p ", 0) == 0) {
        std::string p, fmt;
        long long nv = -1, nc = -1;
        unsigned long long top = 0;
        ls >> p >> fmt >> nv >> nc >> top;
        if (fmt != "wcnf" || nv < 0 || nc < 0 || ls.fail()) throw fail("bad header");
        out.dialect = wcnf_dialect::wcnf2021;
        out.num_vars = static_cast<int>(nv);
        out.top = top;
        declared_clauses = static_cast<std::uint64_t>(nc);
        have_header = true;
        continue;
      }
      out.dialect = wcnf_dialect::wcnf2022;
    }
    bool hard = false;
    std::uint64_t weight = 0;
    if (out.dialect == wcnf_dialect::wcnf2022) {
      std::string first;
      ls >> first;
      if (first == "h") {
        hard = true;
      } else {
        auto res = std::from_chars(first.data(), first.data() + first.size(), weight);
        if (res.ec != std::errc() || res.ptr != first.data() + first.size() || weight < 1)
          throw fail("bad clause weight '" + first + "'");
      }
    } else {
      if (!have_header) throw fail("clause before header");
      long long w = -1;
      ls >> w;
      if (ls.fail() || w < 1) throw fail("bad clause weight");
      weight = static_cast<std::uint64_t>(w);
      if (weight > out.top) throw fail("weight exceeds top");
      hard = weight == out.top;
    }
    std::vector<lit> clause;
    long long code;
    bool terminated = false;
    while (ls >> code) {
      if (code == 0) {
        terminated = true;
        break;
      }
      if (code > INT32_MAX || code < INT32_MIN) throw fail("literal out of range");
      lit l = lit::from_code(static_cast<int>(code));
      if (out.dialect == wcnf_dialect::wcnf2021 && l.var() > out.num_vars)
        throw fail("literal beyond declared variable count");
      max_var = std::max(max_var, l.var());
      clause.push_back(l);
    }
    if (!terminated) throw fail("missing 0 terminator");
    std::string rest;
    if (ls >> rest) throw fail("trailing tokens after terminator");
    if (hard)
      out.hard.push_back(std::move(clause));
    else
      out.soft.emplace_back(weight, std::move(clause));
  }
  if (out.dialect == wcnf_dialect::wcnf2022) out.num_vars = max_var;
  if (have_header && declared_clauses != out.hard.size() + out.soft.size())
    throw parse_error("wcnf header declares " + std::to_string(declared_clauses) +
                      " clauses, file has " + std::to_string(out.hard.size() + out.soft.size()));
  if (have_header) {
    std::uint64_t soft_sum = 0;
    for (const auto& [w, c] : out.soft) soft_sum += w;
    if (out.top <= soft_sum) throw parse_error("wcnf top is not above the soft weight sum");
  }
  return out;
}

// Comment block embedded in emitted WCNF files: the atlas summary and the
// cost-reconciliation constants.
inline std::vector<std::string> wcnf_comments(const encoding_artifact& art) {
  const auto& a = art.atlas;
  std::vector<std::string> out;
  std::string widths;
  for (std::size_t i = 0; i < a.layer_widths().size(); ++i) {
    if (i) widths += ':';
    widths += std::to_string(a.layer_widths()[i]);
  }
  out.push_back("atlas actions=" + std::to_string(a.num_action()) + " states=" +
                std::to_string(a.num_state()) + " horizon=" + std::to_string(a.horizon()) +
                " layers=" + widths);
  out.push_back("atlas order: x(i,t) t=1..H, then y(i,t) t=1..H+1, then z(j,l,t); aux follow");
  out.push_back("objective_offset " + std::to_string(art.objective_offset));
  out.push_back("scale_pow10 " + std::to_string(art.scale_pow10));
  return out;
}

// ---- solver output ----------------------------------------------------------

enum class solver_status { optimum, sat, unsat, unknown };

inline std::string status_name(solver_status s) {
  switch (s) {
    case solver_status::optimum: return "optimum";
    case solver_status::sat: return "sat";
    case solver_status::unsat: return "unsat";
    case solver_status::unknown: return "unknown";
  }
  return "unknown";
}

struct solver_output {
  solver_status status = solver_status::unknown;
  std::vector<lit> model;
  std::optional<std::int64_t> cost;
};

// Reads MaxSAT-evaluation conventions: one `s` status line, `o` cost lines
// (last wins), `v` model lines in either the signed-literal or the bitstring
// style. Missing `s` means unknown with an empty model.
inline solver_output parse_solver_output(std::string_view text) {
  solver_output out;
  std::vector<std::string> vtokens;
  std::istringstream is{std::string(text)};
  std::string line;
  while (std::getline(is, line)) {
    if (line.size() < 2 || line[1] != ' ') continue;
    std::string_view payload = std::string_view(line).substr(2);
    switch (line[0]) {
      case 's': {
        std::string word;
        std::istringstream(std::string(payload)) >> word;
        if (word == "OPTIMUM")
          out.status = solver_status::optimum;
        else if (word == "SATISFIABLE")
          out.status = solver_status::sat;
        else if (word == "UNSATISFIABLE")
          out.status = solver_status::unsat;
        else
          out.status = solver_status::unknown;
        break;
      }
      case 'o': {
        long long cost;
        std::istringstream cs{std::string(payload)};
        if (cs >> cost) out.cost = cost;
        break;
      }
      case 'v': {
        std::istringstream vs{std::string(payload)};
        std::string tok;
        while (vs >> tok) vtokens.push_back(tok);
        break;
      }
      default: break;
    }
  }
  bool bits = vtokens.size() == 1;
  for (const auto& t : vtokens)
    for (char c : t)
      if (c != '0' && c != '1') bits = false;
  if (bits && !vtokens.empty()) {
    const std::string& s = vtokens.front();
    for (std::size_t i = 0; i < s.size(); ++i)
      out.model.push_back(lit::of(static_cast<int>(i) + 1, s[i] == '1'));
  } else {
    for (const auto& t : vtokens) {
      long long code;
      auto res = std::from_chars(t.data(), t.data() + t.size(), code);
      if (res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw parse_error("bad value token '" + t + "' in solver output");
      if (code == 0) continue;
      out.model.push_back(lit::from_code(static_cast<int>(code)));
    }
  }
  return out;
}

// ---- manifest ----------------------------------------------------------------

namespace detail {

using json = nlohmann::json;

inline const json& need(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) throw parse_error(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw parse_error(path + ": missing key '" + key + "'");
  return *it;
}

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                       const std::string& path) {
  if (!obj.is_object()) throw parse_error(path + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw parse_error(path + ": unknown key '" + it.key() + "'");
  }
}

inline std::int64_t need_int(const json& obj, const char* key, const std::string& path) {
  const json& v = need(obj, key, path);
  if (!v.is_number_integer()) throw parse_error(path + "." + key + ": expected an integer");
  return v.get<std::int64_t>();
}

inline std::string need_str(const json& obj, const char* key, const std::string& path) {
  const json& v = need(obj, key, path);
  if (!v.is_string()) throw parse_error(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

inline const json& need_array(const json& obj, const char* key, const std::string& path) {
  const json& v = need(obj, key, path);
  if (!v.is_array()) throw parse_error(path + "." + key + ": expected an array");
  return v;
}

inline rational need_decimal(const json& obj, const char* key, const std::string& path) {
  try {
    return rational::from_decimal(need_str(obj, key, path));
  } catch (const parse_error& e) {
    throw parse_error(path + "." + key + ": " + e.what());
  }
}

inline json rows_to_json(const planning_problem& p, row_kind kind) {
  json rows = json::array();
  for (const auto& row : p.constraints) {
    if (row.kind != kind) continue;
    json r;
    json state = json::array();
    for (const auto& t : row.state) state.push_back({{"bit", t.bit}, {"coeff", t.coeff}});
    r["state"] = std::move(state);
    if (kind == row_kind::global) {
      json action = json::array();
      for (const auto& t : row.action) action.push_back({{"bit", t.bit}, {"coeff", t.coeff}});
      r["action"] = std::move(action);
    }
    r["bound"] = row.bound;
    rows.push_back(std::move(r));
  }
  return rows;
}

inline std::vector<linear_term> terms_from_json(const json& arr, const std::string& path) {
  std::vector<linear_term> terms;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string at = path + "[" + std::to_string(i) + "]";
    check_keys(arr[i], {"bit", "coeff"}, at);
    terms.push_back({static_cast<int>(need_int(arr[i], "bit", at)),
                     need_int(arr[i], "coeff", at)});
  }
  return terms;
}

}  // namespace detail

inline nlohmann::json manifest_json(const instance& inst) {
  using nlohmann::json;
  const planning_problem& p = inst.problem;
  json j;
  j["schema_version"] = kManifestSchemaVersion;

  json meta;
  meta["family"] = family_name(inst.spec.fam);
  meta["generator_version"] = inst.generator_version;
  meta["n"] = inst.spec.n;
  meta["policy"] = policy_name(inst.spec.policy);
  meta["seed"] = inst.spec.seed;
  meta["weight_mode"] = weight_mode_name(inst.spec.weights);
  j["meta"] = std::move(meta);

  json prob;
  json state_bits = json::array();
  for (const auto& b : p.state_bits) state_bits.push_back({{"name", b.name}});
  prob["state_bits"] = std::move(state_bits);
  json action_bits = json::array();
  for (const auto& b : p.action_bits) action_bits.push_back({{"name", b.name}});
  prob["action_bits"] = std::move(action_bits);
  json bins = json::array();
  for (const auto& b : p.binarizations)
    bins.push_back({{"first_bit", b.first_bit}, {"m1", b.m1}, {"m2", b.m2}});
  prob["binarizations"] = std::move(bins);
  prob["global_rows"] = detail::rows_to_json(p, row_kind::global);
  prob["goal_rows"] = detail::rows_to_json(p, row_kind::goal);
  json reward;
  json rs = json::array(), ra = json::array();
  for (const auto& c : p.reward.state_coeffs()) rs.push_back(c.to_decimal());
  for (const auto& c : p.reward.action_coeffs()) ra.push_back(c.to_decimal());
  reward["state"] = std::move(rs);
  reward["action"] = std::move(ra);
  reward["scale_pow10"] = p.reward.scale_pow10();
  prob["reward"] = std::move(reward);
  json initial = json::array();
  for (auto v : p.initial) initial.push_back(static_cast<int>(v));
  prob["initial"] = std::move(initial);
  prob["horizon"] = p.horizon;
  j["problem"] = std::move(prob);

  json net;
  net["widths"] = inst.net.widths();
  json input_map = json::array();
  for (const auto& r : inst.net.input_map)
    input_map.push_back({{"bit", r.bit},
                         {"kind", r.kind == input_ref_kind::state ? "state" : "action"}});
  net["input_map"] = std::move(input_map);
  net["output_map"] = inst.net.output_map;
  json uncovered = json::array();
  for (const auto& [bit, rule] : inst.net.uncovered)
    uncovered.push_back({{"bit", bit},
                         {"rule", rule == uncovered_rule::frozen ? "frozen" : "forbidden"}});
  net["uncovered_state_bits"] = std::move(uncovered);
  json layers = json::array();
  for (const auto& layer : inst.net.layers) {
    json lj;
    json weights = json::array();
    for (const auto& row : layer.weights) {
      json r = json::array();
      for (auto w : row) r.push_back(static_cast<int>(w));
      weights.push_back(std::move(r));
    }
    lj["weights"] = std::move(weights);
    json neurons = json::array();
    for (int n = 0; n < layer.width; ++n) {
      json nj;
      nj["bias"] = layer.bias[n];
      if (!layer.batch_norm.empty() && layer.batch_norm[n]) {
        const auto& bn = *layer.batch_norm[n];
        nj["batch_norm"] = {{"mu", bn.mu.to_decimal()},
                            {"sigma2", bn.sigma2.to_decimal()},
                            {"eps", bn.eps.to_decimal()},
                            {"gamma", bn.gamma.to_decimal()},
                            {"beta", bn.beta.to_decimal()}};
      }
      neurons.push_back(std::move(nj));
    }
    lj["neurons"] = std::move(neurons);
    layers.push_back(std::move(lj));
  }
  net["layers"] = std::move(layers);
  j["bnn"] = std::move(net);
  return j;
}

inline std::string write_manifest(const instance& inst) { return manifest_json(inst).dump(2) + "\n"; }

// Strict parse: unknown keys, malformed weights and inconsistent widths are
// rejected with the offending path; the reconstructed instance is validated
// like any other.
inline instance read_manifest(const nlohmann::json& j) {
  using detail::check_keys;
  using detail::need;
  using detail::need_array;
  using detail::need_decimal;
  using detail::need_int;
  using detail::need_str;

  instance inst;
  check_keys(j, {"schema_version", "meta", "problem", "bnn"}, "manifest");
  std::int64_t schema = need_int(j, "schema_version", "manifest");
  if (schema != kManifestSchemaVersion)
    throw parse_error("manifest schema_version " + std::to_string(schema) +
                      " is not supported (expected " + std::to_string(kManifestSchemaVersion) + ")");

  const auto& meta = need(j, "meta", "manifest");
  check_keys(meta, {"family", "generator_version", "n", "policy", "seed", "weight_mode"}, "meta");
  inst.spec.fam = family_from_name(need_str(meta, "family", "meta"));
  inst.spec.n = static_cast<int>(need_int(meta, "n", "meta"));
  inst.spec.policy = policy_from_name(need_str(meta, "policy", "meta"));
  inst.spec.weights = weight_mode_from_name(need_str(meta, "weight_mode", "meta"));
  const auto& seed = need(meta, "seed", "meta");
  if (!seed.is_number_unsigned() && !seed.is_number_integer())
    throw parse_error("meta.seed: expected an integer");
  inst.spec.seed = seed.get<std::uint64_t>();
  inst.generator_version = need_str(meta, "generator_version", "meta");

  const auto& prob = need(j, "problem", "manifest");
  check_keys(prob,
             {"state_bits", "action_bits", "binarizations", "global_rows", "goal_rows", "reward",
              "initial", "horizon"},
             "problem");
  planning_problem& p = inst.problem;
  for (const auto& b : need_array(prob, "state_bits", "problem")) {
    check_keys(b, {"name"}, "problem.state_bits[]");
    p.state_bits.push_back({need_str(b, "name", "problem.state_bits[]")});
  }
  for (const auto& b : need_array(prob, "action_bits", "problem")) {
    check_keys(b, {"name"}, "problem.action_bits[]");
    p.action_bits.push_back({need_str(b, "name", "problem.action_bits[]")});
  }
  {
    const auto& arr = need_array(prob, "binarizations", "problem");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = "problem.binarizations[" + std::to_string(i) + "]";
      check_keys(arr[i], {"first_bit", "m1", "m2"}, at);
      p.binarizations.push_back({static_cast<int>(need_int(arr[i], "first_bit", at)),
                                 static_cast<int>(need_int(arr[i], "m1", at)),
                                 static_cast<int>(need_int(arr[i], "m2", at))});
    }
  }
  {
    const auto& arr = need_array(prob, "global_rows", "problem");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = "problem.global_rows[" + std::to_string(i) + "]";
      check_keys(arr[i], {"state", "action", "bound"}, at);
      linear_constraint row;
      row.kind = row_kind::global;
      row.state = detail::terms_from_json(need_array(arr[i], "state", at), at + ".state");
      row.action = detail::terms_from_json(need_array(arr[i], "action", at), at + ".action");
      row.bound = need_int(arr[i], "bound", at);
      p.constraints.push_back(std::move(row));
    }
  }
  {
    const auto& arr = need_array(prob, "goal_rows", "problem");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = "problem.goal_rows[" + std::to_string(i) + "]";
      check_keys(arr[i], {"state", "bound"}, at);
      linear_constraint row;
      row.kind = row_kind::goal;
      row.state = detail::terms_from_json(need_array(arr[i], "state", at), at + ".state");
      row.bound = need_int(arr[i], "bound", at);
      p.constraints.push_back(std::move(row));
    }
  }
  {
    const auto& reward = need(prob, "reward", "problem");
    check_keys(reward, {"state", "action", "scale_pow10"}, "problem.reward");
    std::vector<rational> rs, ra;
    for (const auto& v : need_array(reward, "state", "problem.reward")) {
      if (!v.is_string()) throw parse_error("problem.reward.state[]: expected a decimal string");
      rs.push_back(rational::from_decimal(v.get<std::string>()));
    }
    for (const auto& v : need_array(reward, "action", "problem.reward")) {
      if (!v.is_string()) throw parse_error("problem.reward.action[]: expected a decimal string");
      ra.push_back(rational::from_decimal(v.get<std::string>()));
    }
    p.reward = reward_spec::from_coefficients(std::move(rs), std::move(ra));
    if (p.reward.scale_pow10() != need_int(reward, "scale_pow10", "problem.reward"))
      throw parse_error("problem.reward.scale_pow10 does not match the coefficients");
  }
  for (const auto& v : need_array(prob, "initial", "problem")) {
    if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
      throw parse_error("problem.initial[]: expected 0 or 1");
    p.initial.push_back(static_cast<std::uint8_t>(v.get<int>()));
  }
  p.horizon = static_cast<int>(need_int(prob, "horizon", "problem"));
  inst.spec.horizon = p.horizon;

  const auto& net = need(j, "bnn", "manifest");
  check_keys(net, {"widths", "input_map", "output_map", "uncovered_state_bits", "layers"}, "bnn");
  std::vector<int> widths;
  for (const auto& v : need_array(net, "widths", "bnn")) {
    if (!v.is_number_integer()) throw parse_error("bnn.widths[]: expected an integer");
    widths.push_back(v.get<int>());
  }
  if (widths.size() < 2) throw parse_error("bnn.widths: need at least two layers");
  {
    const auto& arr = need_array(net, "input_map", "bnn");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = "bnn.input_map[" + std::to_string(i) + "]";
      check_keys(arr[i], {"bit", "kind"}, at);
      std::string kind = need_str(arr[i], "kind", at);
      if (kind != "state" && kind != "action") throw parse_error(at + ".kind: expected state|action");
      inst.net.input_map.push_back(
          {kind == "state" ? input_ref_kind::state : input_ref_kind::action,
           static_cast<int>(need_int(arr[i], "bit", at))});
    }
  }
  for (const auto& v : need_array(net, "output_map", "bnn")) {
    if (!v.is_number_integer()) throw parse_error("bnn.output_map[]: expected an integer");
    inst.net.output_map.push_back(v.get<int>());
  }
  {
    const auto& arr = need_array(net, "uncovered_state_bits", "bnn");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string at = "bnn.uncovered_state_bits[" + std::to_string(i) + "]";
      check_keys(arr[i], {"bit", "rule"}, at);
      std::string rule = need_str(arr[i], "rule", at);
      if (rule != "frozen" && rule != "forbidden")
        throw parse_error(at + ".rule: expected frozen|forbidden");
      inst.net.uncovered.emplace(
          static_cast<int>(need_int(arr[i], "bit", at)),
          rule == "frozen" ? uncovered_rule::frozen : uncovered_rule::forbidden);
    }
  }
  {
    const auto& arr = need_array(net, "layers", "bnn");
    if (arr.size() + 1 != widths.size())
      throw parse_error("bnn.layers: found " + std::to_string(arr.size()) + ", widths imply " +
                        std::to_string(widths.size() - 1));
    if (static_cast<int>(inst.net.input_map.size()) != widths.front())
      throw parse_error("bnn.input_map covers " + std::to_string(inst.net.input_map.size()) +
                        " neurons, widths[0] is " + std::to_string(widths.front()));
    for (std::size_t li = 0; li < arr.size(); ++li) {
      const std::string at = "bnn.layers[" + std::to_string(li) + "]";
      check_keys(arr[li], {"weights", "neurons"}, at);
      bnn_layer layer;
      layer.width = widths[li + 1];
      const auto& wj = need_array(arr[li], "weights", at);
      if (static_cast<int>(wj.size()) != widths[li])
        throw parse_error(at + ".weights: " + std::to_string(wj.size()) + " rows, expected " +
                          std::to_string(widths[li]));
      for (std::size_t r = 0; r < wj.size(); ++r) {
        if (!wj[r].is_array() || static_cast<int>(wj[r].size()) != layer.width)
          throw parse_error(at + ".weights[" + std::to_string(r) + "]: expected " +
                            std::to_string(layer.width) + " entries");
        std::vector<std::int8_t> row;
        for (std::size_t cidx = 0; cidx < wj[r].size(); ++cidx) {
          const auto& v = wj[r][cidx];
          if (!v.is_number_integer() || (v.get<int>() != 1 && v.get<int>() != -1))
            throw parse_error(at + ".weights[" + std::to_string(r) + "][" + std::to_string(cidx) +
                              "]: weights must be -1 or +1");
          row.push_back(static_cast<std::int8_t>(v.get<int>()));
        }
        layer.weights.push_back(std::move(row));
      }
      const auto& nj = need_array(arr[li], "neurons", at);
      if (static_cast<int>(nj.size()) != layer.width)
        throw parse_error(at + ".neurons: " + std::to_string(nj.size()) + " entries, expected " +
                          std::to_string(layer.width));
      bool any_bn = false;
      std::vector<std::optional<batch_norm_params>> bns;
      for (std::size_t ni = 0; ni < nj.size(); ++ni) {
        const std::string nat = at + ".neurons[" + std::to_string(ni) + "]";
        check_keys(nj[ni], {"bias", "batch_norm"}, nat);
        std::optional<batch_norm_params> bn;
        if (nj[ni].contains("batch_norm")) {
          const auto& bj = nj[ni]["batch_norm"];
          check_keys(bj, {"mu", "sigma2", "eps", "gamma", "beta"}, nat + ".batch_norm");
          bn = batch_norm_params{need_decimal(bj, "mu", nat + ".batch_norm"),
                                 need_decimal(bj, "sigma2", nat + ".batch_norm"),
                                 need_decimal(bj, "eps", nat + ".batch_norm"),
                                 need_decimal(bj, "gamma", nat + ".batch_norm"),
                                 need_decimal(bj, "beta", nat + ".batch_norm")};
          any_bn = true;
        }
        std::int64_t bias;
        if (nj[ni].contains("bias")) {
          bias = need_int(nj[ni], "bias", nat);
        } else if (bn) {
          bias = compute_bias(*bn);
        } else {
          throw parse_error(nat + ": needs bias or batch_norm");
        }
        layer.bias.push_back(bias);
        bns.push_back(std::move(bn));
      }
      if (any_bn) layer.batch_norm = std::move(bns);
      inst.net.layers.push_back(std::move(layer));
    }
  }

  if (auto diags = validate_problem(inst.problem); !diags.empty())
    throw parse_error("manifest problem invalid: " + diags.front());
  if (auto diags = validate_bnn(inst.net, inst.problem); !diags.empty())
    throw parse_error("manifest network invalid: " + diags.front());
  return inst;
}

inline instance read_manifest(std::istream& is) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("manifest is not valid JSON: ") + e.what());
  }
  return read_manifest(j);
}

// ---- plan files ----------------------------------------------------------------

inline std::string write_plan(const std::vector<std::vector<std::uint8_t>>& steps) {
  nlohmann::json j;
  j["horizon"] = steps.size();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& a : steps) {
    nlohmann::json step = nlohmann::json::array();
    for (auto v : a) step.push_back(static_cast<int>(v));
    arr.push_back(std::move(step));
  }
  j["steps"] = std::move(arr);
  return j.dump(2) + "\n";
}

inline std::vector<std::vector<std::uint8_t>> read_plan(std::istream& is) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("plan is not valid JSON: ") + e.what());
  }
  detail::check_keys(j, {"horizon", "steps"}, "plan");
  const auto& steps = detail::need_array(j, "steps", "plan");
  if (detail::need_int(j, "horizon", "plan") != static_cast<std::int64_t>(steps.size()))
    throw parse_error("plan.horizon does not match the number of steps");
  std::vector<std::vector<std::uint8_t>> out;
  for (const auto& step : steps) {
    if (!step.is_array()) throw parse_error("plan.steps[]: expected an array");
    std::vector<std::uint8_t> a;
    for (const auto& v : step) {
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
        throw parse_error("plan.steps[][]: expected 0 or 1");
      a.push_back(static_cast<std::uint8_t>(v.get<int>()));
    }
    out.push_back(std::move(a));
  }
  return out;
}

// Sidecar emitted next to encoded WCNF files so models can be decoded
// without re-reading the manifest.
inline std::string write_atlas_json(const encoding_artifact& art) {
  nlohmann::json j;
  j["num_action"] = art.atlas.num_action();
  j["num_state"] = art.atlas.num_state();
  j["horizon"] = art.atlas.horizon();
  j["layer_widths"] = art.atlas.layer_widths();
  j["interface_vars"] = art.atlas.total();
  j["num_vars"] = art.formula.num_vars();
  j["objective_offset"] = art.objective_offset;
  j["scale_pow10"] = art.scale_pow10;
  j["order"] = "x(i,t) t=1..H, then y(i,t) t=1..H+1, then z(j,l,t) l=1..L t=1..H; aux follow";
  return j.dump(2) + "\n";
}

}  // namespace bnnplan
