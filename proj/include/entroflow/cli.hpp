#pragma once

// Command-line driver. Every run prints a JSON envelope
//
//   {"tool_version", "command", "config", "seed", "threads", "wall_time_s", "payload"}
//
// where only `payload` carries results; it is identical for a given
// (config, seed) whatever the worker count. Exchange sweeps print CSV.
//
// Exit codes: 0 pass, 1 inequality violation, 2 validation or bad cycle,
// 3 degeneracy check failed, 4 fixed point not reached.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <ostream>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entroflow/error.hpp"
#include "entroflow/exchange.hpp"
#include "entroflow/gas.hpp"
#include "entroflow/parallel.hpp"
#include "entroflow/suites.hpp"

namespace entroflow::cli {

using json = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum Exit : int { kPass = 0, kViolation = 1, kValidation = 2, kDegeneracy = 3, kConvergence = 4 };

inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotDegenerate: return kDegeneracy;
    case ErrorCode::NoConvergence: return kConvergence;
    default: return kValidation;
  }
}

/// %.17g, enough digits for an exact round trip.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Config files

inline json load_config(const std::string& path, const std::string& kind) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidSpec, "cannot read config " + path);
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidSpec, std::string("config is not valid JSON: ") + e.what());
  }
  if (!cfg.is_object()) throw Error(ErrorCode::InvalidSpec, "config must be a JSON object");
  if (!cfg.contains("schema_version") || cfg["schema_version"] != kSchemaVersion)
    throw Error(ErrorCode::InvalidSpec, "config needs \"schema_version\": 1");
  if (!cfg.contains("kind") || cfg["kind"] != kind)
    throw Error(ErrorCode::InvalidSpec, "config \"kind\" must be \"" + kind + "\"");
  return cfg;
}

inline void allow_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || key == k;
    if (!known) throw Error(ErrorCode::InvalidSpec, "unknown key \"" + key + "\" in " + where);
  }
}

inline const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw Error(ErrorCode::InvalidSpec, where + " is missing \"" + key + "\"");
  return obj.at(key);
}

inline double get_number(const json& v, const std::string& what) {
  if (!v.is_number()) throw Error(ErrorCode::InvalidSpec, what + " must be a number");
  return v.get<double>();
}

inline std::vector<double> get_numbers(const json& v, const std::string& what) {
  if (!v.is_array() || v.empty()) throw Error(ErrorCode::InvalidSpec, what + " must be a non-empty array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(get_number(x, what));
  return out;
}

inline std::size_t get_index(const json& v, const std::string& what) {
  if (!v.is_number_unsigned()) throw Error(ErrorCode::InvalidSpec, what + " must be a non-negative integer");
  return v.get<std::size_t>();
}

struct ExchangeConfig {
  EntangledThermalSpec spec;
  std::vector<std::pair<DegeneratePair, double>> rotations;
  std::optional<CaseKind> kind;
};

inline CaseKind parse_case(const std::string& s) {
  if (s == "s" || s == "S") return CaseKind::S;
  if (s == "v" || s == "V") return CaseKind::V;
  throw Error(ErrorCode::InvalidSpec, "case must be s or v");
}

inline std::string case_name(CaseKind k) { return k == CaseKind::S ? "s" : "v"; }

/// {"schema_version": 1, "kind": "exchange", "epsilon": [...], "gamma": γ,
///  "mu_a": μA, "mu_b": μB, "rotations": [[[i,j],[i',j'],phi], ...], "case": "v"}
inline ExchangeConfig parse_exchange_config(const json& cfg) {
  allow_keys(cfg, {"schema_version", "kind", "epsilon", "gamma", "mu_a", "mu_b", "rotations", "case"}, "exchange config");
  ExchangeConfig out;
  out.spec.epsilon = get_numbers(require(cfg, "epsilon", "exchange config"), "epsilon");
  out.spec.gamma = get_number(require(cfg, "gamma", "exchange config"), "gamma");
  out.spec.mu_a = get_number(require(cfg, "mu_a", "exchange config"), "mu_a");
  out.spec.mu_b = get_number(require(cfg, "mu_b", "exchange config"), "mu_b");
  out.spec.validate();
  const json& rots = require(cfg, "rotations", "exchange config");
  if (!rots.is_array()) throw Error(ErrorCode::InvalidSpec, "rotations must be an array");
  for (const auto& r : rots) {
    if (!r.is_array() || r.size() != 3 || !r[0].is_array() || r[0].size() != 2 || !r[1].is_array() || r[1].size() != 2)
      throw Error(ErrorCode::InvalidSpec, "each rotation is [[i,j],[i',j'],phi]");
    const BasisPair p{get_index(r[0][0], "rotation index"), get_index(r[0][1], "rotation index")};
    const BasisPair q{get_index(r[1][0], "rotation index"), get_index(r[1][1], "rotation index")};
    out.rotations.push_back({{p, q}, get_number(r[2], "rotation phi")});
  }
  if (cfg.contains("case")) {
    if (!cfg["case"].is_string()) throw Error(ErrorCode::InvalidSpec, "case must be a string");
    out.kind = parse_case(cfg["case"].get<std::string>());
  }
  return out;
}

struct ClausiusConfig {
  HamiltonianSpec system;
  std::optional<DensityOperator> initial;
  std::vector<ClausiusStroke> strokes;
  std::optional<std::size_t> max_cycles;
  std::optional<double> fp_tol;
};

inline ComplexMatrix parse_matrix(const json& v, std::size_t d, const std::string& what) {
  if (!v.is_array() || v.size() != d) throw Error(ErrorCode::InvalidSpec, what + " must be a " + std::to_string(d) + "x" + std::to_string(d) + " array");
  ComplexMatrix m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < d; ++i) {
    const auto row = get_numbers(v[i], what);
    if (row.size() != d) throw Error(ErrorCode::InvalidSpec, what + " rows must have length " + std::to_string(d));
    for (std::size_t j = 0; j < d; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
  }
  return m;
}

/// {"schema_version": 1, "kind": "clausius", "levels": [...],
///  "initial": "maximally_mixed" | {"gibbs_temperature": T} | {"real": M, "imag": M},
///  "strokes": [{"type": "contact", "temperature": T, "phi": φ} | {"type": "quench", "levels": [...]}],
///  "max_cycles": n, "fp_tol": tol}
inline ClausiusConfig parse_clausius_config(const json& cfg) {
  allow_keys(cfg, {"schema_version", "kind", "levels", "initial", "strokes", "max_cycles", "fp_tol"}, "clausius config");
  ClausiusConfig out;
  out.system.levels = get_numbers(require(cfg, "levels", "clausius config"), "levels");
  out.system.validate();
  const std::size_t d = out.system.dim();
  if (cfg.contains("initial")) {
    const json& init = cfg["initial"];
    if (init.is_string()) {
      if (init != "maximally_mixed") throw Error(ErrorCode::InvalidSpec, "unknown initial state " + init.dump());
    } else if (init.is_object() && init.contains("gibbs_temperature")) {
      allow_keys(init, {"gibbs_temperature"}, "initial");
      const double t = get_number(init["gibbs_temperature"], "gibbs_temperature");
      if (!(t > 0.0)) throw Error(ErrorCode::NonpositiveBeta, "gibbs_temperature must be positive");
      out.initial = gibbs_state(out.system, 1.0 / t);
    } else if (init.is_object()) {
      allow_keys(init, {"real", "imag"}, "initial");
      ComplexMatrix m = parse_matrix(require(init, "real", "initial"), d, "initial.real");
      if (init.contains("imag")) m += Complex(0.0, 1.0) * parse_matrix(init["imag"], d, "initial.imag");
      out.initial = DensityOperator::from_matrix(m);
    } else {
      throw Error(ErrorCode::InvalidSpec, "initial must be a string or an object");
    }
  }
  const json& strokes = require(cfg, "strokes", "clausius config");
  if (!strokes.is_array() || strokes.empty()) throw Error(ErrorCode::InvalidSpec, "strokes must be a non-empty array");
  for (const auto& s : strokes) {
    if (!s.is_object()) throw Error(ErrorCode::InvalidSpec, "each stroke must be an object");
    const json& type = require(s, "type", "stroke");
    if (type == "contact") {
      allow_keys(s, {"type", "temperature", "phi"}, "contact stroke");
      ContactStroke c;
      c.temperature = get_number(require(s, "temperature", "contact stroke"), "temperature");
      if (s.contains("phi")) c.phi = get_number(s["phi"], "phi");
      out.strokes.emplace_back(c);
    } else if (type == "quench") {
      allow_keys(s, {"type", "levels"}, "quench stroke");
      out.strokes.emplace_back(QuenchStroke{HamiltonianSpec{get_numbers(require(s, "levels", "quench stroke"), "levels")}});
    } else {
      throw Error(ErrorCode::InvalidSpec, "stroke type must be contact or quench");
    }
  }
  if (cfg.contains("max_cycles")) out.max_cycles = get_index(cfg["max_cycles"], "max_cycles");
  if (cfg.contains("fp_tol")) out.fp_tol = get_number(cfg["fp_tol"], "fp_tol");
  return out;
}

// ---------------------------------------------------------------------------
// Payload serialization

inline json to_json(const IneqSuiteReport& r) {
  json j;
  j["check"] = to_string(r.check);
  j["dims"] = r.dims;
  j["trials"] = r.trials;
  j["passed"] = r.passed;
  j["failed"] = r.trials - r.passed;
  j["worst_slack"] = r.worst_slack;
  j["worst_trial"] = r.worst_trial;
  if (r.check == IneqCheck::GibbsIdentity) j["worst_identity_gap"] = r.worst_identity_gap;
  j["failing_trials"] = r.failing_trials;
  j["all_pass"] = r.all_pass();
  return j;
}

inline json to_json(const ExchangeReport& r) {
  json j;
  j["case"] = case_name(r.kind);
  j["Q_A"] = r.q_a;
  j["Q_B"] = r.q_b;
  j["dS_A"] = r.ds_a;
  j["dS_B"] = r.ds_b;
  j["I_initial"] = r.mutual_info_initial;
  j["I_final"] = r.mutual_info_final;
  j["S_joint_initial"] = r.joint_entropy_initial;
  j["S_joint_final"] = r.joint_entropy_final;
  j["W"] = r.work_leak;
  j["beta_A"] = r.beta_a;
  j["beta_B"] = r.beta_b;
  j["slack_A"] = r.slack_a;
  j["slack_B"] = r.slack_b;
  j["commutator_norm"] = r.commutator_norm;
  j["energy_conserving"] = r.energy_conserving;
  j["contracts_checked"] = r.contracts_checked;
  j["contracts_hold"] = r.contracts_hold;
  return j;
}

inline json matrix_json(const ComplexMatrix& m) {
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json rr = json::array(), ii = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      rr.push_back(m(i, k).real());
      ii.push_back(m(i, k).imag());
    }
    re.push_back(rr);
    im.push_back(ii);
  }
  return json{{"real", re}, {"imag", im}};
}

inline json to_json(const CycleReport& r) {
  json j;
  j["clausius_sum"] = r.clausius_sum;
  j["cycles"] = r.cycles;
  j["residual"] = r.residual;
  j["converged"] = r.converged;
  j["clausius_holds"] = r.clausius_holds;
  j["strokes_hold"] = r.strokes_hold;
  json contacts = json::array();
  for (const auto& c : r.contacts)
    contacts.push_back({{"stroke", c.stroke},
                        {"beta", c.beta},
                        {"Q", c.heat},
                        {"dS", c.entropy_change},
                        {"dS_reservoir", c.reservoir_entropy_change},
                        {"slack", c.slack},
                        {"reservoir_slack", c.reservoir_slack}});
  j["contacts"] = contacts;
  json quenches = json::array();
  for (const auto& q : r.quenches) quenches.push_back({{"stroke", q.stroke}, {"work", q.work}});
  j["quenches"] = quenches;
  j["final_state"] = matrix_json(r.final_state);
  return j;
}

inline json to_json(const gas::GasReport& r) {
  json j;
  j["mode"] = gas::to_string(r.mode);
  j["n_samples"] = r.n_samples;
  j["flux_weighting"] = r.flux_weighting;
  j["mean_dE_a"] = r.mean_de_a;
  j["stderr_dE_a"] = r.stderr_de_a;
  j["mean_fractional_gain"] = r.mean_fractional_gain;
  j["stderr_fractional_gain"] = r.stderr_fractional_gain;
  j["x"] = r.x;
  j["closed_form_mean_gain"] = r.closed_form_mean_gain;
  j["reversal_ratio"] = r.reversal_ratio;
  j["sign"] = r.sign;
  j["a_gains"] = r.sign > 0;
  return j;
}

// ---------------------------------------------------------------------------
// Subcommands

struct Outcome {
  int code = kPass;
  json config;
  json payload;
  std::optional<std::string> csv;  // replaces the envelope when set
};

struct IneqArgs {
  std::string check = "ssa";
  std::string dims = "2,2,2";
  std::size_t trials = 100;
};

inline std::vector<std::size_t> parse_dims(const std::string& s) {
  std::vector<std::size_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    long long v = -1;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || pos == 0 || v <= 0) throw Error(ErrorCode::InvalidSpec, "bad --dims entry '" + item + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidSpec, "--dims is empty");
  return out;
}

inline Outcome cmd_ineq(const IneqArgs& a, std::uint64_t seed, unsigned threads) {
  const IneqCheck check = parse_ineq_check(a.check);
  const auto dims = parse_dims(a.dims);
  Outcome o;
  o.config = {{"check", a.check}, {"dims", dims}, {"trials", a.trials}};
  const IneqSuiteReport r = run_ineq_suite(check, dims, a.trials, seed, threads);
  o.payload = to_json(r);
  o.code = r.all_pass() ? kPass : kViolation;
  return o;
}

struct ExchangeArgs {
  std::string config;
  std::optional<std::string> kind;
  std::optional<double> phi;
  std::optional<std::string> sweep;
};

struct Sweep {
  double from = 0.0;
  double to = 0.0;
  std::size_t n = 1;

  double at(std::size_t i) const { return n == 1 ? from : from + (to - from) * static_cast<double>(i) / static_cast<double>(n - 1); }
};

/// phi=a:b:n, n points from a to b inclusive.
inline Sweep parse_sweep(const std::string& s) {
  static const std::regex re(R"(phi=([^:]+):([^:]+):([0-9]+))");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw Error(ErrorCode::InvalidSpec, "--sweep must look like phi=a:b:n");
  Sweep sw;
  try {
    std::size_t pa = 0, pb = 0;
    sw.from = std::stod(m[1].str(), &pa);
    sw.to = std::stod(m[2].str(), &pb);
    if (pa != static_cast<std::size_t>(m[1].length()) || pb != static_cast<std::size_t>(m[2].length())) throw std::invalid_argument("trailing");
    sw.n = std::stoul(m[3].str());
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidSpec, "--sweep must look like phi=a:b:n");
  }
  if (sw.n == 0 || !std::isfinite(sw.from) || !std::isfinite(sw.to)) throw Error(ErrorCode::InvalidSpec, "--sweep needs n >= 1 and finite bounds");
  return sw;
}

inline ExchangeReport exchange_at(const ExchangeConfig& cfg, CaseKind kind, std::optional<double> phi) {
  const SubsystemDims dims{cfg.spec.dim(), cfg.spec.dim()};
  std::vector<Rotation> rots;
  for (const auto& [pair, angle] : cfg.rotations) rots.push_back(make_rotation(dims, pair.first, pair.second, phi.value_or(angle)));
  const CaseSpec c = kind == CaseKind::V ? make_case_v(cfg.spec) : make_case_s(cfg.spec);
  return run_exchange(c, givens_unitary(dims, rots, total_levels(c.h_a, c.h_b)));
}

inline std::string sweep_csv(const std::vector<double>& phis, const std::vector<ExchangeReport>& rows) {
  std::string csv = "phi,Q_A,Q_B,dS_A,dS_B,I_init,I_final,W\r\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    for (double v : {phis[i], r.q_a, r.q_b, r.ds_a, r.ds_b, r.mutual_info_initial, r.mutual_info_final})
      csv += format_double(v) + ",";
    csv += format_double(r.work_leak) + "\r\n";
  }
  return csv;
}

inline Outcome cmd_exchange(const ExchangeArgs& a, bool csv, unsigned threads) {
  if (a.config.empty()) throw Error(ErrorCode::InvalidSpec, "exchange needs --config");
  const json raw = load_config(a.config, "exchange");
  const ExchangeConfig cfg = parse_exchange_config(raw);
  const CaseKind kind = a.kind ? parse_case(*a.kind) : cfg.kind.value_or(CaseKind::V);
  if (a.phi && a.sweep) throw Error(ErrorCode::InvalidSpec, "--phi and --sweep are exclusive");

  Outcome o;
  o.config = {{"config_path", a.config}, {"config", raw}, {"case", case_name(kind)}};
  if (a.phi) o.config["phi"] = *a.phi;
  if (a.sweep) o.config["sweep"] = *a.sweep;

  std::vector<double> phis;
  if (a.sweep) {
    const Sweep sw = parse_sweep(*a.sweep);
    for (std::size_t i = 0; i < sw.n; ++i) phis.push_back(sw.at(i));
  }
  if (!a.sweep) {
    const ExchangeReport r = exchange_at(cfg, kind, a.phi);
    o.payload = to_json(r);
    o.code = r.contracts_hold ? kPass : kViolation;
    if (csv) o.csv = sweep_csv({a.phi.value_or(cfg.rotations.empty() ? 0.0 : cfg.rotations.front().second)}, {r});
    return o;
  }
  // Validate once up front so a degeneracy failure is reported, not rethrown per point.
  exchange_at(cfg, kind, phis.front());
  std::vector<ExchangeReport> rows(phis.size());
  parallel_for(phis.size(), threads, [&](std::size_t i) { rows[i] = exchange_at(cfg, kind, phis[i]); });
  json arr = json::array();
  bool hold = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    json row = to_json(rows[i]);
    row["phi"] = phis[i];
    arr.push_back(row);
    hold = hold && rows[i].contracts_hold;
  }
  o.payload = {{"rows", arr}};
  o.code = hold ? kPass : kViolation;
  if (csv) o.csv = sweep_csv(phis, rows);
  return o;
}

struct ClausiusArgs {
  std::string config;
  std::optional<std::size_t> max_cycles;
  std::optional<double> fp_tol;
};

inline Outcome cmd_clausius(const ClausiusArgs& a) {
  if (a.config.empty()) throw Error(ErrorCode::InvalidSpec, "clausius needs --config");
  const json raw = load_config(a.config, "clausius");
  const ClausiusConfig cfg = parse_clausius_config(raw);
  const std::size_t max_cycles = a.max_cycles.value_or(cfg.max_cycles.value_or(1000));
  const double fp_tol = a.fp_tol.value_or(cfg.fp_tol.value_or(1e-10));
  const std::size_t d = cfg.system.dim();
  const DensityOperator initial =
      cfg.initial ? *cfg.initial
                  : DensityOperator::from_matrix(ComplexMatrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)) / static_cast<double>(d));

  Outcome o;
  o.config = {{"config_path", a.config}, {"config", raw}, {"max_cycles", max_cycles}, {"fp_tol", fp_tol}};
  try {
    const CycleReport r = clausius_cycle(cfg.system, initial, cfg.strokes, max_cycles, fp_tol);
    o.payload = to_json(r);
    o.code = r.clausius_holds && r.strokes_hold ? kPass : kViolation;
  } catch (const NoConvergenceError& e) {
    o.payload = to_json(e.report());
    o.code = kConvergence;
  }
  return o;
}

struct GasArgs {
  double ma = 1.0, mb = 1.0, ta = 1.0, tb = 1.0, gamma = 1.0, m_scale = 1.0;
  std::string mode = "entangled";
  std::size_t samples = 100000;
  std::optional<std::string> flux;
};

inline Outcome cmd_gas(const GasArgs& a, std::uint64_t seed, unsigned threads) {
  gas::CollisionSpec spec{a.ma, a.mb, a.ta, a.tb, a.gamma, a.m_scale};
  if (a.flux) {
    if (*a.flux != "on" && *a.flux != "off") throw Error(ErrorCode::InvalidSpec, "--flux must be on or off");
    spec.flux_weighting = *a.flux == "on";
  }
  gas::Mode mode;
  if (a.mode == "entangled")
    mode = gas::Mode::Entangled;
  else if (a.mode == "product")
    mode = gas::Mode::Product;
  else
    throw Error(ErrorCode::InvalidSpec, "--mode must be entangled or product");
  spec.validate();

  Outcome o;
  o.config = {{"ma", a.ma}, {"mb", a.mb},     {"ta", a.ta},           {"tb", a.tb},
              {"gamma", a.gamma}, {"m_scale", a.m_scale}, {"mode", a.mode}, {"samples", a.samples}};
  o.config["flux"] = a.flux ? json(*a.flux) : json(nullptr);
  o.payload = to_json(gas::ensemble_heat(spec, mode, a.samples, seed, threads));
  return o;
}

// ---------------------------------------------------------------------------

/// Parses argv (argv[0] is the program name) and runs one subcommand.
/// Output goes to `out` (or to --output), diagnostics to `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, unsigned threads) {
  CLI::App app{"Entropy-flow experiments: inequality ensembles, heat exchange, Clausius cycles, gas collisions"};
  app.require_subcommand(1);
  std::uint64_t seed = 1;
  std::string format;
  std::string output;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Master seed")->capture_default_str();
    sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--output", output, "Write results to this file instead of stdout");
  };

  IneqArgs ineq;
  auto* s_ineq = app.add_subcommand("ineq", "Random-state ensembles for ssa, eq1 (I_av <= S_av) or eq2 (Gibbs identity)");
  s_ineq->add_option("--check", ineq.check, "ssa | eq1 | eq2")->capture_default_str();
  s_ineq->add_option("--dims", ineq.dims, "Comma-separated factor dims (eq2: system,ancilla)")->capture_default_str();
  s_ineq->add_option("--trials", ineq.trials, "Number of random trials")->capture_default_str();
  common(s_ineq);

  ExchangeArgs ex;
  auto* s_ex = app.add_subcommand("exchange", "Case S / Case V heat exchange under Givens rotations");
  s_ex->add_option("--config", ex.config, "Exchange config (JSON)");
  s_ex->add_option("--case", ex.kind, "s or v (default: config, else v)");
  s_ex->add_option("--phi", ex.phi, "Override every rotation angle");
  s_ex->add_option("--sweep", ex.sweep, "phi=a:b:n, emits CSV");
  common(s_ex);

  ClausiusArgs cl;
  auto* s_cl = app.add_subcommand("clausius", "Cyclic reservoir contacts and quenches to a fixed point");
  s_cl->add_option("--config", cl.config, "Cycle config (JSON)");
  s_cl->add_option("--max-cycles", cl.max_cycles, "Cycle limit (default 1000)");
  s_cl->add_option("--fp-tol", cl.fp_tol, "Trace-distance tolerance for the fixed point (default 1e-10)");
  common(s_cl);

  GasArgs ga;
  auto* s_gas = app.add_subcommand("gas", "Monte Carlo collision ensemble");
  s_gas->add_option("--ma", ga.ma)->capture_default_str();
  s_gas->add_option("--mb", ga.mb)->capture_default_str();
  s_gas->add_option("--ta", ga.ta)->capture_default_str();
  s_gas->add_option("--tb", ga.tb)->capture_default_str();
  s_gas->add_option("--gamma", ga.gamma)->capture_default_str();
  s_gas->add_option("--m-scale", ga.m_scale)->capture_default_str();
  s_gas->add_option("--mode", ga.mode, "entangled | product")->capture_default_str();
  s_gas->add_option("--samples", ga.samples)->capture_default_str();
  s_gas->add_option("--flux", ga.flux, "on | off (default: on for product, off for entangled)");
  common(s_gas);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }

  const unsigned workers = resolve_threads(threads);
  const auto start = std::chrono::steady_clock::now();
  std::string command;
  Outcome o;
  try {
    if (format == "csv" && !s_ex->parsed()) throw Error(ErrorCode::InvalidSpec, "csv output is only available for exchange");
    if (s_ineq->parsed()) {
      command = "ineq";
      o = cmd_ineq(ineq, seed, workers);
    } else if (s_ex->parsed()) {
      command = "exchange";
      const bool csv = format == "csv" || (format.empty() && ex.sweep);
      o = cmd_exchange(ex, csv, workers);
    } else if (s_cl->parsed()) {
      command = "clausius";
      o = cmd_clausius(cl);
    } else {
      command = "gas";
      o = cmd_gas(ga, seed, workers);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e.code());
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::string text;
  if (o.csv) {
    text = *o.csv;
  } else {
    json env;
    env["tool_version"] = kToolVersion;
    env["command"] = command;
    env["config"] = o.config;
    env["seed"] = seed;
    env["threads"] = workers;
    env["wall_time_s"] = wall;
    env["exit_code"] = o.code;
    env["payload"] = o.payload;
    text = env.dump(2) + "\n";
  }
  if (output.empty()) {
    out << text;
  } else {
    std::ofstream f(output, std::ios::binary);
    if (!f || !(f << text)) {
      err << "error: cannot write " << output << "\n";
      return kValidation;
    }
  }
  if (o.code == kConvergence) err << "error: NoConvergence: fixed point not reached within the cycle limit\n";
  return o.code;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  return run(argc, argv, out, err, threads_from_env());
}

}  // namespace entroflow::cli
