#pragma once

// Command layer behind the `opdil` executable. Each command maps a RunConfig
// to a JSON report plus a process exit code:
//   0  every verdict YES (or the construction verified)
//   1  malformed input or invalid arguments
//   2  some verdict NO, a residual failure, or data rejected by a constructor
//   3  no NO, but at least one BORDERLINE
//   4  a recursive constructor broke down (the failing level is in the message)

#include <chrono>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "opdil/ca_class.hpp"
#include "opdil/dilations.hpp"
#include "opdil/io.hpp"
#include "opdil/moments.hpp"

namespace opdil::cli {

using io::json;

inline constexpr std::uint64_t kDefaultSeed = 20240601;

enum ExitCode : int { kOk = 0, kMalformed = 1, kFailed = 2, kBorderline = 3, kBreakdown = 4 };

struct RunConfig {
  std::string command;
  std::string input;
  std::string output;
  std::string operator_path;
  std::string operator2_path;
  Tolerance tol;
  std::optional<std::size_t> levels;
  std::optional<std::size_t> n_max;
  std::optional<std::size_t> back;
  std::optional<std::size_t> fwd;
  std::uint64_t seed = kDefaultSeed;
  std::size_t trials = 200;
  std::vector<double> grid_radii{0.3, 0.6, 0.9, 0.99};
  std::size_t grid_angles = 64;
  std::vector<std::string> criteria;
  std::string kind;
  bool timestamp = true;
};

struct Outcome {
  json report;
  int exit_code = kOk;
};

namespace detail {

inline json echo(const RunConfig& c) {
  json out = {{"input", c.input},
              {"tol_abs", c.tol.abs},
              {"tol_rel", c.tol.rel},
              {"seed", c.seed},
              {"trials", c.trials},
              {"grid_radii", c.grid_radii},
              {"grid_angles", c.grid_angles}};
  if (c.levels) out["levels"] = *c.levels;
  if (c.n_max) out["n_max"] = *c.n_max;
  if (c.back) out["back"] = *c.back;
  if (c.fwd) out["fwd"] = *c.fwd;
  if (!c.criteria.empty()) out["criteria"] = c.criteria;
  if (!c.kind.empty()) out["kind"] = c.kind;
  if (!c.operator_path.empty()) out["operator"] = c.operator_path;
  if (!c.operator2_path.empty()) out["operator2"] = c.operator2_path;
  return out;
}

inline json base_report(const RunConfig& c) {
  return {{"command", c.command}, {"config", echo(c)}, {"seed", c.seed}};
}

inline int exit_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::ParseError:
    case ErrorCode::NotSquare:
    case ErrorCode::ShapeMismatch:
    case ErrorCode::InvalidArgument:
    case ErrorCode::InsufficientData:
    case ErrorCode::NotHermitian:
    case ErrorCode::NotScalar:
    case ErrorCode::DiskViolation:
    case ErrorCode::Overflow:
      return kMalformed;
    case ErrorCode::RecursionBreakdown:
      return kBreakdown;
    default:
      return kFailed;
  }
}

inline Outcome error_outcome(const RunConfig& c, const Error& e) {
  Outcome out{base_report(c), exit_for(e)};
  json err = {{"code", std::string(to_string(e.code()))}, {"message", e.what()}};
  if (e.level()) err["level"] = *e.level();
  out.report["error"] = std::move(err);
  out.report["overall"] = "ERROR";
  return out;
}

inline int exit_for(Verdict v) {
  switch (v) {
    case Verdict::Yes: return kOk;
    case Verdict::No: return kFailed;
    case Verdict::Borderline: return kBorderline;
  }
  return kFailed;
}

inline KernelGrid grid_of(const RunConfig& c) {
  KernelGrid g;
  g.radii = c.grid_radii;
  g.angles = c.grid_angles;
  return g;
}

struct WeightedOperator {
  ComplexMatrix a;
  ComplexMatrix t;
};

// {"A", "C"} goes through ca_build; {"A", "T"} is taken as given.
inline WeightedOperator weighted_operator(const json& j, const Tolerance& tol) {
  if (j.contains("C")) {
    const CaInstance inst = io::instance_from_json(j, tol);
    return {inst.A, inst.T};
  }
  return {io::matrix_from_json(io::detail::field(j, "A", "input"), "input.A"),
          io::matrix_from_json(io::detail::field(j, "T", "input"), "input.T")};
}

inline MomentSequence require_sequence(const json& j, const Tolerance& tol) {
  if (!io::looks_like_sequence(j)) fail(ErrorCode::ParseError, "input: expected a moment sequence {\"dim\", \"terms\"}");
  return io::sequence_from_json(j, tol);
}

}  // namespace detail

inline Outcome cmd_check(const RunConfig& c) {
  try {
    if (c.criteria.empty()) fail(ErrorCode::InvalidArgument, "no --criterion given");
    const json input = io::load_json_file(c.input);
    Outcome out{detail::base_report(c), kOk};
    json reports = json::array();
    Verdict overall = Verdict::Yes;
    for (const std::string& name : c.criteria) {
      CriterionReport r;
      if (name == "zeta" || name == "kernel") {
        if (!io::looks_like_instance(input)) fail(ErrorCode::ParseError, "input: " + name + " needs {\"A\", \"C\"} or {\"A\", \"T\"}");
        const auto w = detail::weighted_operator(input, c.tol);
        r = name == "zeta" ? zeta_check(w.a, w.t, c.n_max.value_or(c.levels.value_or(3)), c.trials, c.seed, c.tol)
                           : kernel_check(w.a, w.t, detail::grid_of(c), c.tol);
      } else {
        const MomentSequence seq = detail::require_sequence(input, c.tol);
        if (name == "hankel")
          r = hamburger_check(seq);
        else if (name == "selfadjoint")
          r = selfadjoint_contraction_check(seq);
        else if (name == "cm")
          r = completely_monotone_check(seq);
        else if (name == "toeplitz")
          r = toeplitz_positivity_check(seq, c.trials, c.seed);
        else if (name == "poisson")
          r = poisson_check(seq, c.grid_radii, c.grid_angles);
        else
          fail(ErrorCode::InvalidArgument, "unknown criterion \"" + name + "\"");
      }
      overall = combine(overall, r.satisfied);
      reports.push_back(io::to_json(r));
    }
    out.report["criteria"] = std::move(reports);
    out.report["overall"] = to_string(overall);
    out.exit_code = detail::exit_for(overall);
    return out;
  } catch (const Error& e) {
    return detail::error_outcome(c, e);
  }
}

inline Outcome cmd_dilate(const RunConfig& c) {
  try {
    const json input = io::load_json_file(c.input);
    const std::string& kind = c.kind;
    DilationResult result;
    std::optional<MomentSequence> source;
    std::optional<CaInstance> instance;

    if (kind == "gns" || kind == "gns-positive" || kind == "tridiagonal" || kind == "isometric") {
      source = detail::require_sequence(input, c.tol);
      const std::size_t n = source->order();
      if (kind == "gns") {
        result = gns_selfadjoint(*source, c.levels.value_or(n >= 1 ? (n - 1) / 2 : 0));
      } else if (kind == "gns-positive") {
        result = gns_positive(*source, c.levels.value_or(n >= 1 ? (n - 1) / 2 : 0));
      } else if (kind == "tridiagonal") {
        result = tridiagonal_recursive(*source, c.levels.value_or(n / 2)).second;
      } else {
        result = isometric_recursive(*source, c.levels.value_or(n >= 1 ? n - 1 : 0));
      }
    } else if (kind == "schaffer-isometry" || kind == "schaffer-unitary") {
      if (!io::looks_like_matrix(input)) fail(ErrorCode::ParseError, "input: " + kind + " needs a matrix T");
      const ComplexMatrix t = io::matrix_from_json(input, "input");
      const std::size_t fwd = c.fwd.value_or(c.levels.value_or(6));
      result = kind == "schaffer-isometry" ? schaffer_isometry(t, fwd, c.tol)
                                           : schaffer_unitary(t, c.back.value_or(c.levels.value_or(6)), fwd, c.tol);
      source = power_sequence(t, result.guaranteed_orders, c.tol);
    } else if (kind == "ca-isometric" || kind == "ca-unitary") {
      if (!io::looks_like_instance(input)) fail(ErrorCode::ParseError, "input: " + kind + " needs {\"A\", \"C\"}");
      instance = io::instance_from_json(input, c.tol);
      result = kind == "ca-isometric"
                   ? ca_isometric_V(*instance, c.levels.value_or(6))
                   : ca_unitary_U(*instance, c.back.value_or(c.levels.value_or(6)), c.fwd.value_or(c.levels.value_or(6)));
      source = ca_moments(*instance, std::max<std::size_t>(result.guaranteed_orders, 1));
    } else {
      fail(ErrorCode::InvalidArgument, "unknown --kind \"" + kind + "\"");
    }

    // independent re-verification before anything is written
    const DilationResult check =
        verify_dilation(result.matrix, *source, result.guaranteed_orders, result.kind, result.edges);
    Outcome out{detail::base_report(c), kOk};
    const bool ok = result.verified && check.verified && check.guaranteed_orders >= result.guaranteed_orders;
    json entry = io::to_json(result, ok);
    entry["reverified"] = ok;
    out.report["dilations"] = json::array({entry});
    out.report["overall"] = ok ? "VERIFIED" : "RESIDUAL_FAILURE";
    out.exit_code = ok ? kOk : kFailed;
    return out;
  } catch (const Error& e) {
    return detail::error_outcome(c, e);
  }
}

inline Outcome cmd_jacobi(const RunConfig& c) {
  try {
    const MomentSequence seq = detail::require_sequence(io::load_json_file(c.input), c.tol);
    const std::size_t levels = c.levels.value_or(seq.order() / 2);
    const JacobiParameters p = jacobi_parameters(seq, levels);
    const ComplexMatrix j = jacobi_matrix(p.a, p.b);
    // a finite Jacobi matrix of size L reproduces moments through 2L - 1,
    // and all of them once the measure is exhausted
    const std::size_t top = p.rank_terminated ? seq.order() : std::min(seq.order(), 2 * p.a.size() - 1);
    const double norm_j = spectral_norm(j);
    double worst = 0.0;
    bool ok = true;
    for (std::size_t n = 0; n <= top; ++n) {
      const double r = std::abs(corner_compress(j, 1, n)(0, 0) - seq[n](0, 0));
      worst = std::max(worst, r);
      ok = ok && r <= residual_bound(c.tol, norm_j, n);
    }

    Outcome out{detail::base_report(c), kOk};
    out.report["a"] = p.a;
    out.report["b"] = p.b;
    out.report["rank_terminated"] = p.rank_terminated;
    if (p.rank_terminated)
      out.report["note"] = "Gram matrix lost rank after " + std::to_string(p.a.size()) + " level(s); the measure has " +
                           std::to_string(p.a.size()) + " atom(s)";
    out.report["reconstruction_orders"] = top;
    out.report["reconstruction_residual"] = worst;
    out.report["overall"] = ok ? "YES" : "NO";
    out.exit_code = ok ? kOk : kFailed;
    return out;
  } catch (const Error& e) {
    return detail::error_outcome(c, e);
  }
}

namespace detail {

struct LoadedOperator {
  ComplexMatrix matrix;
  std::optional<DilationKind> kind;
  std::optional<std::size_t> orders;
  EdgeSpec edges;
};

// Accepts a bare matrix, a dilation result, or a full dilate report.
inline LoadedOperator load_operator(const std::string& path) {
  json j = io::load_json_file(path);
  if (j.is_object() && j.contains("dilations")) {
    if (!j["dilations"].is_array() || j["dilations"].empty())
      fail(ErrorCode::ParseError, path + ": report has no dilations");
    j = j["dilations"][0];
  }
  LoadedOperator out;
  if (j.is_object() && j.contains("operator")) {
    out.matrix = io::matrix_from_json(j["operator"], path + ":operator");
    if (j.contains("kind")) out.kind = io::kind_from_string(j["kind"].get<std::string>());
    if (j.contains("guaranteed_orders")) out.orders = j["guaranteed_orders"].get<std::size_t>();
    if (j.contains("edge_rows")) out.edges.rows = j["edge_rows"].get<std::vector<std::size_t>>();
    if (j.contains("edge_cols")) out.edges.cols = j["edge_cols"].get<std::vector<std::size_t>>();
  } else {
    out.matrix = io::matrix_from_json(j, path);
  }
  return out;
}

inline std::optional<DilationKind> kind_option(const std::string& s) {
  if (s.empty()) return std::nullopt;
  if (s == "self-adjoint") return DilationKind::SelfAdjoint;
  if (s == "positive") return DilationKind::Positive;
  if (s == "isometric") return DilationKind::Isometric;
  if (s == "unitary") return DilationKind::Unitary;
  if (s == "partial") return DilationKind::Partial;
  return io::kind_from_string(s);
}

}  // namespace detail

inline Outcome cmd_verify(const RunConfig& c) {
  try {
    if (c.operator_path.empty()) fail(ErrorCode::InvalidArgument, "verify needs --operator");
    const detail::LoadedOperator op = detail::load_operator(c.operator_path);
    const json input = io::load_json_file(c.input);
    const std::size_t wanted = c.n_max.value_or(op.orders.value_or(6));

    MomentSequence seq = [&] {
      if (io::looks_like_sequence(input)) return io::sequence_from_json(input, c.tol);
      if (io::looks_like_instance(input)) return ca_moments(io::instance_from_json(input, c.tol), std::max<std::size_t>(wanted, 1));
      if (io::looks_like_matrix(input)) return power_sequence(io::matrix_from_json(input, "input"), wanted, c.tol);
      fail(ErrorCode::ParseError, "input: expected a sequence, an instance or a matrix");
    }();
    const std::size_t n_max = std::min(wanted, seq.order());
    const DilationKind kind = detail::kind_option(c.kind).value_or(
        op.kind.value_or(hermiticity_defect(op.matrix) <= tau(c.tol, op.matrix) ? DilationKind::SelfAdjoint
                                                                                : DilationKind::Isometric));
    const DilationResult r = verify_dilation(op.matrix, seq, n_max, kind, op.edges);

    const double norm_b = spectral_norm(op.matrix);
    json table = json::array();
    bool ok = true;
    for (std::size_t n = 0; n < r.residuals.size(); ++n) {
      const double bound = residual_bound(c.tol, norm_b, n);
      const bool pass = r.residuals[n] <= bound;
      ok = ok && pass;
      table.push_back({{"n", n}, {"residual", r.residuals[n]}, {"bound", bound}, {"pass", pass}});
    }
    Outcome out{detail::base_report(c), kOk};
    out.report["residual_table"] = std::move(table);
    out.report["dilations"] = json::array({io::to_json(r, false)});

    if (!c.operator2_path.empty()) {
      const detail::LoadedOperator op2 = detail::load_operator(c.operator2_path);
      const double gap = equivalence_by_moments(op.matrix, op2.matrix, seq.dim(), n_max, kind == DilationKind::Unitary);
      const double bound = residual_bound(c.tol, std::max(norm_b, spectral_norm(op2.matrix)), n_max);
      out.report["equivalence"] = {{"max_gap", gap}, {"bound", bound}, {"pass", gap <= bound}};
      ok = ok && gap <= bound;
    }
    out.report["overall"] = ok ? "YES" : "NO";
    out.exit_code = ok ? kOk : kFailed;
    return out;
  } catch (const Error& e) {
    return detail::error_outcome(c, e);
  }
}

inline Outcome dispatch(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  Outcome out;
  if (c.command == "check")
    out = cmd_check(c);
  else if (c.command == "dilate")
    out = cmd_dilate(c);
  else if (c.command == "jacobi")
    out = cmd_jacobi(c);
  else if (c.command == "verify")
    out = cmd_verify(c);
  else
    out = detail::error_outcome(c, Error(ErrorCode::InvalidArgument, "unknown command \"" + c.command + "\""));
  if (c.timestamp) {
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm utc{};
    gmtime_r(&now, &utc);
    std::ostringstream ts;
    ts << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    out.report["timestamp"] = ts.str();
    out.report["wall_time_seconds"] = elapsed;
  }
  return out;
}

/// Parses argv, runs the command, writes the report, and returns the exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Dilation criteria and constructions for operator moment sequences", "opdil"};
  app.require_subcommand(1);
  RunConfig config;

  auto shared = [&config](CLI::App* sub) {
    sub->add_option("--input", config.input, "input JSON (sequence, matrix or {A, C} instance)")->required();
    sub->add_option("--output", config.output, "write the report here instead of stdout");
    sub->add_option("--tol-abs", config.tol.abs, "absolute tolerance")->check(CLI::NonNegativeNumber);
    sub->add_option("--tol-rel", config.tol.rel, "tolerance relative to the operator norm")->check(CLI::NonNegativeNumber);
    sub->add_option("--levels", config.levels, "block levels of a construction");
    sub->add_option("--n-max", config.n_max, "highest power to check");
    sub->add_option("--seed", config.seed, "seed for sampling");
    sub->add_option("--trials", config.trials, "random samples for Toeplitz refutation");
    sub->add_option("--grid-radii", config.grid_radii, "comma-separated radii in [0, 1)")->delimiter(',');
    sub->add_option("--grid-angles", config.grid_angles, "angles per radius")->check(CLI::PositiveNumber);
    sub->add_flag("--no-timestamp", "omit timestamp and wall time from the report");
  };

  CLI::App* check = app.add_subcommand("check", "run existence criteria");
  shared(check);
  check->add_option("--criterion", config.criteria, "hankel, selfadjoint, cm, toeplitz, poisson, zeta, kernel")
      ->delimiter(',')
      ->check(CLI::IsMember({"hankel", "selfadjoint", "cm", "toeplitz", "poisson", "zeta", "kernel"}))
      ->required();

  CLI::App* dilate = app.add_subcommand("dilate", "construct and verify a dilation");
  shared(dilate);
  dilate
      ->add_option("--kind", config.kind,
                   "gns, gns-positive, tridiagonal, isometric, schaffer-isometry, schaffer-unitary, ca-isometric, ca-unitary")
      ->check(CLI::IsMember({"gns", "gns-positive", "tridiagonal", "isometric", "schaffer-isometry", "schaffer-unitary",
                             "ca-isometric", "ca-unitary"}))
      ->required();
  dilate->add_option("--back", config.back, "incoming shift blocks (unitary kinds)");
  dilate->add_option("--fwd", config.fwd, "outgoing shift blocks");

  CLI::App* jacobi = app.add_subcommand("jacobi", "Jacobi parameters of scalar moments");
  shared(jacobi);

  CLI::App* verify = app.add_subcommand("verify", "check a saved operator against a sequence");
  shared(verify);
  verify->add_option("--operator", config.operator_path, "operator JSON (matrix, dilation or dilate report)")->required();
  verify->add_option("--operator2", config.operator2_path, "second operator for moment equivalence");
  verify->add_option("--kind", config.kind, "structure to check: self-adjoint, positive, isometric, unitary, partial");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "opdil: " << e.what() << "\n";
    return kMalformed;
  }

  for (CLI::App* sub : {check, dilate, jacobi, verify})
    if (sub->parsed()) {
      config.command = sub->get_name();
      config.timestamp = sub->count("--no-timestamp") == 0;
    }

  const Outcome outcome = dispatch(config);
  if (outcome.exit_code == kMalformed || outcome.exit_code == kBreakdown)
    err << "opdil: " << outcome.report["error"]["message"].get<std::string>() << "\n";
  const std::string text = outcome.report.dump(2) + "\n";
  if (config.output.empty()) {
    out << text;
  } else {
    std::ofstream file(config.output);
    if (!file) {
      err << "opdil: cannot write " << config.output << "\n";
      return kMalformed;
    }
    file << text;
  }
  return outcome.exit_code;
}

}  // namespace opdil::cli
