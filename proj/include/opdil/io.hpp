#pragma once

// JSON encoding for matrices, moment sequences, C_A instances and results.
//
// Matrix: {"rows": r, "cols": c, "data": [[re, im], ...]} in row-major order.
// Sequence: {"dim": d, "terms": [matrix | "I", ...]}.
// Instance: {"A": matrix, "C": matrix}.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "opdil/ca_class.hpp"
#include "opdil/dilations.hpp"
#include "opdil/moments.hpp"

namespace opdil::io {

using json = nlohmann::json;

namespace detail {

[[noreturn]] inline void bad(const std::string& where, const std::string& what) {
  fail(ErrorCode::ParseError, where + ": " + what);
}

inline const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) bad(where, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(where, std::string("missing field \"") + key + "\"");
  return *it;
}

inline std::size_t count_field(const json& j, const char* key, const std::string& where) {
  const json& v = field(j, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    bad(where + "." + key, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

inline double real_value(const json& v, const std::string& where) {
  if (!v.is_number()) bad(where, "expected a number");
  return v.get<double>();
}

}  // namespace detail

inline json to_json(const ComplexMatrix& m) {
  json data = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) data.push_back({m(i, j).real(), m(i, j).imag()});
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

/// Entries may be [re, im] pairs or plain real numbers.
inline ComplexMatrix matrix_from_json(const json& j, const std::string& where = "matrix") {
  const std::size_t rows = detail::count_field(j, "rows", where);
  const std::size_t cols = detail::count_field(j, "cols", where);
  const json& data = detail::field(j, "data", where);
  if (!data.is_array()) detail::bad(where + ".data", "expected an array");
  if (data.size() != rows * cols)
    detail::bad(where + ".data", "has " + std::to_string(data.size()) + " entries, expected " +
                                     std::to_string(rows * cols));
  ComplexMatrix m(idx(rows), idx(cols));
  for (std::size_t k = 0; k < data.size(); ++k) {
    const std::string at = where + ".data[" + std::to_string(k) + "]";
    const json& e = data[k];
    Complex z;
    if (e.is_number()) {
      z = e.get<double>();
    } else if (e.is_array() && e.size() == 2) {
      z = Complex(detail::real_value(e[0], at + "[0]"), detail::real_value(e[1], at + "[1]"));
    } else {
      detail::bad(at, "expected [re, im] or a number");
    }
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) detail::bad(at, "entry is not finite");
    m(idx(k / cols), idx(k % cols)) = z;
  }
  return m;
}

inline json to_json(const MomentSequence& seq) {
  json terms = json::array();
  for (std::size_t n = 0; n <= seq.order(); ++n) terms.push_back(n == 0 ? json("I") : to_json(seq[n]));
  return {{"dim", seq.dim()}, {"terms", std::move(terms)}};
}

inline MomentSequence sequence_from_json(const json& j, const Tolerance& tol = {}, const std::string& where = "sequence") {
  const std::size_t d = detail::count_field(j, "dim", where);
  if (d == 0) detail::bad(where + ".dim", "must be positive");
  const json& terms = detail::field(j, "terms", where);
  if (!terms.is_array() || terms.empty()) detail::bad(where + ".terms", "expected a nonempty array");
  std::vector<ComplexMatrix> out;
  for (std::size_t n = 0; n < terms.size(); ++n) {
    const std::string at = where + ".terms[" + std::to_string(n) + "]";
    if (terms[n].is_string()) {
      if (terms[n].get<std::string>() != "I") detail::bad(at, "the only string term allowed is \"I\"");
      out.push_back(identity(d));
      continue;
    }
    ComplexMatrix m = matrix_from_json(terms[n], at);
    if (m.rows() != idx(d) || m.cols() != idx(d)) detail::bad(at, "is not " + std::to_string(d) + "x" + std::to_string(d));
    out.push_back(std::move(m));
  }
  try {
    return MomentSequence(std::move(out), tol);
  } catch (const Error& e) {
    detail::bad(where, e.what());
  }
}

inline bool looks_like_sequence(const json& j) { return j.is_object() && j.contains("terms"); }
inline bool looks_like_matrix(const json& j) { return j.is_object() && j.contains("data"); }
inline bool looks_like_instance(const json& j) { return j.is_object() && j.contains("A") && (j.contains("C") || j.contains("T")); }

inline json instance_to_json(const CaInstance& inst) { return {{"A", to_json(inst.A)}, {"C", to_json(inst.C)}}; }

inline CaInstance instance_from_json(const json& j, const Tolerance& tol = {}) {
  const ComplexMatrix a = matrix_from_json(detail::field(j, "A", "instance"), "instance.A");
  const ComplexMatrix c = matrix_from_json(detail::field(j, "C", "instance"), "instance.C");
  return ca_build(a, c, tol);
}

namespace detail {

inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace detail

inline json to_json(const Witness& w) {
  json out = {{"order", w.order}, {"value", w.value}};
  if (w.k) out["k"] = *w.k;
  if (w.vector.size() > 0) out["vector"] = to_json(ComplexMatrix(w.vector));
  if (w.coefficients.size() > 0) out["coefficients"] = to_json(ComplexMatrix(w.coefficients));
  if (w.point) out["point"] = {w.point->real(), w.point->imag()};
  return out;
}

inline json to_json(const CriterionReport& r) {
  json out = {{"criterion", r.criterion},
              {"satisfied", to_string(r.satisfied)},
              {"max_order_checked", r.max_order_checked},
              {"worst_margin", detail::finite_or_null(r.worst_margin)}};
  if (!r.certificate.empty()) out["certificate"] = r.certificate;
  if (r.witness) out["witness"] = to_json(*r.witness);
  return out;
}

inline json to_json(const DilationResult& r, bool include_operator = true) {
  json out = {{"kind", to_string(r.kind)},
              {"ambient_dim", r.ambient_dim},
              {"base_dim", r.base_dim},
              {"guaranteed_orders", r.guaranteed_orders},
              {"residuals", r.residuals},
              {"structure_defect", r.structure_defect},
              {"edge_defect", r.edge_defect},
              {"edge_rows", r.edges.rows},
              {"edge_cols", r.edges.cols},
              {"verified", r.verified}};
  json certs = json::object();
  for (const auto& [k, v] : r.certificates) certs[k] = detail::finite_or_null(v);
  out["certificates"] = std::move(certs);
  if (include_operator) out["operator"] = to_json(r.matrix);
  return out;
}

inline DilationKind kind_from_string(const std::string& s) {
  if (s == "SELF_ADJOINT") return DilationKind::SelfAdjoint;
  if (s == "POSITIVE") return DilationKind::Positive;
  if (s == "ISOMETRIC") return DilationKind::Isometric;
  if (s == "UNITARY") return DilationKind::Unitary;
  if (s == "PARTIAL") return DilationKind::Partial;
  fail(ErrorCode::ParseError, "unknown dilation kind \"" + s + "\"");
}

/// Parses a file, turning syntax errors into ParseError with path:line:column.
inline json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::ParseError, path + ": cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    fail(ErrorCode::ParseError, path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " + e.what());
  }
}

}  // namespace opdil::io
