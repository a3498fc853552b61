#pragma once

// Scenario files: a single JSON object
//
//   {
//     "hbar": 1.0,
//     "hamiltonian": {"type": "diagonal", "eigenvalues": ["0", "1", "3"], "scale": 1.0},
//     "state": [[1, 0], [1, 0], [1, 0]],
//     "options": {"auto_normalize": true}
//   }
//
// or with {"type": "dense", "matrix": [[re, im], ...]} holding n*n row-major
// entries (a nested list of rows is accepted too). For diagonal Hamiltonians
// the state is given in the listed eigenbasis.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geophase/linalg.hpp"
#include "geophase/rational.hpp"
#include "geophase/spectral.hpp"

namespace geophase {

struct ScenarioOptions {
  double eps_support = 1e-12;
  long long max_denominator = 1000000;
  double rat_tol = 1e-9;
  /// Non-positive means 1e-10 * max|lambda|.
  double deg_tol = -1.0;
  int samples_per_period = 2048;
  double fidelity_tol = 1e-6;
  bool auto_normalize = false;

  bool operator==(const ScenarioOptions&) const = default;
};

struct HamiltonianBlock {
  enum class Kind { Diagonal, Dense };
  Kind kind = Kind::Diagonal;
  std::vector<Rational> eigenvalues;
  double scale = 1.0;
  CMatrix matrix;

  Index dim() const { return kind == Kind::Diagonal ? static_cast<Index>(eigenvalues.size()) : matrix.rows(); }
};

struct Scenario {
  double hbar = 1.0;
  HamiltonianBlock hamiltonian;
  CVector state;
  ScenarioOptions options;
  std::string source = "<memory>";
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void field_error(const std::string& source, const std::string& field, const std::string& msg) {
  throw Error(source + ": field '" + field + "': " + msg);
}

inline double as_real(const json& j, const std::string& source, const std::string& field) {
  if (!j.is_number()) field_error(source, field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) field_error(source, field, "must be finite");
  return v;
}

inline Complex as_complex(const json& j, const std::string& source, const std::string& field) {
  if (j.is_number()) return {as_real(j, source, field), 0.0};
  if (!j.is_array() || j.size() != 2) field_error(source, field, "expected an [re, im] pair");
  return {as_real(j[0], source, field + "[0]"), as_real(j[1], source, field + "[1]")};
}

inline std::string position_context(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

}  // namespace detail

inline Scenario parse_scenario_text(const std::string& text, const std::string& source = "<memory>") {
  using detail::field_error;
  using nlohmann::json;
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(source + ": malformed scenario at " + detail::position_context(text, e.byte) + ": " + e.what());
  }
  if (!root.is_object()) throw Error(source + ": scenario must be a single JSON object");
  static const char* const known[] = {"hbar", "hamiltonian", "state", "options"};
  for (const auto& [key, _] : root.items()) {
    if (std::find(std::begin(known), std::end(known), key) == std::end(known))
      field_error(source, key, "unknown field");
  }

  Scenario sc;
  sc.source = source;
  if (root.contains("hbar")) {
    sc.hbar = detail::as_real(root["hbar"], source, "hbar");
    if (!(sc.hbar > 0.0)) field_error(source, "hbar", "must be positive");
  }

  if (!root.contains("hamiltonian")) field_error(source, "hamiltonian", "missing");
  const json& hj = root["hamiltonian"];
  if (!hj.is_object() || !hj.contains("type") || !hj["type"].is_string())
    field_error(source, "hamiltonian.type", "expected \"diagonal\" or \"dense\"");
  const std::string type = hj["type"].get<std::string>();
  auto& hb = sc.hamiltonian;
  if (type == "diagonal") {
    hb.kind = HamiltonianBlock::Kind::Diagonal;
    if (!hj.contains("eigenvalues") || !hj["eigenvalues"].is_array() || hj["eigenvalues"].empty())
      field_error(source, "hamiltonian.eigenvalues", "expected a nonempty list of rational strings");
    for (std::size_t i = 0; i < hj["eigenvalues"].size(); ++i) {
      const json& e = hj["eigenvalues"][i];
      const std::string f = "hamiltonian.eigenvalues[" + std::to_string(i) + "]";
      if (e.is_string()) {
        try {
          hb.eigenvalues.push_back(Rational::parse(e.get<std::string>()));
        } catch (const Error& err) {
          field_error(source, f, err.what());
        }
      } else if (e.is_number_integer()) {
        hb.eigenvalues.push_back(Rational(e.get<long long>()));
      } else {
        field_error(source, f, "expected a rational literal such as \"-3/7\"");
      }
    }
    if (hj.contains("scale")) {
      hb.scale = detail::as_real(hj["scale"], source, "hamiltonian.scale");
      if (!(hb.scale > 0.0)) field_error(source, "hamiltonian.scale", "must be positive");
    }
  } else if (type == "dense") {
    hb.kind = HamiltonianBlock::Kind::Dense;
    if (!hj.contains("matrix") || !hj["matrix"].is_array() || hj["matrix"].empty())
      field_error(source, "hamiltonian.matrix", "expected a list of [re, im] entries");
    const json& mj = hj["matrix"];
    std::vector<Complex> flat;
    const bool nested = mj[0].is_array() && !mj[0].empty() && mj[0][0].is_array();
    if (nested) {
      for (std::size_t r = 0; r < mj.size(); ++r) {
        if (!mj[r].is_array() || mj[r].size() != mj.size())
          field_error(source, "hamiltonian.matrix[" + std::to_string(r) + "]", "row length differs from row count");
        for (std::size_t c = 0; c < mj[r].size(); ++c)
          flat.push_back(detail::as_complex(
              mj[r][c], source, "hamiltonian.matrix[" + std::to_string(r) + "][" + std::to_string(c) + "]"));
      }
    } else {
      for (std::size_t i = 0; i < mj.size(); ++i)
        flat.push_back(detail::as_complex(mj[i], source, "hamiltonian.matrix[" + std::to_string(i) + "]"));
    }
    const auto n = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(flat.size()))));
    if (n * n != static_cast<Index>(flat.size()))
      field_error(source, "hamiltonian.matrix", std::to_string(flat.size()) + " entries is not a square count");
    hb.matrix.resize(n, n);
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) hb.matrix(r, c) = flat[static_cast<std::size_t>(r * n + c)];
    try {
      (void)HermitianMatrix(hb.matrix);
    } catch (const Error& err) {
      field_error(source, "hamiltonian.matrix", err.what());
    }
    if (n > kMaxDenseDimension) field_error(source, "hamiltonian.matrix", "dimension exceeds 64");
  } else {
    field_error(source, "hamiltonian.type", "unknown type \"" + type + "\"");
  }

  if (root.contains("options")) {
    const json& oj = root["options"];
    if (!oj.is_object()) field_error(source, "options", "expected an object");
    auto& o = sc.options;
    for (const auto& [key, v] : oj.items()) {
      const std::string f = "options." + key;
      if (key == "eps_support") {
        o.eps_support = detail::as_real(v, source, f);
        if (!(o.eps_support > 0.0)) field_error(source, f, "must be positive");
      } else if (key == "max_denominator") {
        if (!v.is_number_integer() || v.get<long long>() < 1) field_error(source, f, "expected a positive integer");
        o.max_denominator = v.get<long long>();
      } else if (key == "rat_tol") {
        o.rat_tol = detail::as_real(v, source, f);
        if (!(o.rat_tol > 0.0)) field_error(source, f, "must be positive");
      } else if (key == "deg_tol") {
        o.deg_tol = detail::as_real(v, source, f);
      } else if (key == "samples_per_period") {
        if (!v.is_number_integer() || v.get<long long>() < 8) field_error(source, f, "expected an integer >= 8");
        o.samples_per_period = v.get<int>();
      } else if (key == "fidelity_tol") {
        o.fidelity_tol = detail::as_real(v, source, f);
        if (!(o.fidelity_tol > 0.0)) field_error(source, f, "must be positive");
      } else if (key == "auto_normalize") {
        if (!v.is_boolean()) field_error(source, f, "expected true or false");
        o.auto_normalize = v.get<bool>();
      } else {
        field_error(source, f, "unknown option");
      }
    }
  }

  if (!root.contains("state") || !root["state"].is_array()) field_error(source, "state", "expected a list of amplitudes");
  const json& sj = root["state"];
  const Index n = hb.dim();
  if (static_cast<Index>(sj.size()) != n) {
    field_error(source, "state",
                "has " + std::to_string(sj.size()) + " amplitudes but the Hamiltonian has dimension " +
                    std::to_string(n));
  }
  sc.state.resize(n);
  for (Index i = 0; i < n; ++i)
    sc.state(i) = detail::as_complex(sj[static_cast<std::size_t>(i)], source, "state[" + std::to_string(i) + "]");
  const double norm = sc.state.norm();
  if (!(norm > 0.0)) field_error(source, "state", "zero vector");
  if (std::fabs(norm - 1.0) > 1e-8) {
    if (!sc.options.auto_normalize) {
      std::ostringstream os;
      os << "norm " << norm << " differs from 1 (set options.auto_normalize to rescale)";
      field_error(source, "state", os.str());
    }
  }
  // Accepted states are rescaled unless already normalized to rounding, which
  // keeps serialize -> parse an identity.
  if (std::fabs(norm - 1.0) > 1e-15) sc.state /= norm;
  return sc;
}

inline Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path);
}

inline std::string serialize_scenario(const Scenario& sc) {
  using nlohmann::json;
  json root;
  root["hbar"] = sc.hbar;
  json h;
  if (sc.hamiltonian.kind == HamiltonianBlock::Kind::Diagonal) {
    h["type"] = "diagonal";
    json ev = json::array();
    for (const auto& r : sc.hamiltonian.eigenvalues) ev.push_back(r.to_string());
    h["eigenvalues"] = ev;
    h["scale"] = sc.hamiltonian.scale;
  } else {
    h["type"] = "dense";
    json m = json::array();
    const CMatrix& a = sc.hamiltonian.matrix;
    for (Index r = 0; r < a.rows(); ++r)
      for (Index c = 0; c < a.cols(); ++c) m.push_back(detail::complex_json(a(r, c)));
    h["matrix"] = m;
  }
  root["hamiltonian"] = h;
  json st = json::array();
  for (Index i = 0; i < sc.state.size(); ++i) st.push_back(detail::complex_json(sc.state(i)));
  root["state"] = st;
  const auto& o = sc.options;
  root["options"] = {{"eps_support", o.eps_support},       {"max_denominator", o.max_denominator},
                     {"rat_tol", o.rat_tol},               {"deg_tol", o.deg_tol},
                     {"samples_per_period", o.samples_per_period}, {"fidelity_tol", o.fidelity_tol},
                     {"auto_normalize", o.auto_normalize}};
  return root.dump(2) + "\n";
}

/// Working-basis Hamiltonian matrix.
inline HermitianMatrix hamiltonian_matrix(const Scenario& sc) {
  const auto& hb = sc.hamiltonian;
  if (hb.kind == HamiltonianBlock::Kind::Dense) return HermitianMatrix(hb.matrix);
  const Index n = hb.dim();
  CMatrix m = CMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = hb.eigenvalues[static_cast<std::size_t>(i)].to_double() * hb.scale;
  return HermitianMatrix(m);
}

inline Spectrum build_spectrum(const Scenario& sc) {
  const auto& hb = sc.hamiltonian;
  if (hb.kind == HamiltonianBlock::Kind::Diagonal) return commensurate_structure(hb.eigenvalues, hb.scale, sc.hbar);
  StructureOptions opts;
  opts.max_denominator = sc.options.max_denominator;
  opts.rat_tol = sc.options.rat_tol;
  opts.hbar = sc.hbar;
  return spectrum_from_matrix(HermitianMatrix(hb.matrix), sc.options.deg_tol, opts);
}

}  // namespace geophase
