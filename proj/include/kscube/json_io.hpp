#pragma once

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kscube/bounds.hpp"
#include "kscube/cut_cone.hpp"
#include "kscube/embeddings.hpp"
#include "kscube/errors.hpp"
#include "kscube/function_table.hpp"
#include "kscube/ks_inequality.hpp"
#include "kscube/matrix_point.hpp"
#include "kscube/metric_space.hpp"
#include "kscube/rational.hpp"

namespace kscube::io {

using json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "kscube/1";

/// 64-bit FNV-1a, used to fingerprint witnesses that are truncated on output.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Points and spaces

inline json to_json(const MatrixPoint& x) { return json{{"n", x.n}, {"index", x.index}}; }

inline MatrixPoint point_from_json(const json& j) {
  try {
    MatrixPoint x{j.at("n").get<int>(), j.at("index").get<std::uint64_t>()};
    check_side(x.n);
    if (x.n * x.n < 64 && x.index >= point_count(x.n)) throw FormatError("point index out of range");
    return x;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad MatrixPoint JSON: ") + e.what());
  }
}

inline json to_json(const FiniteMetricSpace& s) {
  const std::size_t n = s.size();
  json dist = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(s.dist(i, j));
    dist.push_back(std::move(row));
  }
  json out{{"schema", kSchemaVersion}, {"labels", s.labels()}, {"dist", std::move(dist)}, {"exact", s.exact()},
           {"provenance", s.provenance()}};
  if (s.exact()) {
    json ex = json::array();
    for (std::size_t i = 0; i < n; ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < n; ++j) row.push_back(to_string(s.exact_dist(i, j)));
      ex.push_back(std::move(row));
    }
    out["dist_exact"] = std::move(ex);
  }
  return out;
}

/// Accepts numeric entries, "a/b" strings, or an optional "dist_exact" block.
/// With "exact": true, numeric entries are read as exact binary fractions.
inline FiniteMetricSpace space_from_json(const json& j) {
  try {
    const auto& rows = j.at("dist");
    const std::size_t n = rows.size();
    std::vector<std::string> labels;
    if (j.contains("labels")) {
      for (const auto& l : j.at("labels")) labels.push_back(l.is_string() ? l.get<std::string>() : l.dump());
    } else {
      for (std::size_t i = 0; i < n; ++i) labels.push_back(std::to_string(i));
    }
    if (labels.size() != n) throw FormatError("labels and dist sizes differ");
    const bool exact = j.value("exact", false);
    const std::string prov = j.value("provenance", std::string("json"));
    const json& src = j.contains("dist_exact") ? j.at("dist_exact") : rows;
    bool any_string = false;
    for (const auto& r : src) {
      if (r.size() != n) throw FormatError("distance matrix is not square");
      for (const auto& v : r) any_string |= v.is_string();
    }
    if (exact || any_string) {
      std::vector<Rational> d;
      d.reserve(n * n);
      for (const auto& r : src)
        for (const auto& v : r) d.push_back(v.is_string() ? parse_rational(v.get<std::string>())
                                                         : rational_from_double(v.get<double>()));
      return FiniteMetricSpace::from_rationals(std::move(labels), std::move(d), prov);
    }
    std::vector<double> d;
    d.reserve(n * n);
    for (const auto& r : src)
      for (const auto& v : r) d.push_back(v.get<double>());
    return FiniteMetricSpace::from_floats(std::move(labels), std::move(d), prov);
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad metric space JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Tables

inline json to_json(const FunctionTable& f, std::size_t max_points = 4096) {
  if (f.points() > max_points) throw SizeLimitError("table too large for JSON; use the binary format");
  json values = json::array();
  for (std::uint64_t x = 0; x < f.points(); ++x) {
    auto v = f.at(x);
    values.push_back(std::vector<double>(v.begin(), v.end()));
  }
  return json{{"schema", kSchemaVersion}, {"n", f.n()}, {"d", f.d()}, {"values", std::move(values)}};
}

inline FunctionTable table_from_json(const json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int d = j.value("d", 1);
    std::vector<double> flat;
    for (const auto& v : j.at("values")) {
      if (v.is_array()) {
        if (static_cast<int>(v.size()) != d) throw FormatError("value dimension differs from d");
        for (const auto& c : v) flat.push_back(c.get<double>());
      } else {
        flat.push_back(v.get<double>());
      }
    }
    return FunctionTable(n, d, std::move(flat));
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad table JSON: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Reports

inline json to_json(const KsReport& r) {
  json out{{"schema", kSchemaVersion},
           {"variant", to_string(r.variant)},
           {"n", r.n},
           {"theta", r.theta},
           {"lhs", r.lhs},
           {"rhs", r.rhs},
           {"constant", to_string(r.constant)},
           {"constant_value", to_double(r.constant)},
           {"constant_source", r.constant_source},
           {"holds", r.holds},
           {"slack", r.slack},
           {"exact", r.exact}};
  if (r.lhs_exact) out["lhs_exact"] = to_string(*r.lhs_exact);
  if (r.rhs_exact) out["rhs_exact"] = to_string(*r.rhs_exact);
  return out;
}

inline json to_json(const SampledKsReport& r) {
  return json{{"schema", kSchemaVersion}, {"variant", "standard (sampled)"}, {"n", r.n}, {"theta", r.theta},
              {"samples", r.samples}, {"seed", r.seed}, {"lhs", r.lhs}, {"lhs_se", r.lhs_se},
              {"rhs", r.rhs}, {"rhs_se", r.rhs_se}, {"constant", r.constant}, {"verdict", to_string(r.verdict)}};
}

inline json to_json(const CountingBoundReport& r, std::size_t max_listed = 64) {
  json zs = json::array();
  for (std::size_t i = 0; i < r.zero_slack.size() && i < max_listed; ++i) zs.push_back(r.zero_slack[i]);
  return json{{"schema", kSchemaVersion}, {"n", r.n}, {"holds", r.holds}, {"checked", r.checked},
              {"min_slack", to_string(r.min_slack)}, {"argmin", r.argmin},
              {"zero_slack_count", r.zero_slack_count}, {"zero_slack_listed", std::move(zs)}};
}

inline json to_json(const IsoperimetricSweep& s) {
  json eq = json::array();
  for (auto m : s.equality_cases) eq.push_back(m);
  return json{{"schema", kSchemaVersion}, {"subsets", s.subsets}, {"violations", s.violations},
              {"equality_count", s.equality_cases.size()}, {"equality_cases", std::move(eq)},
              {"phi_level_set", s.phi_level_set}, {"phi_level_set_is_equality", s.phi_level_set_is_equality}};
}

// ---------------------------------------------------------------------------
// Cut-cone witnesses

inline json weights_json(const CutCombination& c) {
  json arr = json::array();
  for (const auto& w : c.weights) {
    json e{{"subset", w.cut.subset}, {"weight", w.weight}};
    if (w.exact) e["weight_exact"] = to_string(*w.exact);
    arr.push_back(std::move(e));
  }
  return arr;
}

/// Emits at most `max_entries` items of each witness vector. When anything is
/// cut, "truncated" is set and "witness_hash" fingerprints the full witness.
inline json to_json(const DistortionCertificate& c, std::size_t max_entries = 256) {
  json full_w = weights_json(c.primal);
  json full_a = c.dual_expand;
  json full_b = c.dual_contract;
  json out{{"schema", kSchemaVersion},
           {"space_id", c.space_id},
           {"points", c.points},
           {"lower", c.lower},
           {"lower_provenance", c.lower_provenance},
           {"upper", c.upper},
           {"upper_provenance", c.upper_provenance},
           {"exact", c.exact},
           {"cut_constant", c.cut_constant},
           {"duality_gap", c.duality_gap},
           {"iterations", c.iterations}};
  if (c.exact_value) out["exact_value"] = to_string(*c.exact_value);
  const bool truncate = full_w.size() > max_entries || full_a.size() > max_entries;
  auto head = [&](const json& arr) {
    json h = json::array();
    for (std::size_t i = 0; i < arr.size() && i < max_entries; ++i) h.push_back(arr[i]);
    return h;
  };
  out["primal_weights"] = truncate ? head(full_w) : full_w;
  out["dual_expand"] = truncate ? head(full_a) : full_a;
  out["dual_contract"] = truncate ? head(full_b) : full_b;
  if (c.dual_expand_exact) {
    json ea = json::array(), eb = json::array();
    for (const auto& v : *c.dual_expand_exact) ea.push_back(to_string(v));
    for (const auto& v : *c.dual_contract_exact) eb.push_back(to_string(v));
    out["dual_expand_exact"] = truncate ? head(ea) : ea;
    out["dual_contract_exact"] = truncate ? head(eb) : eb;
  }
  out["truncated"] = truncate;
  if (truncate) {
    const json whole{{"primal_weights", full_w}, {"dual_expand", full_a}, {"dual_contract", full_b}};
    out["witness_hash"] = "fnv1a64:" + hex64(fnv1a(whole.dump()));
    out["witness_sizes"] = json{{"primal_weights", full_w.size()}, {"dual", full_a.size()}};
  }
  return out;
}

inline json to_json(const L1EmbeddingResult& r) {
  json out{{"schema", kSchemaVersion}, {"feasible", r.feasible}, {"exact", r.exact},
           {"max_residual", r.max_residual}, {"iterations", r.iterations}};
  if (r.feasible) {
    out["combination"] = weights_json(r.combination);
  } else {
    out["separator"] = r.separator;
    if (r.separator_exact) {
      json ex = json::array();
      for (const auto& v : *r.separator_exact) ex.push_back(to_string(v));
      out["separator_exact"] = std::move(ex);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bounds and embeddings

inline json to_json(const PoincarePair& p) {
  auto masses = [](const std::vector<PairMass>& v) {
    json arr = json::array();
    for (const auto& m : v) {
      json e{{"distance", m.distance}, {"weight", m.weight}};
      if (m.points) e["points"] = json::array({m.points->first, m.points->second});
      arr.push_back(std::move(e));
    }
    return arr;
  };
  return json{{"schema", kSchemaVersion}, {"space_id", p.space_id}, {"theta", p.theta},
              {"constant", p.constant}, {"constant_source", p.constant_source},
              {"expand", masses(p.expand)}, {"contract", masses(p.contract)}};
}

inline json to_json(const ModulusObstruction& o) {
  return json{{"schema", kSchemaVersion}, {"n", o.n}, {"scale", o.scale}, {"preset", o.preset},
              {"lower_arg", o.lower_arg}, {"upper_arg", o.upper_arg},
              {"constant", to_string(o.constant_exact)}, {"constant_value", o.constant},
              {"statement", "alpha(" + std::to_string(o.lower_arg) + ") <= " + std::to_string(o.constant) +
                                " * beta(" + std::to_string(o.upper_arg) + ")"}};
}

inline json to_json(const HolderSandwich& h) {
  json out{{"schema", kSchemaVersion}, {"rows", h.rows}, {"cols", h.cols}, {"lower_factor", h.lower_factor},
           {"upper_factor", h.upper_factor}, {"c1_upper_bound", h.c1_upper_bound}};
  if (h.validation.checked) {
    out["validation"] = json{{"holds", h.validation.holds}, {"differences", h.validation.differences},
                             {"min_lower_ratio", h.validation.min_lower_ratio},
                             {"max_upper_ratio", h.validation.max_upper_ratio}};
  }
  return out;
}

inline json to_json(const PAboveTwoReport& r) {
  json out{{"schema", kSchemaVersion}, {"n", r.n}, {"p", r.p}, {"theta", r.theta}, {"lhs", r.lhs},
           {"rhs", r.rhs}, {"ratio", r.ratio}, {"predicted_ratio", r.predicted_ratio},
           {"row_terms", r.row_terms}, {"selector_terms", r.selector_terms}};
  if (r.ratio_pow) out["ratio_pow_p"] = to_string(*r.ratio_pow);
  return out;
}

inline json to_json(const EmbeddingResult& e, std::size_t max_coordinates = 100000) {
  auto matrix = [&](const std::vector<double>& flat) {
    json m = json::array();
    for (std::size_t i = 0; i < e.points; ++i)
      m.push_back(std::vector<double>(flat.begin() + static_cast<std::ptrdiff_t>(i * e.points),
                                      flat.begin() + static_cast<std::ptrdiff_t>((i + 1) * e.points)));
    return m;
  };
  json out{{"schema", kSchemaVersion}, {"target_norm", e.target_norm}, {"target_p", e.target_p},
           {"points", e.points}, {"max_rel_error", e.max_rel_error}, {"min_eigenvalue", e.min_eigenvalue},
           {"gram_trace", e.gram_trace}, {"rank", e.rank}, {"samples", e.samples}, {"seed", e.seed},
           {"achieved", matrix(e.achieved)}, {"intended", matrix(e.intended)}};
  std::size_t total = 0;
  for (const auto& c : e.coordinates) total += c.size();
  if (total <= max_coordinates) {
    out["coordinates"] = e.coordinates;
  } else {
    out["coordinates_omitted"] = true;
    out["coordinate_count"] = total;
  }
  return out;
}

/// Reads {"points": [[...], ...]} for the Euclidean embedding commands.
inline std::vector<std::vector<double>> points_from_json(const json& j) {
  try {
    const json& arr = j.is_array() ? j : j.at("points");
    std::vector<std::vector<double>> pts;
    for (const auto& p : arr) pts.push_back(p.get<std::vector<double>>());
    return pts;
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad point list JSON: ") + e.what());
  }
}

}  // namespace kscube::io
