// kscube: command-line front end. Exit codes: 0 pass, 1 verification failure
// or rejected input, 2 usage error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "kscube/kscube.hpp"

namespace {

using kscube::io::json;

struct Global {
  std::uint64_t seed = 20240611;
  int threads = 1;
  std::string format = "json";
  std::string out;
};

double parse_exponent(const std::string& s) {
  if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw kscube::DomainError("bad exponent '" + s + "'");
  return v;
}

kscube::PqParams pq_of(const std::string& p, const std::string& q) {
  kscube::PqParams params{parse_exponent(p), parse_exponent(q)};
  params.validate();
  return params;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw kscube::FormatError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw kscube::FormatError(path + ": " + e.what());
  }
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, std::string>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
  } else if (j.is_string()) {
    out.emplace_back(prefix, j.get<std::string>());
  } else {
    out.emplace_back(prefix, j.dump());
  }
}

std::string render(const json& j, const std::string& format) {
  const auto fmt = kscube::parse_format(format);
  if (fmt == kscube::ReportFormat::json) return j.dump(2) + "\n";
  std::vector<std::pair<std::string, std::string>> rows;
  flatten(j, "", rows);
  std::string s = fmt == kscube::ReportFormat::csv ? "key,value\n" : "| key | value |\n|---|---|\n";
  for (const auto& [k, v] : rows) {
    if (fmt == kscube::ReportFormat::csv) {
      std::string q = "\"";
      for (char c : v) q += c == '"' ? std::string("\"\"") : std::string(1, c);
      s += k + "," + q + "\"\n";
    } else {
      s += "| " + k + " | " + v + " |\n";
    }
  }
  return s;
}

void emit(const Global& g, const std::string& name, const std::string& text) {
  if (g.out.empty()) {
    std::cout << text;
    return;
  }
  std::filesystem::create_directories(g.out);
  const auto fmt = kscube::parse_format(g.format);
  const char* ext = fmt == kscube::ReportFormat::json ? ".json" : fmt == kscube::ReportFormat::csv ? ".csv" : ".md";
  const auto path = std::filesystem::path(g.out) / (name + ext);
  std::ofstream os(path);
  if (!os) throw kscube::FormatError("cannot write " + path.string());
  os << text;
  std::cerr << "wrote " << path.string() << "\n";
}

json stamp(json j, const Global& g) {
  json out{{"schema", kscube::io::kSchemaVersion}, {"seed", g.seed}, {"threads", g.threads}};
  for (auto& [k, v] : j.items()) out[k] = v;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kwapien-Schutt inequalities, cut-cone distortion and embeddings of matrix cubes"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--threads", g.threads, "worker threads")->check(CLI::Range(1, 256));
  app.add_option("--format", g.format, "json, csv or markdown")->check(CLI::IsMember({"json", "csv", "markdown", "md"}));
  app.add_option("--out", g.out, "output directory (default: stdout)");

  int code = 0;

  // ks ---------------------------------------------------------------------
  auto* ks = app.add_subcommand("ks", "KS inequality checks");
  ks->require_subcommand(1);
  struct {
    int n = 2;
    double theta = 1.0;
    std::string variant = "standard";
    std::string table;
    int d = 1;
    std::uint64_t samples = 0;
  } ksv;
  auto* ks_verify = ks->add_subcommand("verify", "evaluate both sides on a table (random unless --table)");
  ks_verify->add_option("--n", ksv.n, "matrix side")->required();
  ks_verify->add_option("--theta", ksv.theta, "exponent theta > 0");
  ks_verify->add_option("--variant", ksv.variant)->check(CLI::IsMember({"standard", "y", "permutation"}));
  ks_verify->add_option("--table", ksv.table, "function table JSON");
  ks_verify->add_option("--d", ksv.d, "value dimension of the random table")->check(CLI::Range(1, 64));
  ks_verify->add_option("--samples", ksv.samples, "Monte-Carlo samples for sides beyond the table cap");
  ks_verify->callback([&] {
    json out;
    if (ksv.samples > 0) {
      if (ksv.variant != "standard") throw kscube::DomainError("sampling supports the standard variant only");
      const int n = ksv.n;
      const int d = ksv.d;
      const std::uint64_t seed = g.seed;
      // Random function given by hashing the point index.
      auto oracle = [n, d, seed](const kscube::MatrixPoint& x) {
        std::vector<double> v(static_cast<std::size_t>(d));
        for (int i = 0; i < d; ++i) {
          std::uint64_t h = kscube::io::fnv1a(std::to_string(seed) + ":" + std::to_string(n) + ":" +
                                              std::to_string(x.index) + ":" + std::to_string(i));
          v[static_cast<std::size_t>(i)] = static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
        }
        return v;
      };
      const auto rep = kscube::ks_sides_sampled(oracle, n, ksv.theta, ksv.samples, g.seed, g.threads);
      out = kscube::io::to_json(rep);
      code = rep.verdict == kscube::SampledVerdict::violated ? 1 : 0;
    } else {
      const auto f = ksv.table.empty() ? kscube::random_table(ksv.n, ksv.d, g.seed)
                                       : kscube::io::table_from_json(read_json_file(ksv.table));
      kscube::KsReport rep;
      if (ksv.variant == "standard") rep = kscube::ks_sides(f, ksv.theta, g.threads);
      else if (ksv.variant == "y") rep = kscube::ks_y_variant_sides(f, ksv.theta, g.threads);
      else rep = kscube::permutation_variant_sides(f, ksv.theta, g.threads);
      out = kscube::io::to_json(rep);
      if (ksv.variant != "permutation" && !rep.holds) code = 1;
    }
    emit(g, "ks_verify", render(stamp(out, g), g.format));
  });

  struct {
    std::string kind = "phi";
    int n = 2;
    bool perms = false;
  } wit;
  auto* ks_witness = ks->add_subcommand("witness", "closed-form and tabulated sums for phi, psi and the odd witness");
  ks_witness->add_option("--kind", wit.kind)->check(CLI::IsMember({"phi", "psi", "odd"}));
  ks_witness->add_option("--n", wit.n)->required();
  ks_witness->add_flag("--permutations", wit.perms, "also enumerate flipping permutations");
  ks_witness->callback([&] {
    const auto w = wit.kind == "phi"   ? kscube::phi_character(wit.n)
                   : wit.kind == "psi" ? kscube::psi_character(wit.n)
                                       : kscube::odd_character(wit.n);
    const auto tot = kscube::character_totals(w, wit.perms);
    json out{{"kind", wit.kind},
             {"n", wit.n},
             {"row_total", tot.row_total.str()},
             {"selector_total", tot.selector_total.str()}};
    if (wit.perms) out["permutation_total"] = tot.permutation_total.str();
    if (wit.kind == "psi") {
      const auto by_first = kscube::psi_flipping_permutations_by_first_image(wit.n);
      out["permutation_total_by_first_image"] = (2 * kscube::ipow(kscube::BigInt(2), wit.n * wit.n) * by_first).str();
      if (wit.perms && 2 * kscube::ipow(kscube::BigInt(2), wit.n * wit.n) * by_first != tot.permutation_total) code = 1;
    }
    if (wit.n <= kscube::Caps::global().max_table_n) {
      const auto f = w.table();
      if (wit.kind == "odd") {
        out["tabulated"] = kscube::io::to_json(kscube::ks_y_variant_sides(f, 1.0, g.threads));
      } else {
        out["tabulated"] = kscube::io::to_json(kscube::ks_sides(f, 1.0, g.threads));
        if (wit.kind == "psi" && wit.perms) {
          out["tabulated_permutation"] = kscube::io::to_json(kscube::permutation_variant_sides(f, 1.0, g.threads));
        }
      }
    }
    emit(g, "ks_witness", render(stamp(out, g), g.format));
  });

  auto run_iso = [&] {
    const auto sweep = kscube::isoperimetric_exhaustive_n2();
    if (sweep.violations != 0 || !sweep.phi_level_set_is_equality) code = 1;
    emit(g, "isoperimetric", render(stamp(kscube::io::to_json(sweep), g), g.format));
  };
  ks->add_subcommand("isoperimetric", "exhaustive subset check on M_2(F_2)")->callback(run_iso);
  app.add_subcommand("isoperimetric", "exhaustive subset check on M_2(F_2)")->callback(run_iso);

  // lp ---------------------------------------------------------------------
  struct {
    std::string space;
    std::string pq;
    int cube = 0;
    double snowflake = 1.0;
    std::string mode = "distortion";
    std::size_t max_entries = 256;
  } lpv;
  auto* lp = app.add_subcommand("lp", "L1 embeddability and c1 distortion via the cut cone");
  lp->add_option("--space", lpv.space, "metric space JSON");
  lp->add_option("--pq", lpv.pq, "materialize l_q^n(F_2^n, ||.||_p) as n:p:q");
  lp->add_option("--cube", lpv.cube, "Hamming cube {0,1}^k");
  lp->add_option("--snowflake", lpv.snowflake, "raise distances to this power in (0,1]");
  lp->add_option("--mode", lpv.mode)->check(CLI::IsMember({"distortion", "embed"}));
  lp->add_option("--max-entries", lpv.max_entries, "witness entries kept in the output");
  lp->callback([&] {
    const int sources = !lpv.space.empty() + !lpv.pq.empty() + (lpv.cube > 0);
    if (sources != 1) throw CLI::ValidationError("lp", "exactly one of --space, --pq, --cube is required");
    std::optional<kscube::FiniteMetricSpace> space;
    if (!lpv.space.empty()) {
      space = kscube::io::space_from_json(read_json_file(lpv.space));
    } else if (!lpv.pq.empty()) {
      const auto parts = split(lpv.pq, ':');
      if (parts.size() != 3) throw CLI::ValidationError("--pq", "expected n:p:q");
      space = kscube::materialize_space(std::stoi(parts[0]), pq_of(parts[1], parts[2]));
    } else {
      space = kscube::hamming_cube_space(lpv.cube);
    }
    if (lpv.snowflake != 1.0) space = kscube::snowflake_space(*space, lpv.snowflake);
    json out;
    if (lpv.mode == "embed") {
      const auto r = kscube::l1_embeddable(*space);
      out = kscube::io::to_json(r);
    } else {
      out = kscube::io::to_json(kscube::c1_distortion(*space), lpv.max_entries);
    }
    out["space"] = {{"points", space->size()}, {"exact", space->exact()}, {"provenance", space->provenance()}};
    emit(g, "lp", render(stamp(out, g), g.format));
  });

  // bound ------------------------------------------------------------------
  struct {
    int n = 2;
    int m = 0;
    std::string p = "1", q = "2";
    double theta = 1.0;
    bool enumerate = false;
  } bv;
  auto* bound = app.add_subcommand("bound", "explicit lower and Hoelder upper bounds");
  bound->require_subcommand(1);
  auto* lower = bound->add_subcommand("lower", "Poincare lower bound from the KS pair");
  auto* upper = bound->add_subcommand("upper", "Hoelder sandwich upper bound");
  for (auto* sc : {lower, upper}) {
    sc->add_option("--n", bv.n)->required();
    sc->add_option("--p", bv.p);
    sc->add_option("--q", bv.q);
  }
  lower->add_option("--theta", bv.theta);
  lower->add_flag("--enumerate", bv.enumerate, "build the pair by enumeration (n <= 4) as a cross-check");
  upper->add_option("--m", bv.m, "number of rows (default n)");
  lower->callback([&] {
    const auto params = pq_of(bv.p, bv.q);
    const auto pair = kscube::ks_pair(bv.n, params, bv.theta);
    json out{{"pair", kscube::io::to_json(pair)}, {"lower_bound", kscube::poincare_lower_bound(pair)}};
    if (params.p < params.q) out["asymptotic_lower_bound"] = kscube::asymptotic_lower_bound(bv.n, params);
    if (bv.enumerate) {
      out["enumerated_lower_bound"] =
          kscube::poincare_lower_bound(kscube::ks_pair_enumerated(bv.n, params, bv.theta));
    }
    emit(g, "bound_lower", render(stamp(out, g), g.format));
  });
  upper->callback([&] {
    const auto h = kscube::holder_sandwich(bv.n, bv.m > 0 ? bv.m : bv.n, pq_of(bv.p, bv.q));
    if (h.validation.checked && !h.validation.holds) code = 1;
    emit(g, "bound_upper", render(stamp(kscube::io::to_json(h), g), g.format));
  });

  // embed ------------------------------------------------------------------
  struct {
    std::string points;
    int cube = 0;
    double beta = 0.5;
    int n = 2;
    double p = 4.0;
    std::size_t m = 50000;
    bool coords = false;
  } ev;
  auto* embed = app.add_subcommand("embed", "explicit embeddings");
  embed->require_subcommand(1);
  auto* schoen = embed->add_subcommand("schoenberg", "Hilbert embedding of (R^k, ||x-y||_2^beta)");
  schoen->add_option("--points,--input", ev.points, "JSON list of points");
  schoen->add_option("--cube", ev.cube, "use {0,1}^k");
  schoen->add_option("--beta", ev.beta)->check(CLI::Range(0.0, 1.0));
  schoen->add_flag("--coordinates", ev.coords, "include coordinates");
  schoen->callback([&] {
    std::vector<std::vector<double>> pts;
    if (!ev.points.empty()) {
      pts = kscube::io::points_from_json(read_json_file(ev.points));
    } else if (ev.cube > 0 && ev.cube <= 12) {
      for (int i = 0; i < (1 << ev.cube); ++i) {
        std::vector<double> x;
        for (int b = 0; b < ev.cube; ++b) x.push_back((i >> b) & 1);
        pts.push_back(std::move(x));
      }
    } else {
      throw CLI::ValidationError("schoenberg", "give --points or --cube k with 1 <= k <= 12");
    }
    const auto e = kscube::schoenberg_embed(pts, ev.beta);
    emit(g, "embed_schoenberg", render(stamp(kscube::io::to_json(e, ev.coords ? 100000 : 0), g), g.format));
  });
  auto* fp = embed->add_subcommand("fp", "finite-scale map of M_n(F_2) into L_p");
  fp->add_option("--n", ev.n)->required();
  fp->add_option("--p", ev.p);
  fp->add_option("--m", ev.m, "Gaussian coordinates");
  fp->add_flag("--coordinates", ev.coords, "include coordinates");
  fp->callback([&] {
    std::vector<kscube::MatrixPoint> pts;
    for (auto x : kscube::enumerate_points(ev.n)) pts.push_back(x);
    const auto e = kscube::fp_embed(pts, ev.p, ev.m, g.seed, g.threads, ev.coords);
    emit(g, "embed_fp", render(stamp(kscube::io::to_json(e, ev.coords ? 100000 : 0), g), g.format));
  });

  // obstruct ---------------------------------------------------------------
  struct {
    int n = 4;
    std::string preset = "coarse";
    double scale = 0.0;
    std::string p = "1", q = "2";
  } ov;
  auto* obstruct = app.add_subcommand("obstruct", "moduli constraints for uniform and coarse embeddings");
  obstruct->add_option("--n", ov.n)->required();
  obstruct->add_option("--preset", ov.preset)->check(CLI::IsMember({"coarse", "uniform"}));
  obstruct->add_option("--scale", ov.scale, "custom scale s > 0 (overrides --preset)");
  obstruct->add_option("--p", ov.p);
  obstruct->add_option("--q", ov.q);
  obstruct->callback([&] {
    const auto params = pq_of(ov.p, ov.q);
    const auto o = ov.scale > 0 ? kscube::coarse_obstruction(ov.n, ov.scale, params)
                   : ov.preset == "coarse" ? kscube::coarse_preset(ov.n, params)
                                           : kscube::uniform_preset(ov.n, params);
    emit(g, "obstruct", render(stamp(kscube::io::to_json(o), g), g.format));
  });

  // repro ------------------------------------------------------------------
  std::string only;
  double suite_scale = 1.0;
  auto* repro = app.add_subcommand("repro", "run the acceptance suite and report one row per criterion");
  repro->add_option("--only", only, "comma-separated criterion ids");
  repro->add_option("--suite-scale", suite_scale, "scale on random suite sizes")->check(CLI::Range(0.0, 1.0));
  repro->callback([&] {
    kscube::RunConfig cfg;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    cfg.out_dir = g.out;
    cfg.format = kscube::parse_format(g.format);
    cfg.suite_scale = suite_scale;
    const auto rep = kscube::run_repro(cfg, split(only, ','));
    for (const auto& r : rep.rows) {
      std::cerr << "criterion " << r.id << ": " << (r.pass ? "PASS" : "FAIL") << " (" << r.runtime_s << " s)"
                << (r.detail.empty() ? "" : " " + r.detail) << "\n";
    }
    emit(g, "repro", kscube::render_report(rep, cfg.format));
    if (!rep.all_pass()) code = 1;
  });

  // table ------------------------------------------------------------------
  std::string ns = "1,2,4,8,16", pqs = "1:2,1:4,2:4,1:1";
  bool no_lp = false;
  auto* table = app.add_subcommand("table", "distortion table: lower, upper and LP columns");
  table->add_option("--n", ns, "comma-separated sides");
  table->add_option("--pq", pqs, "comma-separated p:q pairs");
  table->add_flag("--no-lp", no_lp, "skip the LP column");
  table->callback([&] {
    std::vector<int> nlist;
    for (const auto& s : split(ns, ',')) nlist.push_back(std::stoi(s));
    std::vector<kscube::PqParams> plist;
    for (const auto& s : split(pqs, ',')) {
      const auto parts = split(s, ':');
      if (parts.size() != 2) throw CLI::ValidationError("--pq", "expected p:q");
      plist.push_back(pq_of(parts[0], parts[1]));
    }
    kscube::RunConfig cfg;
    cfg.seed = g.seed;
    cfg.threads = g.threads;
    const auto rows = kscube::distortion_table(nlist, plist, cfg, !no_lp);
    emit(g, "table", kscube::emit_distortion_table(rows, kscube::parse_format(g.format), cfg));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad number: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return code;
}
