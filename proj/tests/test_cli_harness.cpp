#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "kscube/kscube.hpp"

using namespace kscube;

namespace {

const std::vector<std::string> kQuick{"1", "2", "4", "9", "11"};

io::json read_sample(const std::string& name) {
  std::ifstream in(std::string(KSCUBE_SAMPLES_DIR) + "/" + name);
  return io::json::parse(in);
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST(Config, FormatsAndHash) {
  EXPECT_EQ(parse_format("json"), ReportFormat::json);
  EXPECT_EQ(parse_format("md"), ReportFormat::markdown);
  EXPECT_THROW(parse_format("xml"), DomainError);
  RunConfig a, b;
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  b.seed = 7;
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(a.to_json().at("seed"), 20240611u);
}

TEST(Repro, QuickCriteriaPassInOrder) {
  RunConfig cfg;
  const auto rep = run_repro(cfg, kQuick);
  ASSERT_EQ(rep.rows.size(), kQuick.size());
  for (std::size_t i = 0; i < kQuick.size(); ++i) {
    const auto& r = rep.rows[i];
    EXPECT_EQ(r.id, kQuick[i]);
    EXPECT_TRUE(r.pass) << r.id << " " << r.detail;
    EXPECT_FALSE(r.claim.empty());
    EXPECT_EQ(r.values.at("config_hash"), cfg.hash());
  }
  EXPECT_TRUE(rep.all_pass());
  EXPECT_EQ(rep.seed, cfg.seed);
}

TEST(Repro, SeedChangeKeepsVerdicts) {
  RunConfig a, b;
  b.seed = 99;
  const auto ra = run_repro(a, kQuick), rb = run_repro(b, kQuick);
  for (std::size_t i = 0; i < ra.rows.size(); ++i) EXPECT_EQ(ra.rows[i].pass, rb.rows[i].pass);
  EXPECT_NE(ra.config_hash, rb.config_hash);
}

TEST(Repro, CapViolationBecomesFailingRow) {
  RunConfig cfg;
  cfg.caps.max_lp_points = 4;
  ReproRow row;
  ASSERT_NO_THROW(row = run_criterion("8", cfg));
  EXPECT_FALSE(row.pass);
  EXPECT_NE(row.detail.find("error"), std::string::npos);
  EXPECT_THROW(run_criterion("12", cfg), DomainError);
}

TEST(Report, RenderedFormats) {
  RunConfig cfg;
  const auto rep = run_repro(cfg, {"1", "9"});
  const auto csv = lines(render_report(rep, ReportFormat::csv));
  ASSERT_EQ(csv.size(), 3u);
  EXPECT_EQ(csv[0], "id,pass,runtime_s,budget_s,claim,values,detail");
  EXPECT_EQ(csv[1].substr(0, 7), "1,pass,");

  const auto doc = io::json::parse(render_report(rep, ReportFormat::json));
  EXPECT_EQ(doc.at("schema"), io::kSchemaVersion);
  EXPECT_EQ(doc.at("seed"), cfg.seed);
  EXPECT_EQ(doc.at("rows").size(), 2u);
  EXPECT_TRUE(doc.at("all_pass").get<bool>());

  const auto md = render_report(rep, ReportFormat::markdown);
  EXPECT_NE(md.find("| 9 | PASS |"), std::string::npos);
  EXPECT_NE(md.find(cfg.hash()), std::string::npos);
}

TEST(Table, RowsWithoutLp) {
  RunConfig cfg;
  const auto rows = distortion_table({1, 4, 16}, {{1, 2}, {2, 2}}, cfg, false);
  ASSERT_EQ(rows.size(), 6u);
  const auto& r4 = rows[1];
  EXPECT_EQ(r4.n, 4);
  EXPECT_DOUBLE_EQ(r4.lower, 15.0 / 16.0);
  EXPECT_DOUBLE_EQ(r4.upper, 2.0);
  EXPECT_TRUE(r4.lower_vacuous);
  EXPECT_FALSE(r4.lp_value.has_value());
  EXPECT_FALSE(rows[2].lower_vacuous);  // n = 16: about 1.764
  for (std::size_t i = 3; i < 6; ++i) {
    EXPECT_TRUE(rows[i].lower_vacuous);
    EXPECT_LE(rows[i].lower, 1.0);
    EXPECT_FALSE(rows[i].note.empty());
  }
  for (const auto& r : rows) {
    EXPECT_NEAR(r.log_cardinality_root, std::pow(r.n * r.n * std::log(2.0), 0.25), 1e-15);
    EXPECT_LE(r.lower, r.upper);
  }
}

TEST(Table, SmallestCaseCarriesLpValue) {
  RunConfig cfg;
  const auto rows = distortion_table({2}, {{1, 2}}, cfg, true);
  ASSERT_EQ(rows.size(), 1u);
  ASSERT_TRUE(rows[0].lp_value.has_value());
  EXPECT_NEAR(*rows[0].lp_value, (1 + std::sqrt(2.0)) / 2, 1e-7);
  EXPECT_LE(rows[0].lower, *rows[0].lp_value);
  EXPECT_LE(*rows[0].lp_value, rows[0].upper + 1e-9);
}

TEST(Table, EmittedFormatsCarryProvenance) {
  RunConfig cfg;
  const auto rows = distortion_table({4}, {{1, 2}, {2, 2}}, cfg, false);
  const auto doc = io::json::parse(emit_distortion_table(rows, ReportFormat::json, cfg));
  ASSERT_EQ(doc.at("rows").size(), 2u);
  for (const auto& r : doc.at("rows")) {
    EXPECT_EQ(r.at("provenance").at("config_hash"), cfg.hash());
    EXPECT_EQ(r.at("provenance").at("lower"), "bounds/asymptotic_lower_bound");
  }
  EXPECT_EQ(doc.at("seed"), cfg.seed);
  const auto csv = lines(emit_distortion_table(rows, ReportFormat::csv, cfg));
  EXPECT_EQ(csv[0], "n,p,q,lower,lower_vacuous,upper,lp_value,lp_gap,log_cardinality_root,config_hash");
  EXPECT_EQ(csv.size(), 3u);
  const auto md = emit_distortion_table(rows, ReportFormat::markdown, cfg);
  EXPECT_NE(md.find("(vacuous)"), std::string::npos);
}

TEST(Json, SpaceRoundTrips) {
  const auto h = hamming_cube_space(2);
  const auto back = io::space_from_json(io::to_json(h));
  ASSERT_TRUE(back.exact());
  for (std::size_t a = 0; a < 4; ++a)
    for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(back.exact_dist(a, b), h.exact_dist(a, b));

  const auto l = materialize_space(1, {1, 2});
  EXPECT_EQ(io::space_from_json(io::to_json(snowflake_space(hamming_cube_space(2), 0.5))).matrix(),
            snowflake_space(hamming_cube_space(2), 0.5).matrix());
  EXPECT_EQ(io::space_from_json(io::to_json(l)).size(), 2u);

  EXPECT_THROW(io::space_from_json(io::json{{"dist", {{0, 1}}}}), FormatError);
  EXPECT_THROW(io::space_from_json(io::json::parse(R"({"dist": [[0, "x"], ["x", 0]]})")), std::exception);
}

TEST(Json, SampleSpaceAndTable) {
  const auto k23 = io::space_from_json(read_sample("k23.json"));
  EXPECT_EQ(k23.size(), 5u);
  EXPECT_TRUE(k23.exact());
  EXPECT_EQ(*c1_distortion(k23).exact_value, Rational(4, 3));

  const auto phi = io::table_from_json(read_sample("phi2_table.json"));
  EXPECT_EQ(phi.values(), witness_phi(2).values());

  const auto pts = io::points_from_json(read_sample("cube3_points.json"));
  EXPECT_EQ(pts.size(), 8u);
  EXPECT_LE(schoenberg_embed(pts, 0.5).max_rel_error, 1e-8);
}

TEST(Json, TableAndPointRoundTrips) {
  const auto f = random_table(2, 2, 4);
  const auto g = io::table_from_json(io::to_json(f));
  EXPECT_EQ(g.values(), f.values());
  EXPECT_THROW(io::to_json(random_table(3, 1, 1), 16), SizeLimitError);
  EXPECT_THROW(io::table_from_json(io::json{{"n", 2}, {"d", 2}, {"values", {{1, 2, 3}}}}), FormatError);

  const MatrixPoint x{3, 300};
  EXPECT_EQ(io::point_from_json(io::to_json(x)).index, 300u);
  EXPECT_THROW(io::point_from_json(io::json{{"n", 2}, {"index", 16}}), FormatError);
}

TEST(Json, ReportsRecordSchema) {
  const auto r = ks_sides(witness_phi(2), 1.0);
  const auto j = io::to_json(r);
  EXPECT_EQ(j.at("schema"), io::kSchemaVersion);
  EXPECT_TRUE(j.at("holds").get<bool>());
  const auto s = io::to_json(schoenberg_embed({{0.0}, {1.0}}, 1.0));
  EXPECT_EQ(s.at("target_norm"), "l2");
}
