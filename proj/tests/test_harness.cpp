#include <catch_amalgamated.hpp>

#include <filesystem>
#include <set>

#include <martkit/harness/report.hpp>
#include <martkit/harness/suites.hpp>

using namespace martkit;

namespace {

CorpusConfig small_config() {
  CorpusConfig cfg;
  cfg.depths = {4, 6};
  cfg.samples = 4;
  cfg.seed = 11;
  return cfg;
}

VerificationRecord sample_record() {
  auto r = make_record("s", "anchor, with comma", "c", 1.5, 0.75, 2.0, 1e-9, 99, 6);
  r.ms = 0.25;
  return r;
}

}  // namespace

TEST_CASE("records follow the pass rule") {
  CHECK(make_record("s", "a", "c", 2.0, 1.0, 2.0, 0.0, 1, 1).pass);
  CHECK_FALSE(make_record("s", "a", "c", 2.1, 1.0, 2.0, 1e-9, 1, 1).pass);
  CHECK(make_record("s", "a", "c", 3.0, 1.0, std::nullopt, 0.0, 1, 1).pass);
  auto inf = make_record("s", "a", "c", 3.0, 0.0, std::nullopt, 0.0, 1, 1);
  CHECK(std::isinf(inf.ratio));
  CHECK_FALSE(inf.pass);
  CHECK(make_record("s", "a", "c", 0.0, 0.0, 1.0, 0.0, 1, 1).ratio == 0.0);
}

TEST_CASE("json report round-trips") {
  std::vector<VerificationRecord> recs{sample_record(), make_record("t", "b", "x", 1.0, 0.0, std::nullopt, 0, 3, 2)};
  recs[1].lhs = std::numeric_limits<double>::quiet_NaN();
  auto back = parse_report_json(report_json(recs));
  REQUIRE(back.size() == 2);
  CHECK(back[0] == recs[0]);
  CHECK(std::isnan(back[1].lhs));
  CHECK(std::isinf(back[1].ratio));
  CHECK_FALSE(back[1].claimed);
}

TEST_CASE("empty reports are valid") {
  std::vector<VerificationRecord> none;
  CHECK(parse_report_json(report_json(none)).empty());
  CHECK(report_csv(none) == "suite,anchor,lhs,rhs,ratio,claimed,pass,seed,ms\n");
  CHECK(report_markdown(none).find("0 records, 0 failed") != std::string::npos);
}

TEST_CASE("csv has the fixed columns and quotes fields") {
  auto csv = report_csv({sample_record()});
  auto nl = csv.find('\n');
  CHECK(csv.substr(0, nl) == "suite,anchor,lhs,rhs,ratio,claimed,pass,seed,ms");
  CHECK(csv.substr(nl + 1) == "s,\"anchor, with comma\",1.5,0.75,2,2,true,99,0.25\n");
}

TEST_CASE("report formats parse from names") {
  CHECK(report_format_from_string("md") == ReportFormat::markdown);
  CHECK(report_format_from_string("markdown-summary") == ReportFormat::markdown);
  CHECK(report_format_from_string("csv") == ReportFormat::csv);
  CHECK_THROWS_AS(report_format_from_string("xml"), std::invalid_argument);
}

TEST_CASE("writing to an unwritable path throws") {
  CHECK_THROWS(write_report({}, ReportFormat::json, "/nonexistent-dir/x/report.json"));
}

TEST_CASE("identical configs give byte-identical json") {
  auto cfg = small_config();
  for (std::string suite : {"product-identity", "maximal-atoms", "kq-transform"}) {
    auto a = report_json(run_suite(suite, cfg));
    auto b = report_json(run_suite(suite, cfg));
    CHECK(a == b);
  }
  auto other = cfg;
  other.seed = 12;
  CHECK(report_json(run_suite("product-identity", cfg)) != report_json(run_suite("product-identity", other)));
}

TEST_CASE("worker count does not change the records") {
  auto cfg = small_config();
  auto serial = run_suite("diagonal-bound", cfg);
  cfg.workers = 3;
  CHECK(run_suite("diagonal-bound", cfg) == serial);
}

TEST_CASE("records are ordered by suite then seed") {
  auto cfg = small_config();
  cfg.samples = 2;
  cfg.operators = {"transform"};
  auto recs = run_suites("all", cfg);
  REQUIRE_FALSE(recs.empty());
  for (std::size_t i = 1; i < recs.size(); ++i) {
    CHECK(recs[i - 1].suite <= recs[i].suite);
    if (recs[i - 1].suite == recs[i].suite) CHECK(recs[i - 1].seed <= recs[i].seed);
  }
  std::set<std::string> suites;
  for (auto& r : recs) suites.insert(r.suite);
  CHECK(suites.count("kq-transform"));
  CHECK_FALSE(suites.count("kq-maximal"));
}

TEST_CASE("a throwing sample is recorded and the rest still run") {
  Suite s;
  s.name = "flaky";
  s.anchor = "test";
  s.default_samples = 5;
  s.run = [](const SampleContext& c, RecordSink& out) {
    if (c.index == 2) throw std::runtime_error("boom");
    out.add("ok", 1.0, 1.0, 1.0);
  };
  auto cfg = small_config();
  cfg.samples.reset();
  auto recs = run_suite(s, cfg);
  REQUIRE(recs.size() == 10);
  std::size_t errors = 0;
  for (auto& r : recs)
    if (r.check == "error: boom") {
      ++errors;
      CHECK_FALSE(r.pass);
    } else {
      CHECK(r.pass);
    }
  CHECK(errors == 2);
  CHECK_FALSE(all_pass(recs));
}

TEST_CASE("unknown suites and bad configs are rejected") {
  CHECK_THROWS_AS(run_suite("no-such-suite", small_config()), std::invalid_argument);
  auto bad = [](const char* text) { return config_from_json(Json::parse(text)); };
  CHECK_THROWS_AS(bad(R"({"samples": 0})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"depths": [0]})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"tolerances": {"x": 1e-15}})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"operators": ["fourier"]})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"bmo_profiles": ["gaussian"]})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"seeds": 3})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"depths": "six"})"), std::invalid_argument);
  CHECK_THROWS_AS(bad(R"({"alpha": 1.0})"), std::invalid_argument);
  CHECK_THROWS_AS(bad("[]"), std::invalid_argument);
  auto cfg = small_config();
  cfg.suite_samples["maximal-atoms"] = 0;
  CHECK_THROWS_AS(run_suite("maximal-atoms", cfg), std::invalid_argument);
}

TEST_CASE("configs round-trip through json") {
  auto cfg = small_config();
  cfg.suite_samples["sandwich"] = 3;
  cfg.tolerances["support"] = 1e-12;
  cfg.builders = {"nondoubling", "uniform-dyadic"};
  cfg.bmo_profiles = {BmoProfile::log_spike};
  auto back = config_from_json(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK(back.samples_for("sandwich", 20) == 3);
  CHECK(back.samples_for("other", 20) == 4);
  CHECK(back.tolerance("support", 0.0) == 1e-12);
}

TEST_CASE("trees round-trip through json") {
  auto t = build_pk_filtration({2, 3, 2}, LeafMasses(12, 1.0 / 12), kDefaultMaxLeaves);
  auto back = tree_from_json(tree_to_json(*t));
  CHECK(back->branching() == t->branching());
  for (std::size_t j = 0; j < 12; ++j) CHECK(back->leaf_masses()[j] == Catch::Approx(t->leaf_masses()[j]));

  auto nd = tree_from_json(Json::parse(R"({"depth": 5, "measure": "nondoubling"})"));
  CHECK(nd->depth() == 5);
  CHECK(tree_to_json(*nd)["measure"] == "nondoubling");
  CHECK_THROWS_AS(tree_from_json(Json::parse(R"({"branching": [2, 1]})")), std::invalid_argument);
  CHECK_THROWS_AS(tree_from_json(Json::parse(R"({"depth": 2, "branching": [2]})")), std::invalid_argument);
  CHECK_THROWS_AS(tree_from_json(Json::parse(R"({"depth": 3, "measure": "lebesgue"})")), std::invalid_argument);
}

TEST_CASE("every registered suite runs cleanly on a tiny corpus") {
  CorpusConfig cfg;
  cfg.depths = {4};
  cfg.samples = 1;
  std::set<std::string> names;
  for (auto& s : suite_registry()) {
    CHECK(names.insert(s.name).second);
    CHECK_FALSE(s.anchor.empty());
    if (s.name == "hilbert-L2-norm" || s.name == "walsh-fwht" || s.name == "cesaro-means") continue;
    auto recs = run_suite(s, cfg);
    CHECK_FALSE(recs.empty());
    for (auto& r : recs) {
      INFO(s.name << " " << r.check << " ratio " << r.ratio);
      CHECK(r.check.rfind("error:", 0) == std::string::npos);
    }
  }
}

TEST_CASE("workers come from the environment") {
  ::setenv("MARTKIT_WORKERS", "3", 1);
  CHECK(workers_from_env() == 3);
  ::setenv("MARTKIT_WORKERS", "zero", 1);
  CHECK_THROWS_AS(workers_from_env(), std::invalid_argument);
  ::unsetenv("MARTKIT_WORKERS");
  CHECK(workers_from_env() == 1);
}
