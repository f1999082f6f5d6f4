#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <limits>
#include <random>

#include "bridge_static.hpp"
#include "csv.hpp"
#include "error.hpp"
#include "experiments.hpp"

using namespace bb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("bb_test_experiments_" + name);
  fs::remove_all(p);
  return p;
}

Table tone_table(double pg, double pv, double ov, double nv) {
  Table t;
  t.columns = {"topology", "disturbed_rail", "rejection_db"};
  t.add_row({std::string("PMOS_FEEDBACK"), std::string("GND"), pg});
  t.add_row({std::string("PMOS_FEEDBACK"), std::string("VCC"), pv});
  t.add_row({std::string("OPEN_BRIDGE"), std::string("VCC"), ov});
  t.add_row({std::string("NMOS_FEEDBACK"), std::string("VCC"), nv});
  return t;
}

Table psrr_rows(const std::vector<double>& psrr) {
  Table t;
  t.columns = {"freq_hz", "psrr_db"};
  for (std::size_t i = 0; i < psrr.size(); ++i) t.add_row({1e3 * (i + 1), psrr[i]});
  return t;
}

Table table1_rows(double po, double pn, double pl, double no, double nn, double nl) {
  Table t;
  t.columns = {"architecture", "psrr_inv_db", "intrinsic_noise_v_rthz"};
  t.add_row({std::string("open_loop"), po, no});
  t.add_row({std::string("feedback_no_lna"), pn, nn});
  t.add_row({std::string("feedback_with_lna"), pl, nl});
  return t;
}

}  // namespace

TEST_CASE("csv: 12 significant digits, LF endings, header row") {
  Table t;
  t.columns = {"a", "b,c"};
  t.add_row({1.0 / 3.0, std::string("x\"y")});
  t.add_row({std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
  const auto text = to_csv(t);
  CHECK(text == "a,\"b,c\"\n0.333333333333,\"x\"\"y\"\ninf,-inf\n");
  CHECK(text.find('\r') == std::string::npos);
  CHECK(format_number(123456789012345.0) == "1.23456789012e+14");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK_THROWS_AS(t.add_row({1.0}), Error);
}

TEST_CASE("property: csv round trip keeps 12 digits") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> mant(-10.0, 10.0), ex(-30.0, 30.0);
  Table t;
  t.columns = {"x", "y"};
  for (int i = 0; i < 500; ++i) t.add_row({mant(rng) * std::pow(10.0, ex(rng)), mant(rng)});
  const Table back = parse_csv(to_csv(t));
  REQUIRE(back.rows.size() == t.rows.size());
  CHECK(back.columns == t.columns);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(back.number(i, "x") == doctest::Approx(t.number(i, "x")).epsilon(1e-11));
    CHECK(to_csv(back) == to_csv(t));
  }
}

TEST_CASE("json mirror") {
  Table t;
  t.columns = {"name", "v"};
  t.add_row({std::string("p"), 2.5});
  t.add_row({std::string("q"), std::numeric_limits<double>::infinity()});
  const auto j = nlohmann::json::parse(to_json(t));
  CHECK(j["columns"][1] == "v");
  CHECK(j["rows"][0][1] == 2.5);
  CHECK(j["rows"][1][1] == "inf");
}

TEST_CASE("table lookups") {
  const auto t = bridge_dc_table(BridgeParams::with_mismatch(1000.0, 13.4, 5.0));
  CHECK(t.number(0, "psrr_db") ==
        doctest::Approx(standalone_psrr_db(BridgeParams::with_mismatch(1000.0, 13.4, 5.0))));
  CHECK_THROWS_AS(t.number(0, "missing"), Error);
}

TEST_CASE("grid specs") {
  const auto g = parse_grid("1e3:1e5:log:9");
  REQUIRE(g.size() == 9);
  CHECK(g[0] == doctest::Approx(1e3));
  CHECK(g[4] == doctest::Approx(1e4));
  CHECK(g[8] == doctest::Approx(1e5));
  CHECK(parse_grid("0:10:lin:3") == std::vector<double>{0.0, 5.0, 10.0});
  CHECK(parse_grid("1,2.5,4") == std::vector<double>{1.0, 2.5, 4.0});
  CHECK(parse_grid("7") == std::vector<double>{7.0});
  CHECK_THROWS_AS(parse_grid("1e3:1e5:cubic:9"), Error);
  CHECK_THROWS_AS(parse_grid("1e3:1e5:log"), Error);
  CHECK_THROWS_AS(parse_grid("0:1e5:log:9"), Error);
  CHECK_THROWS_AS(parse_grid("a,b"), Error);
  CHECK_THROWS_AS(parse_grid("1:2:lin:2.5"), Error);
}

TEST_CASE("fig5 verdicts from the sweep table") {
  const Fig5Params p;
  const auto rows = gain_sweep(log_grid(p.dr_min, p.dr_max, p.points), p.gains, p.fixed);
  const auto v = fig5_verdicts(loop_sweep_table(rows));
  REQUIRE(v.size() == 2);
  CHECK(v[0].status == VerdictStatus::kPass);
  CHECK(v[1].status == VerdictStatus::kPass);

  // Gains a factor 3 apart still pass: the expected offset follows the ratio.
  const auto v3 = fig5_verdicts(loop_sweep_table(gain_sweep(log_grid(1, 10, 5), {1e3, 3e3}, p.fixed)));
  CHECK(v3[0].status == VerdictStatus::kPass);

  // Low loop gain bends the curves apart from the 20 dB law.
  LoopParams weak = p.fixed;
  weak.beta = 1.0;
  const auto vw = fig5_verdicts(loop_sweep_table(gain_sweep(log_grid(1, 10, 5), {1.0, 10.0}, weak)));
  CHECK(vw[0].status == VerdictStatus::kFail);

  const auto single = fig5_verdicts(loop_sweep_table(gain_sweep(log_grid(1, 10, 5), {1e3}, p.fixed)));
  CHECK(single[0].status == VerdictStatus::kNotApplicable);
  CHECK(single[1].status == VerdictStatus::kPass);
}

TEST_CASE("fig7 verdicts") {
  auto v = fig7_verdicts(tone_table(64.9, 19.6, 34.8, 64.9));
  for (const auto& x : v) CHECK(x.status == VerdictStatus::kPass);
  v = fig7_verdicts(tone_table(39.9, 40.0, 34.8, 64.9));
  CHECK(v[0].status == VerdictStatus::kFail);
  CHECK(v[1].status == VerdictStatus::kFail);
  Table partial;
  partial.columns = {"topology", "disturbed_rail", "rejection_db"};
  v = fig7_verdicts(partial);
  for (const auto& x : v) CHECK(x.status == VerdictStatus::kNotApplicable);
}

TEST_CASE("fig9 verdicts") {
  const std::vector<double> open(9, -8.6);
  CHECK(fig9_verdicts(psrr_rows(std::vector<double>(9, 12.0)), psrr_rows(open))[0].status ==
        VerdictStatus::kPass);
  auto comp = std::vector<double>(9, 25.0);
  comp[0] = 10.0;
  CHECK(fig9_verdicts(psrr_rows(comp), psrr_rows(open))[0].status == VerdictStatus::kFail);
  comp[0] = std::numeric_limits<double>::infinity();
  CHECK(fig9_verdicts(psrr_rows(comp), psrr_rows(open))[0].status == VerdictStatus::kPass);
  auto balanced = open;
  balanced[3] = std::numeric_limits<double>::infinity();
  CHECK(fig9_verdicts(psrr_rows(comp), psrr_rows(balanced))[0].status ==
        VerdictStatus::kNotApplicable);
  CHECK(fig9_verdicts(psrr_rows({1.0}), psrr_rows(open))[0].status ==
        VerdictStatus::kNotApplicable);
}

TEST_CASE("table1 verdicts") {
  auto v = table1_verdicts(table1_rows(-49.6, -72.8, -86.4, 140e-6, 346e-6, 142e-6));
  REQUIRE(v.size() == 4);
  for (const auto& x : v) CHECK(x.status == VerdictStatus::kPass);

  v = table1_verdicts(table1_rows(-49.6, -90.0, -86.4, 140e-6, 346e-6, 142e-6));
  CHECK(v[0].status == VerdictStatus::kFail);

  v = table1_verdicts(table1_rows(-50.0, -50.2, -50.4, 140e-6, 346e-6, 142e-6));
  CHECK(v[0].status == VerdictStatus::kNotApplicable);
  CHECK(v[1].status == VerdictStatus::kFail);

  v = table1_verdicts(table1_rows(-49.6, -72.8, -86.4, 140e-6, 346e-6, 160e-6));
  CHECK(v[2].status == VerdictStatus::kFail);
  v = table1_verdicts(table1_rows(-49.6, -72.8, -86.4, 140e-6, 141e-6, 142e-6));
  CHECK(v[3].status == VerdictStatus::kFail);
}

TEST_CASE("table1 architectures share the overall gain") {
  const auto arch = table1_architectures();
  REQUIRE(arch.size() == 3);
  for (const auto& a : arch) CHECK(check(a.config).empty());
}

TEST_CASE("run_fig5 writes recomputable outputs") {
  ExperimentOptions opt;
  opt.out_dir = scratch("fig5");
  opt.json = true;
  const auto r = run_experiment("fig5", opt);
  CHECK(r.id == "fig5");
  CHECK(r.passed());
  CHECK(fs::exists(opt.out_dir / "fig5.csv"));
  CHECK(fs::exists(opt.out_dir / "fig5.json"));
  CHECK(fs::exists(opt.out_dir / "fig5_verdicts.csv"));
  CHECK(fs::exists(opt.out_dir / "fig5_config.txt"));
  const auto t = parse_csv(read_text(opt.out_dir / "fig5.csv"));
  CHECK(t.rows.size() == 150);
  const auto again = fig5_verdicts(t);
  REQUIRE(again.size() == r.verdicts.size());
  for (std::size_t i = 0; i < again.size(); ++i) CHECK(again[i].status == r.verdicts[i].status);
}

TEST_CASE("run_table1 passes with the default architectures") {
  ExperimentOptions opt;
  opt.out_dir = scratch("table1");
  const auto r = run_table1(opt);
  CHECK(r.passed());
  const auto t = parse_csv(read_text(opt.out_dir / "table1.csv"));
  CHECK(t.rows.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) CHECK(t.number(i, "gain_db") == doctest::Approx(86.9).epsilon(0.005));
}

TEST_CASE("fig7 is byte-identical across runs with a fixed seed") {
  ExperimentOptions a, b;
  a.out_dir = scratch("fig7a");
  b.out_dir = scratch("fig7b");
  a.seed = b.seed = 99;
  const auto ra = run_fig7(a);
  const auto rb = run_fig7(b);
  CHECK(ra.passed());
  for (const char* f : {"fig7_timeseries.csv", "fig7_tones.csv", "fig7_verdicts.csv"})
    CHECK(read_text(a.out_dir / f) == read_text(b.out_dir / f));
}

TEST_CASE("fig7 needs a signal and a rail tone") {
  ExperimentOptions opt;
  opt.out_dir = scratch("fig7bad");
  SimConfig c = fig7_config();
  c.sources.pop_back();
  opt.config = c;
  CHECK_THROWS_AS(run_fig7(opt), Error);
}

TEST_CASE("unknown experiment") {
  CHECK_THROWS_AS(run_experiment("fig8", ExperimentOptions{}), Error);
}

TEST_CASE("loop parameters from a config") {
  const auto open = loop_params_from_config(default_config(Topology::kOpenBridge));
  CHECK(open.a_gain == 1000.0);
  CHECK(open.delta_r == doctest::Approx(13.4));
  const auto fb = loop_params_from_config(default_config(Topology::kPmosFeedback));
  CHECK(fb.loop_gain() == doctest::Approx(45.35).epsilon(0.01));
}
