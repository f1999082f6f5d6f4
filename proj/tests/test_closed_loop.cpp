#include <doctest.h>

#include <cmath>
#include <random>

#include "bridge_static.hpp"
#include "closed_loop.hpp"
#include "error.hpp"
#include "experiments.hpp"

using namespace bb;

namespace {

LoopParams random_loop(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> logl(1.0, 6.0), r(100.0, 1e4), rel(1e-5, 1e-2),
      vcc(1.0, 15.0), beta(10.0, 1e4);
  LoopParams p;
  p.r_nominal = r(rng);
  p.vcc = vcc(rng);
  p.beta = beta(rng);
  p.delta_r = rel(rng) * p.r_nominal;
  const double l = std::pow(10.0, logl(rng));
  p.a_gain = l * 2.0 * p.r_nominal / (p.beta * p.vcc);
  return p;
}

}  // namespace

TEST_CASE("closed form at the defaults") {
  LoopParams p;
  p.delta_r = 13.4;
  CHECK(p.loop_gain() == doctest::Approx(2500.0));
  CHECK(vs_closed_form(p) == doctest::Approx(13.4 * 2.5 / 2501.0));
  CHECK(signal_gain(p).asymptotic == doctest::Approx(1.0 / 1000.0));
  CHECK(signal_gain(p).exact == doctest::Approx(2.5 / 2501.0));
  CHECK(supply_gain(p).exact == doctest::Approx(1000.0 * 13.4 / (2000.0 * 2501.0 * 2501.0)));
  CHECK(supply_gain(p).asymptotic == doctest::Approx(2000.0 * 13.4 / (1000.0 * 1e6 * 25.0)));
}

TEST_CASE("balanced loop has no supply gain") {
  LoopParams p;
  p.delta_r = 0.0;
  CHECK(supply_gain(p).exact == 0.0);
  CHECK(std::isinf(psrr_inv_db(p).exact));
  CHECK(psrr_inv_db(p).exact < 0.0);
}

TEST_CASE("oracle: exact gains are the derivatives of the closed form") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 2000; ++i) {
    const LoopParams p = random_loop(rng);
    CAPTURE(p.loop_gain());
    const double hr = 1e-6 * p.delta_r;
    LoopParams a = p, b = p;
    a.delta_r += hr;
    b.delta_r -= hr;
    CHECK(signal_gain(p).exact ==
          doctest::Approx((vs_closed_form(a) - vs_closed_form(b)) / (2.0 * hr)).epsilon(1e-8));
    const double hv = 1e-6 * p.vcc;
    a = p;
    b = p;
    a.vcc += hv;
    b.vcc -= hv;
    CHECK(supply_gain(p).exact ==
          doctest::Approx((vs_closed_form(a) - vs_closed_form(b)) / (2.0 * hv)).epsilon(1e-8));
  }
}

TEST_CASE("property: asymptotes converge as 1/L") {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 2000; ++i) {
    const LoopParams p = random_loop(rng);
    const double l = p.loop_gain();
    const auto s = signal_gain(p);
    const auto v = supply_gain(p);
    CHECK(std::abs(s.exact / s.asymptotic - 1.0) <= 2.0 / l);
    CHECK(std::abs(v.exact / v.asymptotic - 1.0) <= 2.0 / l);
  }
}

TEST_CASE("property: inverse PSRR is 6 dB per doubling of mismatch") {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 200; ++i) {
    LoopParams p = random_loop(rng);
    const double y1 = psrr_inv_db(p).exact;
    p.delta_r *= 2.0;
    CHECK(psrr_inv_db(p).exact - y1 == doctest::Approx(20.0 * std::log10(2.0)).epsilon(1e-9));
  }
}

TEST_CASE("gain sweep rows and grid checks") {
  const auto grid = log_grid(0.1, 100.0, 4);
  REQUIRE(grid.size() == 4);
  CHECK(grid.front() == doctest::Approx(0.1));
  CHECK(grid.back() == doctest::Approx(100.0));
  const auto rows = gain_sweep(grid, {1e2, 1e3}, LoopParams{});
  REQUIRE(rows.size() == 8);
  for (const auto& r : rows) {
    LoopParams p;
    p.a_gain = r.gain;
    p.delta_r = r.delta_r;
    CHECK(r.psrr_inv_db_exact == doctest::Approx(psrr_inv_db(p).exact));
    CHECK(r.psrr_inv_db_open_loop ==
          doctest::Approx(-standalone_psrr_db(BridgeParams::with_mismatch(1000.0, r.delta_r, 5.0))));
  }
  CHECK_THROWS_AS(gain_sweep({1.0, 0.5}, {1e3}, LoopParams{}), Error);
  CHECK_THROWS_AS(gain_sweep({}, {1e3}, LoopParams{}), Error);
  CHECK_THROWS_AS(log_grid(0.0, 1.0, 3), Error);
}

TEST_CASE("validate_loop rejects non-physical parameters") {
  LoopParams p;
  p.a_gain = -1.0;
  CHECK_THROWS_AS(validate_loop(p), ValidationError);
  p = LoopParams{};
  p.r_nominal = 0.0;
  CHECK_THROWS_AS(validate_loop(p), ValidationError);
  CHECK_NOTHROW(validate_loop(LoopParams{}));
}

TEST_CASE("solve_dc at the default operating point") {
  const auto c = default_config(Topology::kPmosFeedback);
  const auto op = solve_dc(c.bridge, *c.mos, c.amp, c.topology);
  CHECK(std::abs(op.residual) <= 1e-12 * c.bridge.vcc_dc);
  CHECK(op.iterations <= 100);
  CHECK_FALSE(op.clamped);
  CHECK(op.v_s > 0.0);  // same sign as delta R
  // The R1 branch device drops resistance to rebalance.
  CHECK(op.r_fb() < 0.0);
  const auto lp = equivalent_loop(c.bridge, *c.mos, c.amp, c.topology);
  CHECK(op.v_s == doctest::Approx(vs_closed_form(lp)).epsilon(0.01));
}

TEST_CASE("solve_dc NMOS mirror image") {
  const auto c = default_config(Topology::kNmosFeedback);
  const auto op = solve_dc(c.bridge, *c.mos, c.amp, c.topology);
  CHECK(std::abs(op.residual) <= 1e-12 * c.bridge.vcc_dc);
  const auto lp = equivalent_loop(c.bridge, *c.mos, c.amp, c.topology);
  CHECK(op.v_s == doctest::Approx(vs_closed_form(lp)).epsilon(0.01));
}

TEST_CASE("property: solve_dc agrees with the closed form for small mismatch and L >= 100") {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> rel(-1e-3, 1e-3), logg(3.5, 6.0), vcc(2.0, 10.0);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    SimConfig c = default_config(i % 2 ? Topology::kNmosFeedback : Topology::kPmosFeedback);
    c.bridge = BridgeParams::with_mismatch(1000.0, rel(rng) * 1000.0, vcc(rng));
    c.mos->vgs_bias_abs = c.mos->vth_abs + 0.5 * c.bridge.vcc_dc;
    c.amp.gain_dc = std::pow(10.0, logg(rng));
    const auto lp = equivalent_loop(c.bridge, *c.mos, c.amp, c.topology);
    if (lp.loop_gain() < 100.0) continue;
    const auto op = solve_dc(c.bridge, *c.mos, c.amp, c.topology);
    CHECK(op.v_s == doctest::Approx(vs_closed_form(lp)).epsilon(0.01));
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("solve_dc clamps a saturated loop") {
  auto c = default_config(Topology::kPmosFeedback);
  c.amp.sat_v = 0.01;
  const auto op = solve_dc(c.bridge, *c.mos, c.amp, c.topology);
  CHECK(op.clamped);
  CHECK(op.v_s == doctest::Approx(0.01));
}

TEST_CASE("solve_dc error cases") {
  auto c = default_config(Topology::kPmosFeedback);

  SUBCASE("cutoff") {
    c.mos->vgs_bias_abs = 0.6;
    CHECK_THROWS_AS(solve_dc(c.bridge, *c.mos, c.amp, c.topology), CutoffError);
  }
  SUBCASE("positive feedback") {
    c.mos->kprime_wl = -4e-3;
    try {
      solve_dc(c.bridge, *c.mos, c.amp, c.topology);
      FAIL("expected POSITIVE_FEEDBACK");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kPositiveFeedback);
    }
  }
  SUBCASE("no convergence") {
    c.bridge.r1 = std::nan("");
    try {
      solve_dc(c.bridge, *c.mos, c.amp, c.topology);
      FAIL("expected NO_CONVERGENCE");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNoConvergence);
    }
  }
  SUBCASE("open topology") {
    CHECK_THROWS_AS(solve_dc(c.bridge, *c.mos, c.amp, Topology::kOpenBridge), Error);
  }
}

TEST_CASE("disabled feedback leaves the devices at bias") {
  auto c = default_config(Topology::kPmosFeedback);
  c.chain.feedback_enabled = false;
  const auto op = solve_dc(c.bridge, *c.mos, c.amp, c.topology, c.chain);
  CHECK(op.r_fb() == doctest::Approx(0.0));
}
