#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "bridge_static.hpp"
#include "error.hpp"
#include "mos_triode.hpp"
#include "network.hpp"

using namespace bb;

TEST_CASE("triode resistance at the default bias") {
  const MosParams m;
  const auto p = rds(m, m.vgs_bias_abs);
  CHECK(p.in_triode);
  CHECK(p.rds == doctest::Approx(100.0));
  CHECK(p.drds_dvg == doctest::Approx(40.0));  // PMOS: raising the gate raises R
  CHECK(effective_beta(m, m.vgs_bias_abs) == doctest::Approx(40.0));

  MosParams n = m;
  n.polarity = Polarity::kNmos;
  CHECK(rds(n, n.vgs_bias_abs).drds_dvg == doctest::Approx(-40.0));
}

TEST_CASE("cutoff at and below threshold") {
  const MosParams m;
  CHECK_THROWS_AS(rds(m, m.vth_abs), CutoffError);
  CHECK_THROWS_AS(rds(m, 0.1), CutoffError);
  try {
    rds(m, 0.5);
  } catch (const CutoffError& e) {
    CHECK(e.code() == ErrorCode::kCutoff);
    CHECK(e.time_s() < 0.0);
  }
  const auto off = rds_unchecked(m, 0.5);
  CHECK_FALSE(off.in_triode);
  CHECK(std::isinf(off.rds));
}

TEST_CASE("oracle: slope matches a finite difference of the triode law") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> k(1e-4, 1e-1), vth(0.2, 1.0), ov(0.05, 3.0);
  for (int i = 0; i < 500; ++i) {
    MosParams m;
    m.kprime_wl = k(rng);
    m.vth_abs = vth(rng);
    const double vgs = m.vth_abs + ov(rng);
    const double h = 1e-6 * vgs;
    // PMOS: gate up by h means |Vgs| down by h.
    const double fd = (rds(m, vgs - h).rds - rds(m, vgs + h).rds) / (2.0 * h);
    CHECK(rds(m, vgs).drds_dvg == doctest::Approx(fd).epsilon(1e-6));
    CHECK(rds(m, vgs).rds == doctest::Approx(1.0 / (m.kprime_wl * (vgs - m.vth_abs))));
  }
}

TEST_CASE("network reduces to the bridge equation without devices") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> r(100.0, 1e4), v(1.0, 10.0);
  for (int i = 0; i < 300; ++i) {
    const BridgeParams b{r(rng), r(rng), r(rng), r(rng), 1000.0, v(rng)};
    for (bool top : {true, false}) {
      const auto n = network::resolve({b.vcc_dc, 0.0}, {b.r1, b.r2, b.r3, b.r4}, {}, top);
      CHECK(n.v_diff == doctest::Approx(bridge_output(b)).epsilon(1e-12));
      CHECK(n.v_diff == doctest::Approx(n.v_a - n.v_b).epsilon(1e-12));
    }
  }
}

TEST_CASE("oracle: device partials match finite differences") {
  const network::Rails rails{5.0, 0.0};
  const network::Arms arms{1013.4, 1000.0, 1000.0, 1000.0};
  for (bool top : {true, false}) {
    network::Devices d;
    if (top) {
      d.upper_a = 110.0;
      d.upper_b = 95.0;
    } else {
      d.lower_a = 110.0;
      d.lower_b = 95.0;
    }
    const auto n = network::resolve(rails, arms, d, top);
    const double h = 1e-4;
    auto shifted = [&](double da, double db) {
      auto e = d;
      (top ? e.upper_a : e.lower_a) += da;
      (top ? e.upper_b : e.lower_b) += db;
      return network::resolve(rails, arms, e, top).v_diff;
    };
    CHECK(n.dvdiff_drdev_a == doctest::Approx((shifted(h, 0) - shifted(-h, 0)) / (2 * h)).epsilon(1e-6));
    CHECK(n.dvdiff_drdev_b == doctest::Approx((shifted(0, h) - shifted(0, -h)) / (2 * h)).epsilon(1e-6));
  }
}

TEST_CASE("an open device floats its node to the opposite rail") {
  const double inf = std::numeric_limits<double>::infinity();
  network::Devices d;
  d.upper_a = inf;
  const auto n = network::resolve({5.0, 0.0}, {1000, 1000, 1000, 1000}, d, true);
  CHECK(n.v_a == doctest::Approx(0.0));
  CHECK(n.v_b == doctest::Approx(2.5));
}

TEST_CASE("gate drive references") {
  MosParams p;
  CHECK(network::gate_reference(p, 5.0) == doctest::Approx(1.8));
  const auto g = network::direct_drive(p, 5.0, {5.0, 0.0}, 0.2);
  CHECK(g.gate_a == doctest::Approx(1.7));
  CHECK(g.gate_b == doctest::Approx(1.9));
  CHECK(g.vgs_a == doctest::Approx(3.3));
  CHECK(g.vgs_b == doctest::Approx(3.1));

  MosParams n;
  n.polarity = Polarity::kNmos;
  CHECK(network::gate_reference(n, 5.0) == doctest::Approx(3.2));
  const auto gn = network::direct_drive(n, 5.0, {5.0, 0.0}, 0.2);
  CHECK(gn.vgs_a == doctest::Approx(3.1));
  CHECK(gn.vgs_b == doctest::Approx(3.3));
}
