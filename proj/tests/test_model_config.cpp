#include <doctest.h>

#include <algorithm>
#include <random>
#include <string>

#include "error.hpp"
#include "experiments.hpp"
#include "model_config.hpp"

using namespace bb;

namespace {

bool contains(const std::vector<std::string>& v, const std::string& needle) {
  return std::any_of(v.begin(), v.end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::string parse_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParse);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults validate for every topology") {
  for (auto t : {Topology::kOpenBridge, Topology::kPmosFeedback, Topology::kNmosFeedback,
                 Topology::kRcCompensated}) {
    CAPTURE(to_string(t));
    CHECK(check(default_config(t)).empty());
  }
  CHECK(check(fig7_config()).empty());
  CHECK(check(fig9_config()).empty());
}

TEST_CASE("mismatch convention puts delta R on R1") {
  const auto b = BridgeParams::with_mismatch(1000.0, 13.4, 5.0);
  CHECK(b.r1 == doctest::Approx(1013.4));
  CHECK(b.r2 == 1000.0);
  CHECK(b.r3 == 1000.0);
  CHECK(b.r4 == 1000.0);
  CHECK(b.delta_r() == doctest::Approx(13.4));
}

TEST_CASE("validation reports every violation at once") {
  SimConfig c = default_config(Topology::kPmosFeedback);
  c.bridge.r2 = -1.0;
  c.bridge.r3 = 0.0;
  c.mos->polarity = Polarity::kNmos;
  c.sources.push_back({SourceKind::kTone, SourceTarget::kVcc, 0.01, 0.0, {}});
  c.sources.push_back({SourceKind::kWhiteNoise, SourceTarget::kVcc, 1e-6, 0.0, {}});
  const auto v = check(c);
  CHECK(contains(v, "r2 > 0"));
  CHECK(contains(v, "r3 > 0"));
  CHECK(contains(v, "mos.polarity = PMOS"));
  CHECK(contains(v, "frequency > 0 for TONE"));
  CHECK(contains(v, "seed set for WHITE_NOISE"));
  CHECK(v.size() == 5);

  try {
    validate(c);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.code() == ErrorCode::kValidationFailed);
    CHECK(e.violations() == v);
  }
}

TEST_CASE("sampling rules") {
  SimConfig c = default_config(Topology::kOpenBridge);
  c.sources = {{SourceKind::kTone, SourceTarget::kVcc, 0.01, 9e3, {}}};
  c.sample_rate = 400e3;
  c.duration = 0.01;
  CHECK(contains(check(c), "sample_rate >= 50 x max source frequency (needs >= 450000 Hz)"));

  c = default_config(Topology::kOpenBridge);
  c.duration = 0.0100005;
  CHECK(contains(check(c), "duration x sample_rate is an integer"));

  c = default_config(Topology::kOpenBridge);
  c.duration = 1e-3;
  CHECK(contains(check(c), ">= 1024 samples"));

  c = default_config(Topology::kRcCompensated);
  c.rc->c_filter = 1e-15;
  CHECK(contains(check(c), "rc corner <= sample_rate/20"));

  c = default_config(Topology::kOpenBridge);
  c.amp.pole_hz = 60e3;
  CHECK(contains(check(c), "amp.pole_hz <= sample_rate/20"));
}

TEST_CASE("feedback topologies need their sections") {
  SimConfig c = default_config(Topology::kRcCompensated);
  c.mos.reset();
  c.rc.reset();
  const auto v = check(c);
  CHECK(contains(v, "mos section required"));
  CHECK(contains(v, "rc section required"));
}

TEST_CASE("mechanical source needs a sensor and targets delta R") {
  SimConfig c = default_config(Topology::kOpenBridge);
  c.sources = {{SourceKind::kMechResonator, SourceTarget::kVcc, 1.0, 1e3, {}}};
  const auto v = check(c);
  CHECK(contains(v, "requires a sensor section"));
  CHECK(contains(v, "targets DELTA_R"));
}

TEST_CASE("validate is idempotent") {
  const SimConfig c = fig7_config();
  CHECK(validate(validate(c)) == c);
}

TEST_CASE("parse a full config") {
  const auto c = parse_config(R"(
# comment
[sim]
topology = RC_COMPENSATED
sample_rate = 5e6   ; trailing comment
duration = 0.04

[bridge]
r_nominal = 1000
delta_r = 13.4
vcc_dc = 5

[rc]
r_filter = 1e5
c_filter = 1e-9

[source]
kind = TONE
target = VCC
amplitude = 1e-3
frequency = 1000

[source]
kind = WHITE_NOISE
target = GND
amplitude = 1e-6
seed = 42
)");
  CHECK(c.topology == Topology::kRcCompensated);
  CHECK(c.sample_rate == 5e6);
  CHECK(c.bridge.r1 == doctest::Approx(1013.4));
  CHECK(c.bridge.r2 == 1000.0);
  REQUIRE(c.rc.has_value());
  CHECK(c.rc->c_filter == 1e-9);
  REQUIRE(c.mos.has_value());
  CHECK(c.mos->polarity == Polarity::kPmos);
  REQUIRE(c.sources.size() == 2);
  CHECK(c.sources[1].kind == SourceKind::kWhiteNoise);
  CHECK(c.sources[1].target == SourceTarget::kGnd);
  CHECK(c.sources[1].seed == 42u);
  CHECK(check(c).empty());
}

TEST_CASE("NMOS topology gets an NMOS default device") {
  const auto c = parse_config("[sim]\ntopology = NMOS_FEEDBACK\n");
  REQUIRE(c.mos.has_value());
  CHECK(c.mos->polarity == Polarity::kNmos);
}

TEST_CASE("parse errors carry the line number") {
  CHECK(parse_error("[sim]\nbogus = 1\n").find("line 2") != std::string::npos);
  CHECK(parse_error("[sim]\nbogus = 1\n").find("unknown key 'bogus'") != std::string::npos);
  CHECK(parse_error("\n\n[nope]\n").find("line 3") != std::string::npos);
  CHECK(parse_error("[bridge]\nr1 = abc\n").find("line 2: expected a number") !=
        std::string::npos);
  CHECK(parse_error("[bridge]\nr1 = 1\nr1 = 2\n").find("line 3: duplicate key") !=
        std::string::npos);
  CHECK(parse_error("[sim]\ntopology = TRIODE\n").find("unknown value 'TRIODE'") !=
        std::string::npos);
  CHECK(parse_error("r1 = 5\n").find("line 1") != std::string::npos);
  CHECK(parse_error("[bridge]\nr1 = 1000\ndelta_r = 3\n").find("either r1 or delta_r") !=
        std::string::npos);
  CHECK(parse_error("[sim\n").find("unterminated") != std::string::npos);
}

TEST_CASE("load_config reports missing files") {
  try {
    load_config("/nonexistent/path.ini");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/nonexistent/path.ini") != std::string::npos);
  }
}

TEST_CASE("property: text form round-trips random configs") {
  std::mt19937_64 rng(1234);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  const Topology topologies[] = {Topology::kOpenBridge, Topology::kPmosFeedback,
                                 Topology::kNmosFeedback, Topology::kRcCompensated};
  for (int i = 0; i < 200; ++i) {
    SimConfig c = default_config(topologies[i % 4]);
    c.bridge.r1 = 1000.0 * u(rng);
    c.bridge.r4 = 1000.0 * u(rng);
    c.bridge.vcc_dc = u(rng);
    c.amp.gain_dc = 100.0 * u(rng);
    c.amp.input_noise_density = 1e-9 * u(rng);
    c.chain.post_gain = u(rng);
    c.chain.feedback_enabled = (i % 3) != 0;
    c.noise.temperature = 30.0 * u(rng);
    if (i % 5 == 0) c.sensor = SensorParams{22e3, 10.0 * u(rng), u(rng), u(rng)};
    c.sources.push_back({SourceKind::kTone, SourceTarget::kVcc, 1e-3 * u(rng), 100.0 * u(rng), {}});
    c.sources.push_back({SourceKind::kWhiteNoise, SourceTarget::kGnd, 1e-6 * u(rng), 0.0,
                         static_cast<std::uint64_t>(rng())});
    CHECK(parse_config(to_text(c)) == c);
  }
}

TEST_CASE("enum names round-trip") {
  for (auto t : {Topology::kOpenBridge, Topology::kPmosFeedback, Topology::kNmosFeedback,
                 Topology::kRcCompensated})
    CHECK(parse_topology(to_string(t)) == t);
  for (auto k : {SourceKind::kDc, SourceKind::kTone, SourceKind::kWhiteNoise,
                 SourceKind::kMechResonator})
    CHECK(parse_source_kind(to_string(k)) == k);
  for (auto t : {SourceTarget::kVcc, SourceTarget::kGnd, SourceTarget::kDeltaR})
    CHECK(parse_source_target(to_string(t)) == t);
  CHECK_FALSE(parse_topology("SOMETHING").has_value());
}

TEST_CASE("derived quantities") {
  SimConfig c;
  c.sample_rate = 1e6;
  c.duration = 0.05;
  CHECK(c.sample_count() == 50000);
  c.sources = {{SourceKind::kTone, SourceTarget::kVcc, 1.0, 9e3, {}},
               {SourceKind::kTone, SourceTarget::kDeltaR, 1.0, 1e3, {}}};
  CHECK(c.max_source_frequency() == 9e3);
  CHECK(RcParams{}.corner_hz() == doctest::Approx(5.0).epsilon(1e-9));
  CHECK(MosParams{}.overdrive() == doctest::Approx(2.5));
}
