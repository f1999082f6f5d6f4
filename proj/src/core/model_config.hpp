#pragma once

// Domain types shared by every engine. All quantities are plain SI numbers
// (ohm, volt, farad, hertz, second, kelvin); the unit is fixed by the field.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bb {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K, CODATA exact
inline constexpr double kPi = 3.14159265358979323846;

/// Wheatstone bridge. R1 and R2 sit on the supply side, R3 and R4 on the
/// ground side; the differential output is V(R1/R3 node) - V(R2/R4 node).
/// Mismatch convention: a single delta R lives on R1 (R1 = R + dR).
struct BridgeParams {
  double r1 = 1000.0;
  double r2 = 1000.0;
  double r3 = 1000.0;
  double r4 = 1000.0;
  double r_nominal = 1000.0;
  double vcc_dc = 5.0;

  double delta_r() const { return r1 - r_nominal; }

  static BridgeParams with_mismatch(double r_nominal, double delta_r, double vcc);

  bool operator==(const BridgeParams&) const = default;
};

enum class Polarity { kPmos, kNmos };

/// First-order triode device. kprime_wl lumps mu*Cox*W/L.
struct MosParams {
  Polarity polarity = Polarity::kPmos;
  double kprime_wl = 4e-3;
  double vth_abs = 0.7;
  double vgs_bias_abs = 3.2;

  double overdrive() const { return vgs_bias_abs - vth_abs; }
  bool operator==(const MosParams&) const = default;
};

/// Single-pole differential amplifier with a clamped static curve.
struct AmpParams {
  double gain_dc = 1000.0;
  double pole_hz = 1000.0;
  double sat_v = 2.5;
  double input_noise_density = 6.4e-9;

  bool operator==(const AmpParams&) const = default;
};

/// Stages around the loop amplifier. An LNA (gain > 1) is prepended inside
/// the loop; post_gain scales the chain output outside the loop.
struct ChainParams {
  double lna_gain = 1.0;
  double lna_noise_density = 0.0;
  double post_gain = 1.0;
  bool feedback_enabled = true;

  bool has_lna() const { return lna_gain != 1.0; }
  bool operator==(const ChainParams&) const = default;
};

/// Gate filter: resistor to the amplifier output, capacitor to the rail.
struct RcParams {
  double r_filter = 100e3;
  double c_filter = 3.183098861837907e-7;  // 5 Hz corner with 100 kohm

  double tau() const { return r_filter * c_filter; }
  double corner_hz() const { return 1.0 / (2.0 * kPi * r_filter * c_filter); }
  bool operator==(const RcParams&) const = default;
};

/// Second-order mechanical resonator with unity static gain.
struct SensorParams {
  double f_res = 22e3;
  double q_factor = 100.0;
  double force_to_dr = 1.0;
  double drive_amp = 1.0;

  bool operator==(const SensorParams&) const = default;
};

struct NoiseSpec {
  double temperature = 300.0;
  double supply_noise_density = 10e-6;
  double supply_noise_band = 1e6;
  double ground_noise_density = 0.0;

  bool operator==(const NoiseSpec&) const = default;
};

enum class SourceKind { kDc, kTone, kWhiteNoise, kMechResonator };
enum class SourceTarget { kVcc, kGnd, kDeltaR };

/// Stimulus added to a rail (volts) or to R1 (ohms). MECH_RESONATOR drives
/// the sensor with amplitude * drive_amp * sin(2 pi f t) (a DC drive when f
/// is zero) and adds force_to_dr * x(t) to R1.
struct SourceSpec {
  SourceKind kind = SourceKind::kTone;
  SourceTarget target = SourceTarget::kDeltaR;
  double amplitude = 0.0;
  double frequency = 0.0;
  std::optional<std::uint64_t> seed;

  bool operator==(const SourceSpec&) const = default;
};

enum class Topology { kOpenBridge, kPmosFeedback, kNmosFeedback, kRcCompensated };

struct SimConfig {
  Topology topology = Topology::kOpenBridge;
  BridgeParams bridge;
  std::optional<MosParams> mos;
  AmpParams amp;
  ChainParams chain;
  std::optional<RcParams> rc;
  std::optional<SensorParams> sensor;
  NoiseSpec noise;
  std::vector<SourceSpec> sources;
  double sample_rate = 1e6;
  double duration = 0.05;

  std::size_t sample_count() const;
  double max_source_frequency() const;
  bool operator==(const SimConfig&) const = default;
};

bool uses_feedback(Topology t);

std::string_view to_string(Topology t);
std::string_view to_string(Polarity p);
std::string_view to_string(SourceKind k);
std::string_view to_string(SourceTarget t);
std::optional<Topology> parse_topology(std::string_view s);
std::optional<Polarity> parse_polarity(std::string_view s);
std::optional<SourceKind> parse_source_kind(std::string_view s);
std::optional<SourceTarget> parse_source_target(std::string_view s);

/// Every violated invariant, phrased as the condition that failed.
/// Empty when the config is valid.
std::vector<std::string> check(const SimConfig& config);

/// Returns the config unchanged when valid; throws ValidationError carrying
/// the full violation list otherwise.
SimConfig validate(const SimConfig& config);

/// Parses the `[section] key = value` text format. Unknown sections or keys
/// and malformed numbers are reported with their line number. The result is
/// not validated.
SimConfig parse_config(std::string_view text);
SimConfig load_config(const std::string& path);

/// Round-trippable text form (17 significant digits).
std::string to_text(const SimConfig& config);

}  // namespace bb
