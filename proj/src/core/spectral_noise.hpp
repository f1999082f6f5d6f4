#pragma once

#include <span>
#include <string>
#include <vector>

#include "model_config.hpp"

namespace bb {

struct ToneMeasurement {
  double amplitude = 0.0;  // peak
  double phase = 0.0;      // rad, sine phase convention: a sin(2 pi f t + phase)
};

/// Single-bin projection at f. The record must hold a whole number of
/// periods of f (throws NON_COHERENT_WINDOW otherwise).
ToneMeasurement goertzel(std::span<const double> x, double sample_rate, double f);

struct Psd {
  std::vector<double> freq_hz;
  std::vector<double> density;  // one-sided, unit^2/Hz
};

/// Hann-windowed, averaged one-sided periodogram. White noise of density d
/// yields a flat d^2. segment_len must be a power of two no longer than the
/// record (RECORD_TOO_SHORT otherwise).
Psd welch_psd(std::span<const double> x, double sample_rate, std::size_t segment_len,
              double overlap = 0.5);

/// sqrt(4 k T R), V/sqrt(Hz).
double thermal_noise_density(double r, double temperature);

/// Where a PSRR measurement reads the circuit.
enum class Probe {
  kBridge,  // v_diff, the amplifier input
  kOutput,  // post_gain * (out_p - out_n)
};

struct PsrrOptions {
  Probe probe = Probe::kBridge;
  SourceTarget disturbed_rail = SourceTarget::kVcc;
  double signal_amplitude = 0.1;   // ohm
  double supply_amplitude = 1e-3;  // V
  double settle_fraction = 0.5;
  bool linearity_guard = true;
};

/// One Eq.-(2)-style measurement. gain_signal is V per ohm of R1, gain_supply
/// is V per V of rail. psrr_db is +infinity when the supply tone sits below
/// the numeric floor.
struct PsrrReport {
  double freq_hz = 0.0;    // supply tone, as measured (snapped to the window grid)
  double f_signal = 0.0;   // signal tone, as measured
  double gain_signal = 0.0;
  double gain_supply = 0.0;
  double psrr_db = 0.0;
  Topology topology = Topology::kOpenBridge;

  double psrr_inv_db() const { return -psrr_db; }
};

/// Recomputes 20 log10(gain_signal / gain_supply) with the sentinel rule.
double psrr_db_from_gains(double gain_signal, double gain_supply);

/// Nearest frequency that is a whole number of cycles in the analysis window
/// psrr_from_transient uses for this config.
double coherent_frequency(const SimConfig& config, double f, double settle_fraction = 0.5);

/// Runs the transient engine with a small R1 tone at f_signal and a rail tone
/// at f_supply (existing AC sources are removed; DC sources are kept) and
/// reads both tones with goertzel. Frequencies are snapped to the coherent
/// window grid. Equal frequencies are measured in two separate runs. The
/// measurement is repeated at half amplitude and NONLINEAR_REGIME is thrown
/// if psrr_db moves by 0.1 dB or more.
PsrrReport psrr_from_transient(const SimConfig& config, double f_signal, double f_supply,
                               const PsrrOptions& opt = {});

/// psrr_from_transient at each supply frequency with a fixed signal tone.
std::vector<PsrrReport> psrr_sweep(const SimConfig& config, const std::vector<double>& f_grid,
                                   double f_signal, const PsrrOptions& opt = {});

/// Small-signal gains at one frequency, referred as follows: supply/ground
/// gains are V at the bridge output per V of rail (input-referred), and
/// chain_gain is V at the chain output per V of equivalent stand-alone
/// bridge signal.
struct Linearization {
  double freq_hz = 0.0;
  double gain_supply = 0.0;
  double gain_ground = 0.0;
  double chain_gain = 1.0;
};

/// Closed form for OPEN_BRIDGE (Eq. (1) partials and the single-pole chain);
/// transient measurement at the chain output for feedback topologies.
Linearization linearize(const SimConfig& config, double analysis_f);

struct NoiseBudget {
  double freq_hz = 0.0;
  double chain_gain = 1.0;
  // Output-referred densities, V/sqrt(Hz).
  double bridge_thermal = 0.0;
  double amp_input = 0.0;
  double supply_injected = 0.0;
  double ground_injected = 0.0;
  double total_output = 0.0;
  double input_referred = 0.0;
  std::string resolution_note;
};

/// Root-sum-square budget of uncorrelated sources. Amplifier noise enters at
/// the first stage only (the LNA when present).
NoiseBudget noise_budget(const SimConfig& config, const Linearization& lin);
NoiseBudget noise_budget(const SimConfig& config, double analysis_f);

}  // namespace bb
