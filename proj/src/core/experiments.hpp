#pragma once

// Canned reproductions and the table builders behind every CLI subcommand.
// Verdict thresholds live here, not in the analysis modules.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "closed_loop.hpp"
#include "csv.hpp"
#include "model_config.hpp"
#include "spectral_noise.hpp"
#include "transient_engine.hpp"

namespace bb {

// ---------------------------------------------------------------------------
// Default scenarios

/// R = 1 kohm, dR/R = 1.34e-2 on R1, Vcc = 5 V DC, default device and amp.
SimConfig default_config(Topology topology);

/// PMOS feedback, 1 ohm R1 tone at 1 kHz, 10 mV ground tone at 9 kHz,
/// 1 MHz sampling for 50 ms.
SimConfig fig7_config();

/// RC-compensated circuit sampled at 5 MHz for 40 ms (100 kHz supply tones).
SimConfig fig9_config();

struct Architecture {
  std::string name;
  SimConfig config;
};

/// Open loop, feedback without LNA, feedback with LNA; ~87 dB overall gain.
std::vector<Architecture> table1_architectures(const std::optional<SimConfig>& base = std::nullopt);

// ---------------------------------------------------------------------------
// Subcommand tables

/// v_offset, dv_ddr, dv_dvcc, psrr_db (one row).
Table bridge_dc_table(const BridgeParams& b);

/// The Fig. 5 CSV: delta_r_ohm, gain, psrr_inv_db_exact, psrr_inv_db_asymptotic,
/// psrr_inv_db_open_loop.
Table loop_sweep_table(const std::vector<PsrrCurveRow>& rows);

/// Half-bridge loop parameters implied by a config: the equivalent loop of a
/// feedback circuit, or beta = 1000 ohm/V with the amp gain for OPEN_BRIDGE.
LoopParams loop_params_from_config(const SimConfig& c);

/// t_s then one column per channel.
Table timeseries_table(const TimeSeries& ts, const std::vector<std::string>& channels = {});

/// freq_hz, psrr_db, psrr_inv_db, gain_signal, gain_supply
Table psrr_table(const std::vector<PsrrReport>& reports);

Table noise_table(const NoiseBudget& nb);

/// "lo:hi:log:n" or "lo:hi:lin:n" or a comma list.
std::vector<double> parse_grid(const std::string& spec);

// ---------------------------------------------------------------------------
// Experiments

enum class VerdictStatus { kPass, kFail, kNotApplicable };

std::string_view to_string(VerdictStatus s);

struct Verdict {
  std::string name;
  VerdictStatus status = VerdictStatus::kNotApplicable;
  std::string detail;
};

struct ExperimentOptions {
  std::filesystem::path out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool json = false;
  std::optional<SimConfig> config;  // replaces the experiment's base scenario
};

struct ExperimentResult {
  std::string id;
  std::string config_snapshot;
  std::vector<std::filesystem::path> outputs;
  std::vector<Verdict> verdicts;
  double wall_seconds = 0.0;

  /// No verdict failed (N/A counts as passing).
  bool passed() const;
};

struct Fig5Params {
  std::vector<double> gains{1e2, 1e3, 1e4};
  double dr_min = 0.1;
  double dr_max = 100.0;
  int points = 50;
  LoopParams fixed{1000.0, 1000.0, 1000.0, 0.0, 5.0};
};

ExperimentResult run_fig5(const ExperimentOptions& opt, const Fig5Params& params = {});
ExperimentResult run_fig7(const ExperimentOptions& opt);
ExperimentResult run_fig9(const ExperimentOptions& opt);
ExperimentResult run_table1(const ExperimentOptions& opt);
ExperimentResult run_experiment(const std::string& id, const ExperimentOptions& opt);

// Verdicts recomputed from the emitted tables alone.
std::vector<Verdict> fig5_verdicts(const Table& sweep);
std::vector<Verdict> fig7_verdicts(const Table& tones);
std::vector<Verdict> fig9_verdicts(const Table& compensated, const Table& open);
std::vector<Verdict> table1_verdicts(const Table& table);

}  // namespace bb
