#pragma once

#include <vector>

#include "model_config.hpp"

namespace bb {

/// Half-bridge loop abstraction: amplifier gain A, feedback slope beta
/// (ohm/V), nominal R, mismatch dR and supply Vcc.
struct LoopParams {
  double a_gain = 1000.0;
  double beta = 1000.0;
  double r_nominal = 1000.0;
  double delta_r = 0.0;
  double vcc = 5.0;

  /// L = (A beta / 2R) Vcc.
  double loop_gain() const { return a_gain * beta / (2.0 * r_nominal) * vcc; }
};

void validate_loop(const LoopParams& p);

struct GainPair {
  double exact = 0.0;
  double asymptotic = 0.0;
};

/// V_s = dR (A/2R) Vcc / (1 + (A beta/2R) Vcc).
double vs_closed_form(const LoopParams& p);

/// dV_s/d(dR): exact, and the high-loop-gain asymptote 1/beta.
GainPair signal_gain(const LoopParams& p);

/// dV_s/dVcc: exact A dR / (2R (1 + L)^2), and the asymptote
/// 2R dR / (A beta^2 Vcc^2).
GainPair supply_gain(const LoopParams& p);

/// Inverse PSRR, 20 log10(supply gain / signal gain). The asymptotic form is
/// 20 log10(2R dR / (A beta Vcc^2)). Both are -infinity when dR = 0. dB values
/// take the log of an ohm/V quantity, so only differences are unit-free.
GainPair psrr_inv_db(const LoopParams& p);

struct OperatingPoint {
  double v_s = 0.0;        // amplifier differential output, out_p - out_n
  double r_fb_a = 0.0;     // device resistance in the R1 branch
  double r_fb_b = 0.0;     // device resistance in the R2 branch
  double residual = 0.0;   // fixed-point defect (V)
  int iterations = 0;
  bool clamped = false;
  bool used_bisection = false;

  /// Differential feedback resistance r_fb_a - r_fb_b.
  double r_fb() const { return r_fb_a - r_fb_b; }
};

/// Nonlinear DC operating point of a feedback topology:
/// v_s = clamp(-G * v_diff(dR, R_fb(v_s))) with the full four-resistor bridge
/// and the triode law, G = gain_dc * lna_gain. Newton with an analytic slope,
/// bisection on [-sat_v, sat_v] when Newton stalls or leaves triode.
/// Throws NO_CONVERGENCE, CUTOFF, or POSITIVE_FEEDBACK.
OperatingPoint solve_dc(const BridgeParams& b, const MosParams& m, const AmpParams& a,
                        Topology topology, const ChainParams& chain = {});

/// Equivalent half-bridge LoopParams of a circuit at its balanced bias point:
/// beta from the triode slope, A folded with the sensing gain of the full
/// bridge (including the series devices) so that Eq.-(3)-style closed forms
/// describe the four-resistor circuit in the small-mismatch regime.
LoopParams equivalent_loop(const BridgeParams& b, const MosParams& m, const AmpParams& a,
                           Topology topology, const ChainParams& chain = {});

struct PsrrCurveRow {
  double delta_r = 0.0;
  double gain = 0.0;
  double psrr_inv_db_exact = 0.0;
  double psrr_inv_db_asymptotic = 0.0;
  double psrr_inv_db_open_loop = 0.0;
};

/// One row per (gain, dR). The open-loop column is the stand-alone bridge
/// supply/signal ratio at the same dR on R1.
std::vector<PsrrCurveRow> gain_sweep(const std::vector<double>& mismatch_grid,
                                     const std::vector<double>& gains, const LoopParams& fixed);

std::vector<double> log_grid(double lo, double hi, int points);

}  // namespace bb
