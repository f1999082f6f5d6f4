#pragma once

#include "model_config.hpp"

namespace bb {

struct BridgeSensitivities {
  double dv_ddr = 0.0;   // V/ohm, w.r.t. R1
  double dv_dvcc = 0.0;  // V/V
  double v_offset = 0.0; // V
};

/// Differential output Vcc (R2 R3 - R1 R4) / ((R1 + R3)(R2 + R4)).
double bridge_output(const BridgeParams& b);

/// R2 R3 - R1 R4 (ohm^2). Zero iff the bridge is balanced for every Vcc.
double balance_residual(const BridgeParams& b);

BridgeSensitivities sensitivities(const BridgeParams& b);

/// 20 log10(|dv_ddr| / |dv_dvcc|), per-ohm signal gain against per-volt
/// supply gain. Returns +infinity for an exactly balanced bridge.
double standalone_psrr_db(const BridgeParams& b);

/// Mismatch on R1 (other arms at r_nominal) whose supply attenuation
/// |dv_dvcc| equals 10^(-attenuation_db / 20). Inverse of the closed form.
double mismatch_for_attenuation(double r_nominal, double attenuation_db);

}  // namespace bb
