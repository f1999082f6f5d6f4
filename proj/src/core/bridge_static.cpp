#include "bridge_static.hpp"

#include <cmath>
#include <limits>

#include "error.hpp"

namespace bb {

double balance_residual(const BridgeParams& b) { return b.r2 * b.r3 - b.r1 * b.r4; }

double bridge_output(const BridgeParams& b) {
  return b.vcc_dc * balance_residual(b) / ((b.r1 + b.r3) * (b.r2 + b.r4));
}

BridgeSensitivities sensitivities(const BridgeParams& b) {
  BridgeSensitivities s;
  s.v_offset = bridge_output(b);
  s.dv_dvcc = balance_residual(b) / ((b.r1 + b.r3) * (b.r2 + b.r4));
  // d/dR1 of the R1/R3 node ratio R3 / (R1 + R3); the R2/R4 half does not
  // depend on R1.
  const double sum13 = b.r1 + b.r3;
  s.dv_ddr = -b.vcc_dc * b.r3 / (sum13 * sum13);
  return s;
}

double standalone_psrr_db(const BridgeParams& b) {
  const auto s = sensitivities(b);
  if (s.dv_dvcc == 0.0) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(std::abs(s.dv_ddr) / std::abs(s.dv_dvcc));
}

double mismatch_for_attenuation(double r_nominal, double attenuation_db) {
  // |dv_dvcc| = dR / (2 (2R + dR)) for dR on R1 alone.
  const double a = std::pow(10.0, -attenuation_db / 20.0);
  if (!(a < 0.5)) throw Error(ErrorCode::kInvalidArgument, "attenuation must exceed 6.02 dB");
  return 4.0 * r_nominal * a / (1.0 - 2.0 * a);
}

}  // namespace bb
