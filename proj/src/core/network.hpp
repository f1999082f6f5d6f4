#pragma once

// Algebraic resolution of the bridge with series feedback devices, shared by
// the DC solver and the transient engine.
//
// Each branch runs rail -> [upper device] -> R1|R2 -> sense node -> R3|R4 ->
// [lower device] -> ground. PMOS devices sit between Vcc and the bridge top,
// NMOS devices between the bridge bottom and ground. Branch A holds R1/R3 and
// is driven by the amplifier's negative output; branch B holds R2/R4 and is
// driven by the positive output. The amplifier is inverting:
// v_s = out_p - out_n = -G * v_diff, so v_s carries the sign of delta R.

#include "model_config.hpp"
#include "mos_triode.hpp"

namespace bb::network {

struct Rails {
  double vcc = 0.0;
  double gnd = 0.0;
};

struct Arms {
  double r1, r2, r3, r4;
};

/// Device resistances in series with each branch. Infinity means off.
struct Devices {
  double upper_a = 0.0, upper_b = 0.0;
  double lower_a = 0.0, lower_b = 0.0;
};

struct Nodes {
  double v_a = 0.0;
  double v_b = 0.0;
  double v_diff = 0.0;
  // Partial derivatives of v_diff w.r.t. the device in each branch.
  double dvdiff_drdev_a = 0.0;
  double dvdiff_drdev_b = 0.0;
};

/// Generalised bridge equation; with zero device resistance it reduces to
/// Vcc (R2 R3 - R1 R4) / ((R1 + R3)(R2 + R4)).
Nodes resolve(const Rails& rails, const Arms& arms, const Devices& dev, bool devices_on_top);

/// Gate voltages and |Vgs| of the two devices for a given loop output.
struct GateDrive {
  double gate_a = 0.0;  // absolute gate voltage, driven by out_n
  double gate_b = 0.0;  // driven by out_p
  double vgs_a = 0.0;   // |Vgs|
  double vgs_b = 0.0;
};

/// DC reference the amplifier outputs ride on: the gate voltage that puts
/// |Vgs| at its bias with a quiet supply.
double gate_reference(const MosParams& m, double vcc_dc);

/// Static (or directly wired) drive: gates at reference +/- v_s/2.
GateDrive direct_drive(const MosParams& m, double vcc_dc, const Rails& rails, double v_s);

}  // namespace bb::network
