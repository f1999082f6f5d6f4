#include "network.hpp"

#include <cmath>

namespace bb::network {

namespace {

struct Branch {
  double upper;  // rail-side resistance above the sense node
  double lower;  // resistance below the sense node
};

}  // namespace

Nodes resolve(const Rails& rails, const Arms& arms, const Devices& dev, bool devices_on_top) {
  const double span = rails.vcc - rails.gnd;
  Branch a{arms.r1 + dev.upper_a, arms.r3 + dev.lower_a};
  Branch b{arms.r2 + dev.upper_b, arms.r4 + dev.lower_b};

  Nodes n;
  const bool a_open = std::isinf(a.upper) || std::isinf(a.lower);
  const bool b_open = std::isinf(b.upper) || std::isinf(b.lower);
  if (a_open || b_open) {
    // An off device floats its branch to the opposite rail.
    auto node = [&](const Branch& br) {
      if (std::isinf(br.upper)) return rails.gnd;
      if (std::isinf(br.lower)) return rails.vcc;
      return rails.gnd + span * br.lower / (br.upper + br.lower);
    };
    n.v_a = node(a);
    n.v_b = node(b);
    n.v_diff = n.v_a - n.v_b;
    return n;
  }

  const double ta = a.upper + a.lower;
  const double tb = b.upper + b.lower;
  // Cross-multiplied form keeps the balanced case exact.
  n.v_diff = span * (a.lower * b.upper - b.lower * a.upper) / (ta * tb);
  n.v_a = rails.gnd + span * a.lower / ta;
  n.v_b = rails.gnd + span * b.lower / tb;
  if (devices_on_top) {
    n.dvdiff_drdev_a = -span * a.lower / (ta * ta);
    n.dvdiff_drdev_b = span * b.lower / (tb * tb);
  } else {
    n.dvdiff_drdev_a = span * a.upper / (ta * ta);
    n.dvdiff_drdev_b = -span * b.upper / (tb * tb);
  }
  return n;
}

double gate_reference(const MosParams& m, double vcc_dc) {
  return m.polarity == Polarity::kPmos ? vcc_dc - m.vgs_bias_abs : m.vgs_bias_abs;
}

GateDrive direct_drive(const MosParams& m, double vcc_dc, const Rails& rails, double v_s) {
  GateDrive g;
  const double ref = gate_reference(m, vcc_dc);
  g.gate_a = ref - 0.5 * v_s;
  g.gate_b = ref + 0.5 * v_s;
  if (m.polarity == Polarity::kPmos) {
    g.vgs_a = rails.vcc - g.gate_a;
    g.vgs_b = rails.vcc - g.gate_b;
  } else {
    g.vgs_a = g.gate_a - rails.gnd;
    g.vgs_b = g.gate_b - rails.gnd;
  }
  return g;
}

}  // namespace bb::network
