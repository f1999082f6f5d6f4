#pragma once

#include "model_config.hpp"

namespace bb {

struct TriodePoint {
  double rds = 0.0;       // ohm
  double drds_dvg = 0.0;  // ohm/V, w.r.t. the absolute gate voltage
  double vgs_abs = 0.0;   // V
  bool in_triode = false;
};

/// First-order triode resistance R = 1 / (k'W/L (|Vgs| - |Vth|)); the Vds/2
/// term is neglected. The slope is taken w.r.t. the gate voltage with the
/// device's polarity: raising a PMOS gate toward its source lowers |Vgs| and
/// raises R, raising an NMOS gate does the opposite.
/// Throws CutoffError when |Vgs| <= |Vth|.
TriodePoint rds(const MosParams& m, double vgs_abs);

/// Same law without the cutoff check, for hot loops that test in_triode
/// themselves. rds is +infinity off-triode.
TriodePoint rds_unchecked(const MosParams& m, double vgs_abs);

/// |dR/dVg| at the given |Vgs|: the feedback coefficient beta (ohm/V).
double effective_beta(const MosParams& m, double at_vgs_abs);

}  // namespace bb
