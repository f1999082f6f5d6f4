#include "mos_triode.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "error.hpp"

namespace bb {

TriodePoint rds_unchecked(const MosParams& m, double vgs_abs) {
  TriodePoint p;
  p.vgs_abs = vgs_abs;
  const double overdrive = vgs_abs - m.vth_abs;
  p.in_triode = overdrive > 0.0;
  if (!p.in_triode) {
    p.rds = std::numeric_limits<double>::infinity();
    return p;
  }
  p.rds = 1.0 / (m.kprime_wl * overdrive);
  // dR/d|Vgs| = -R / overdrive. PMOS: d|Vgs|/dVg = -1; NMOS: +1.
  const double dr_dvgs = -p.rds / overdrive;
  p.drds_dvg = m.polarity == Polarity::kPmos ? -dr_dvgs : dr_dvgs;
  return p;
}

TriodePoint rds(const MosParams& m, double vgs_abs) {
  auto p = rds_unchecked(m, vgs_abs);
  if (!p.in_triode)
    throw CutoffError("CUTOFF: |Vgs| = " + std::to_string(vgs_abs) + " V <= |Vth| = " +
                          std::to_string(m.vth_abs) + " V",
                      -1.0);
  return p;
}

double effective_beta(const MosParams& m, double at_vgs_abs) {
  return std::abs(rds(m, at_vgs_abs).drds_dvg);
}

}  // namespace bb
