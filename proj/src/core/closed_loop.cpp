#include "closed_loop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bridge_static.hpp"
#include "error.hpp"
#include "mos_triode.hpp"
#include "network.hpp"

namespace bb {

void validate_loop(const LoopParams& p) {
  std::vector<std::string> v;
  auto pos = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!pos(p.a_gain)) v.emplace_back("a_gain > 0");
  if (!pos(p.beta)) v.emplace_back("beta > 0");
  if (!pos(p.r_nominal)) v.emplace_back("r_nominal > 0");
  if (!pos(p.vcc)) v.emplace_back("vcc > 0");
  if (!std::isfinite(p.delta_r)) v.emplace_back("delta_r finite");
  if (!v.empty()) throw ValidationError(std::move(v));
}

double vs_closed_form(const LoopParams& p) {
  const double fwd = p.a_gain / (2.0 * p.r_nominal) * p.vcc;
  return p.delta_r * fwd / (1.0 + p.loop_gain());
}

GainPair signal_gain(const LoopParams& p) {
  const double fwd = p.a_gain / (2.0 * p.r_nominal) * p.vcc;
  return {fwd / (1.0 + p.loop_gain()), 1.0 / p.beta};
}

GainPair supply_gain(const LoopParams& p) {
  const double one_l = 1.0 + p.loop_gain();
  const double exact = p.a_gain * p.delta_r / (2.0 * p.r_nominal * one_l * one_l);
  const double asym =
      2.0 * p.r_nominal * p.delta_r / (p.a_gain * p.beta * p.beta * p.vcc * p.vcc);
  return {exact, asym};
}

GainPair psrr_inv_db(const LoopParams& p) {
  if (p.delta_r == 0.0) {
    const double ninf = -std::numeric_limits<double>::infinity();
    return {ninf, ninf};
  }
  const double exact = 20.0 * std::log10(std::abs(supply_gain(p).exact) / signal_gain(p).exact);
  const double asym = 20.0 * std::log10(2.0 * p.r_nominal * std::abs(p.delta_r) /
                                        (p.a_gain * p.beta * p.vcc * p.vcc));
  return {exact, asym};
}

// ---------------------------------------------------------------------------
// DC operating point

namespace {

struct LoopEval {
  double f = 0.0;      // fixed-point defect v_s - clamp(-G v_diff)
  double slope = 0.0;  // dF/dv_s
  double dvdiff_dvs = 0.0;
  double r_a = 0.0, r_b = 0.0;
  bool triode = true;
  bool clamped = false;
};

class DcLoop {
 public:
  DcLoop(const BridgeParams& b, const MosParams& m, const AmpParams& a, Topology t,
         const ChainParams& chain)
      : b_(b), m_(m), sat_(a.sat_v), gain_(a.gain_dc * chain.lna_gain),
        on_top_(m.polarity == Polarity::kPmos), feedback_(chain.feedback_enabled) {
    (void)t;
  }

  LoopEval eval(double v_s) const {
    LoopEval e;
    const network::Rails rails{b_.vcc_dc, 0.0};
    const double drive = feedback_ ? v_s : 0.0;
    const auto g = network::direct_drive(m_, b_.vcc_dc, rails, drive);
    const auto pa = rds_unchecked(m_, g.vgs_a);
    const auto pb = rds_unchecked(m_, g.vgs_b);
    e.triode = pa.in_triode && pb.in_triode;
    e.r_a = pa.rds;
    e.r_b = pb.rds;
    network::Devices dev;
    if (on_top_) {
      dev.upper_a = pa.rds;
      dev.upper_b = pb.rds;
    } else {
      dev.lower_a = pa.rds;
      dev.lower_b = pb.rds;
    }
    const auto n = network::resolve(rails, {b_.r1, b_.r2, b_.r3, b_.r4}, dev, on_top_);
    const double target = -gain_ * n.v_diff;
    const double clamped = std::clamp(target, -sat_, sat_);
    e.clamped = clamped != target;
    e.f = v_s - clamped;
    if (e.triode && feedback_) {
      // gate_a = ref - v_s/2, gate_b = ref + v_s/2
      e.dvdiff_dvs = n.dvdiff_drdev_a * pa.drds_dvg * -0.5 + n.dvdiff_drdev_b * pb.drds_dvg * 0.5;
    }
    e.slope = e.clamped ? 1.0 : 1.0 + gain_ * e.dvdiff_dvs;
    return e;
  }

  double sat() const { return sat_; }
  // 1e-12 Vcc, floored at the rounding noise of G * v_diff.
  double tol() const {
    return std::max(1e-12, 64.0 * std::numeric_limits<double>::epsilon() * gain_) * b_.vcc_dc;
  }

 private:
  BridgeParams b_;
  MosParams m_;
  double sat_;
  double gain_;
  bool on_top_;
  bool feedback_;
};

}  // namespace

OperatingPoint solve_dc(const BridgeParams& b, const MosParams& m, const AmpParams& a,
                        Topology topology, const ChainParams& chain) {
  if (!uses_feedback(topology))
    throw Error(ErrorCode::kInvalidArgument, "solve_dc needs a feedback topology");
  const DcLoop loop(b, m, a, topology, chain);

  const auto start = loop.eval(0.0);
  if (!start.triode)
    throw CutoffError("CUTOFF: feedback device off at zero amplifier output", -1.0);
  if (chain.feedback_enabled && start.dvdiff_dvs <= 0.0)
    throw Error(ErrorCode::kPositiveFeedback,
                "POSITIVE_FEEDBACK: loop sign is not negative at the bias point");

  OperatingPoint op;
  auto finish = [&](double v_s, const LoopEval& e) {
    if (!e.triode) throw CutoffError("CUTOFF: operating point leaves the triode region", -1.0);
    if (!e.clamped && chain.feedback_enabled && e.dvdiff_dvs <= 0.0)
      throw Error(ErrorCode::kPositiveFeedback, "POSITIVE_FEEDBACK: loop sign is not negative at the operating point");
    op.v_s = v_s;
    op.r_fb_a = e.r_a;
    op.r_fb_b = e.r_b;
    op.residual = e.f;
    op.clamped = e.clamped;
    return op;
  };

  constexpr int kMaxIter = 100;
  double x = 0.0;
  LoopEval e = start;
  double lo = -loop.sat(), hi = loop.sat();
  bool saw_cutoff = false;
  for (int it = 0; it < kMaxIter; ++it) {
    op.iterations = it + 1;
    if (std::abs(e.f) <= loop.tol()) return finish(x, e);
    // F is negative left of the root and positive right of it.
    if (e.f < 0.0) lo = std::max(lo, x); else hi = std::min(hi, x);
    double next = x - e.f / e.slope;
    const bool newton_ok = std::isfinite(next) && e.slope > 0.0 && next > lo && next < hi;
    if (!newton_ok) {
      next = 0.5 * (lo + hi);
      op.used_bisection = true;
    }
    auto en = loop.eval(next);
    if (!en.triode && newton_ok) {
      next = 0.5 * (lo + hi);
      op.used_bisection = true;
      en = loop.eval(next);
    }
    saw_cutoff = saw_cutoff || !en.triode;
    if (next == x) break;
    x = next;
    e = en;
  }
  if (std::abs(e.f) <= loop.tol()) return finish(x, e);
  if (saw_cutoff)
    throw CutoffError("CUTOFF: no operating point inside the triode region", -1.0);
  throw Error(ErrorCode::kNoConvergence,
              "NO_CONVERGENCE after " + std::to_string(kMaxIter) +
                  " iterations, last residual " + std::to_string(e.f) + " V");
}

LoopParams equivalent_loop(const BridgeParams& b, const MosParams& m, const AmpParams& a,
                           Topology topology, const ChainParams& chain) {
  if (!uses_feedback(topology))
    throw Error(ErrorCode::kInvalidArgument, "equivalent_loop needs a feedback topology");
  const double r = b.r_nominal;
  const network::Rails rails{b.vcc_dc, 0.0};
  const bool on_top = m.polarity == Polarity::kPmos;
  const auto g = network::direct_drive(m, b.vcc_dc, rails, 0.0);
  const auto pa = rds(m, g.vgs_a);
  network::Devices dev;
  if (on_top) dev.upper_a = dev.upper_b = pa.rds;
  else dev.lower_a = dev.lower_b = pa.rds;
  const auto n = network::resolve(rails, {r, r, r, r}, dev, on_top);
  // R1 sits in the upper part of branch A.
  const double upper = r + dev.upper_a, lower = r + dev.lower_a, t = upper + lower;
  const double sense = b.vcc_dc * lower / (t * t);  // -dv_diff/dR1
  const double k_fb = n.dvdiff_drdev_a * pa.drds_dvg * -0.5 + n.dvdiff_drdev_b * pa.drds_dvg * 0.5;
  const double gain = a.gain_dc * chain.lna_gain;

  LoopParams p;
  p.r_nominal = r;
  p.vcc = b.vcc_dc;
  p.delta_r = b.delta_r();
  p.a_gain = gain * sense * 2.0 * r / b.vcc_dc;
  p.beta = k_fb / sense;
  return p;
}

// ---------------------------------------------------------------------------

std::vector<double> log_grid(double lo, double hi, int points) {
  if (points < 1 || !(lo > 0.0) || !(hi >= lo))
    throw Error(ErrorCode::kInvalidArgument, "log grid needs 0 < lo <= hi and points >= 1");
  std::vector<double> g(static_cast<std::size_t>(points));
  if (points == 1) {
    g[0] = lo;
    return g;
  }
  const double step = std::log10(hi / lo) / (points - 1);
  for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = lo * std::pow(10.0, step * i);
  g.back() = hi;
  return g;
}

std::vector<PsrrCurveRow> gain_sweep(const std::vector<double>& mismatch_grid,
                                     const std::vector<double>& gains, const LoopParams& fixed) {
  auto strictly_increasing = [](const std::vector<double>& v) {
    return !v.empty() && std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
  };
  if (!strictly_increasing(mismatch_grid) || !strictly_increasing(gains))
    throw Error(ErrorCode::kInvalidArgument, "sweep grids must be non-empty and strictly increasing");
  validate_loop(fixed);

  std::vector<PsrrCurveRow> rows;
  rows.reserve(mismatch_grid.size() * gains.size());
  for (double g : gains) {
    for (double dr : mismatch_grid) {
      LoopParams p = fixed;
      p.a_gain = g;
      p.delta_r = dr;
      validate_loop(p);
      const auto inv = psrr_inv_db(p);
      const auto open = BridgeParams::with_mismatch(p.r_nominal, dr, p.vcc);
      rows.push_back({dr, g, inv.exact, inv.asymptotic, -standalone_psrr_db(open)});
    }
  }
  return rows;
}

}  // namespace bb
