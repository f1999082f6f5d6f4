#include "experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "bridge_static.hpp"
#include "error.hpp"

namespace bb {

namespace {

constexpr double kDefaultMismatch = 13.4;  // ohm on a 1 kohm arm
constexpr double kSensorCarrier = 22e3;

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt2(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

Verdict make_verdict(std::string name, bool ok, std::string detail) {
  return {std::move(name), ok ? VerdictStatus::kPass : VerdictStatus::kFail, std::move(detail)};
}

double db(double ratio) { return 20.0 * std::log10(ratio); }

void emit(ExperimentResult& r, const ExperimentOptions& opt, const std::string& stem,
          const Table& t) {
  const auto csv = opt.out_dir / (stem + ".csv");
  write_text(csv, to_csv(t));
  r.outputs.push_back(csv);
  if (opt.json) {
    const auto js = opt.out_dir / (stem + ".json");
    write_text(js, to_json(t));
    r.outputs.push_back(js);
  }
}

void finish(ExperimentResult& r, const ExperimentOptions& opt,
            std::chrono::steady_clock::time_point start) {
  Table v;
  v.columns = {"verdict", "status", "detail"};
  for (const auto& x : r.verdicts) v.add_row({x.name, std::string(to_string(x.status)), x.detail});
  emit(r, opt, r.id + "_verdicts", v);
  const auto snap = opt.out_dir / (r.id + "_config.txt");
  write_text(snap, r.config_snapshot);
  r.outputs.push_back(snap);
  r.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

SimConfig seeded(SimConfig c, const ExperimentOptions& opt) {
  return opt.seed ? with_seed(std::move(c), *opt.seed) : c;
}

double tone_amplitude(const TimeSeries& w, std::span<const double> x, double f) {
  return goertzel(x, w.sample_rate(), f).amplitude;
}

}  // namespace

// ---------------------------------------------------------------------------
// Default scenarios

SimConfig default_config(Topology topology) {
  SimConfig c;
  c.topology = topology;
  c.bridge = BridgeParams::with_mismatch(1000.0, kDefaultMismatch, 5.0);
  if (uses_feedback(topology)) {
    c.mos = MosParams{};
    if (topology == Topology::kNmosFeedback) c.mos->polarity = Polarity::kNmos;
  }
  if (topology == Topology::kRcCompensated) c.rc = RcParams{};
  return c;
}

SimConfig fig7_config() {
  SimConfig c = default_config(Topology::kPmosFeedback);
  c.sources = {{SourceKind::kTone, SourceTarget::kDeltaR, 1.0, 1e3, {}},
               {SourceKind::kTone, SourceTarget::kGnd, 0.01, 9e3, {}}};
  c.sample_rate = 1e6;
  c.duration = 0.05;
  return c;
}

SimConfig fig9_config() {
  SimConfig c = default_config(Topology::kRcCompensated);
  c.sample_rate = 5e6;
  c.duration = 0.04;
  return c;
}

std::vector<Architecture> table1_architectures(const std::optional<SimConfig>& base_in) {
  SimConfig base = default_config(Topology::kOpenBridge);
  base.sample_rate = 2e6;
  base.duration = 0.04;
  base.amp.pole_hz = 100e3;
  if (base_in) {
    base.bridge = base_in->bridge;
    base.noise = base_in->noise;
    base.sample_rate = base_in->sample_rate;
    base.duration = base_in->duration;
  }
  const MosParams mos = base_in && base_in->mos ? *base_in->mos : MosParams{};
  const RcParams rc = base_in && base_in->rc ? *base_in->rc : RcParams{};

  // Overall gain ~87 dB in each architecture.
  SimConfig open = base;
  open.amp.gain_dc = 224.0;
  open.chain.lna_gain = 100.0;
  open.chain.lna_noise_density = 6.4e-9;

  SimConfig no_lna = base;
  no_lna.topology = Topology::kRcCompensated;
  no_lna.mos = mos;
  no_lna.mos->polarity = Polarity::kPmos;
  no_lna.rc = rc;
  no_lna.amp.gain_dc = 300.0;
  no_lna.amp.input_noise_density = 15.6e-9;
  no_lna.chain.post_gain = 82.88;

  SimConfig with_lna = no_lna;
  with_lna.chain.lna_gain = 5.0;
  with_lna.chain.lna_noise_density = 6.4e-9;
  with_lna.chain.post_gain = 82.88 / 5.0;

  return {{"open_loop", open}, {"feedback_no_lna", no_lna}, {"feedback_with_lna", with_lna}};
}

// ---------------------------------------------------------------------------
// Subcommand tables

Table bridge_dc_table(const BridgeParams& b) {
  const auto s = sensitivities(b);
  Table t;
  t.columns = {"v_offset_v", "dv_ddr_v_per_ohm", "dv_dvcc", "psrr_db"};
  t.add_row({s.v_offset, s.dv_ddr, s.dv_dvcc, standalone_psrr_db(b)});
  return t;
}

Table loop_sweep_table(const std::vector<PsrrCurveRow>& rows) {
  Table t;
  t.columns = {"delta_r_ohm", "gain", "psrr_inv_db_exact", "psrr_inv_db_asymptotic",
               "psrr_inv_db_open_loop"};
  for (const auto& r : rows)
    t.add_row({r.delta_r, r.gain, r.psrr_inv_db_exact, r.psrr_inv_db_asymptotic,
               r.psrr_inv_db_open_loop});
  return t;
}

LoopParams loop_params_from_config(const SimConfig& c) {
  if (uses_feedback(c.topology) && c.mos)
    return equivalent_loop(c.bridge, *c.mos, c.amp, c.topology, c.chain);
  LoopParams p;
  p.a_gain = c.amp.gain_dc * c.chain.lna_gain;
  p.r_nominal = c.bridge.r_nominal;
  p.delta_r = c.bridge.delta_r();
  p.vcc = c.bridge.vcc_dc;
  return p;
}

Table timeseries_table(const TimeSeries& ts, const std::vector<std::string>& channels) {
  std::vector<std::string> names = channels;
  if (names.empty())
    for (auto n : ts.names()) names.emplace_back(n);
  std::vector<std::span<const double>> cols;
  for (const auto& n : names) cols.push_back(ts.channel(n));
  Table t;
  t.columns.push_back("t_s");
  t.columns.insert(t.columns.end(), names.begin(), names.end());
  t.rows.reserve(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::vector<Cell> row;
    row.reserve(cols.size() + 1);
    row.emplace_back(ts.t0() + static_cast<double>(i) / ts.sample_rate());
    for (const auto& c : cols) row.emplace_back(c[i]);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table psrr_table(const std::vector<PsrrReport>& reports) {
  Table t;
  t.columns = {"freq_hz", "psrr_db", "psrr_inv_db", "gain_signal", "gain_supply"};
  for (const auto& r : reports)
    t.add_row({r.freq_hz, r.psrr_db, r.psrr_inv_db(), r.gain_signal, r.gain_supply});
  return t;
}

Table noise_table(const NoiseBudget& nb) {
  Table t;
  t.columns = {"freq_hz",         "chain_gain",      "bridge_thermal", "amp_input",
               "supply_injected", "ground_injected", "total_output",   "input_referred",
               "note"};
  t.add_row({nb.freq_hz, nb.chain_gain, nb.bridge_thermal, nb.amp_input, nb.supply_injected,
             nb.ground_injected, nb.total_output, nb.input_referred, nb.resolution_note});
  return t;
}

std::vector<double> parse_grid(const std::string& spec) {
  auto bad = [&](const std::string& why) {
    return Error(ErrorCode::kInvalidArgument, "bad grid '" + spec + "': " + why);
  };
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw bad("'" + s + "' is not a number");
    }
    if (used != s.size()) throw bad("'" + s + "' is not a number");
    return v;
  };
  std::vector<std::string> parts;
  const char sep = spec.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, sep);) parts.push_back(p);
  if (sep == ',') {
    std::vector<double> out;
    for (const auto& p : parts) out.push_back(number(p));
    if (out.empty()) throw bad("empty");
    return out;
  }
  if (parts.size() != 4) throw bad("expected lo:hi:log|lin:n");
  const double lo = number(parts[0]);
  const double hi = number(parts[1]);
  const double n = number(parts[3]);
  if (n < 1 || n != std::floor(n)) throw bad("point count must be a positive integer");
  if (!(hi >= lo)) throw bad("hi < lo");
  const int pts = static_cast<int>(n);
  if (parts[2] == "log") {
    if (!(lo > 0)) throw bad("log grid needs lo > 0");
    if (pts == 1) return {lo};
    return log_grid(lo, hi, pts);
  }
  if (parts[2] == "lin") {
    std::vector<double> out;
    for (int i = 0; i < pts; ++i)
      out.push_back(pts == 1 ? lo : lo + (hi - lo) * i / (pts - 1));
    return out;
  }
  throw bad("spacing must be log or lin");
}

// ---------------------------------------------------------------------------
// Verdicts

std::string_view to_string(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::kPass: return "PASS";
    case VerdictStatus::kFail: return "FAIL";
    case VerdictStatus::kNotApplicable: return "N/A";
  }
  return "?";
}

bool ExperimentResult::passed() const {
  return std::none_of(verdicts.begin(), verdicts.end(),
                      [](const Verdict& v) { return v.status == VerdictStatus::kFail; });
}

std::vector<Verdict> fig5_verdicts(const Table& sweep) {
  std::vector<double> gains;
  for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
    const double g = sweep.number(i, "gain");
    if (std::find(gains.begin(), gains.end(), g) == gains.end()) gains.push_back(g);
  }
  std::sort(gains.begin(), gains.end());

  auto curve = [&](double g) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < sweep.rows.size(); ++i)
      if (sweep.number(i, "gain") == g)
        pts.emplace_back(sweep.number(i, "delta_r_ohm"), sweep.number(i, "psrr_inv_db_exact"));
    return pts;
  };

  std::vector<Verdict> out;

  // Adjacent-gain offset: 20 log10 of the gain ratio at every shared dR.
  if (gains.size() < 2) {
    out.push_back({"gain_offset", VerdictStatus::kNotApplicable, "single gain"});
  } else {
    double worst = 0.0;
    bool any = false;
    for (std::size_t k = 0; k + 1 < gains.size(); ++k) {
      const double expected = db(gains[k + 1] / gains[k]);
      const auto lo = curve(gains[k]);
      const auto hi = curve(gains[k + 1]);
      for (const auto& [dr, y] : lo)
        for (const auto& [dr2, y2] : hi)
          if (dr == dr2 && std::isfinite(y) && std::isfinite(y2)) {
            worst = std::max(worst, std::abs((y - y2) - expected));
            any = true;
          }
    }
    if (!any)
      out.push_back({"gain_offset", VerdictStatus::kNotApplicable, "no shared finite points"});
    else
      out.push_back(make_verdict("gain_offset", worst <= 0.1,
                                 fmt("max deviation from 20 log10(gain ratio) = %.4f dB (tol 0.1)",
                                     worst)));
  }

  // Slope per doubling of dR from a least-squares fit on log2(dR).
  double worst = 0.0;
  bool any = false;
  for (double g : gains) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& [dr, y] : curve(g)) {
      if (!(dr > 0) || !std::isfinite(y)) continue;
      const double x = std::log2(dr);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++n;
    }
    if (n < 2) continue;
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    worst = std::max(worst, std::abs(slope - 6.02));
    any = true;
  }
  if (!any)
    out.push_back({"slope_per_doubling", VerdictStatus::kNotApplicable, "fewer than 2 points"});
  else
    out.push_back(make_verdict("slope_per_doubling", worst <= 0.1,
                               fmt("max deviation from 6.02 dB/doubling = %.4f dB (tol 0.1)",
                                   worst)));
  return out;
}

std::vector<Verdict> fig7_verdicts(const Table& tones) {
  auto rejection = [&](const std::string& topo, const std::string& rail) -> std::optional<double> {
    const auto ti = tones.column_index("topology");
    const auto ri = tones.column_index("disturbed_rail");
    for (std::size_t i = 0; i < tones.rows.size(); ++i)
      if (std::get<std::string>(tones.rows[i][ti]) == topo &&
          std::get<std::string>(tones.rows[i][ri]) == rail)
        return tones.number(i, "rejection_db");
    return std::nullopt;
  };
  std::vector<Verdict> out;
  const auto pg = rejection("PMOS_FEEDBACK", "GND");
  const auto pv = rejection("PMOS_FEEDBACK", "VCC");
  const auto ov = rejection("OPEN_BRIDGE", "VCC");
  const auto nv = rejection("NMOS_FEEDBACK", "VCC");
  if (pg)
    out.push_back(make_verdict("pmos_ground_rejection", *pg >= 40.0,
                               fmt("%.2f dB below the signal (need >= 40)", *pg)));
  else
    out.push_back({"pmos_ground_rejection", VerdictStatus::kNotApplicable, "case not run"});
  if (pv && ov)
    out.push_back(make_verdict("pmos_supply_degradation", *ov - *pv > 0.0,
                               fmt2("open %.2f dB vs PMOS %.2f dB on the supply", *ov, *pv)));
  else
    out.push_back({"pmos_supply_degradation", VerdictStatus::kNotApplicable, "case not run"});
  if (nv)
    out.push_back(make_verdict("nmos_supply_rejection", *nv >= 40.0,
                               fmt("%.2f dB below the signal (need >= 40)", *nv)));
  else
    out.push_back({"nmos_supply_rejection", VerdictStatus::kNotApplicable, "case not run"});
  return out;
}

std::vector<Verdict> fig9_verdicts(const Table& compensated, const Table& open) {
  if (compensated.rows.size() != open.rows.size() || compensated.rows.empty())
    return {{"compensated_advantage", VerdictStatus::kNotApplicable, "grids differ"}};
  double worst = std::numeric_limits<double>::infinity();
  double worst_f = 0.0;
  for (std::size_t i = 0; i < open.rows.size(); ++i) {
    const double o = open.number(i, "psrr_db");
    const double c = compensated.number(i, "psrr_db");
    if (!std::isfinite(o))
      return {{"compensated_advantage", VerdictStatus::kNotApplicable,
               "stand-alone bridge is balanced"}};
    const double diff = c - o;
    if (diff < worst) {
      worst = diff;
      worst_f = open.number(i, "freq_hz");
    }
  }
  return {make_verdict("compensated_advantage", worst >= 20.0,
                       fmt2("min advantage %.2f dB at %.0f Hz (need >= 20)", worst, worst_f))};
}

std::vector<Verdict> table1_verdicts(const Table& t) {
  auto row = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto ai = t.column_index("architecture");
    for (std::size_t i = 0; i < t.rows.size(); ++i)
      if (std::get<std::string>(t.rows[i][ai]) == name) return i;
    return std::nullopt;
  };
  const auto o = row("open_loop");
  const auto n = row("feedback_no_lna");
  const auto l = row("feedback_with_lna");
  if (!o || !n || !l)
    return {{"table1", VerdictStatus::kNotApplicable, "missing architecture rows"}};
  const double po = t.number(*o, "psrr_inv_db");
  const double pn = t.number(*n, "psrr_inv_db");
  const double pl = t.number(*l, "psrr_inv_db");
  const double no = t.number(*o, "intrinsic_noise_v_rthz");
  const double nn = t.number(*n, "intrinsic_noise_v_rthz");
  const double nl = t.number(*l, "intrinsic_noise_v_rthz");

  std::vector<Verdict> out;
  const double spread = std::max({po, pn, pl}) - std::min({po, pn, pl});
  if (spread < 0.5)
    out.push_back({"psrr_ordering", VerdictStatus::kNotApplicable,
                   fmt("all PSRR values within %.2f dB", spread)});
  else
    out.push_back(make_verdict(
        "psrr_ordering", po > pn && pn > pl,
        fmt2("inverse PSRR open %.2f dB, no-LNA %.2f dB", po, pn) + fmt(", with-LNA %.2f dB", pl)));
  out.push_back(make_verdict("lna_psrr_advantage", po - pl >= 30.0,
                             fmt("%.2f dB better than open loop (need >= 30)", po - pl)));
  out.push_back(make_verdict("lna_noise_parity", std::abs(nl / no - 1.0) <= 0.10,
                             fmt("with-LNA / open intrinsic noise = %.4f (need 0.9..1.1)", nl / no)));
  out.push_back(make_verdict("no_lna_noise_worst", nn > no && nn > nl,
                             fmt2("no-LNA %.4g vs max(other) %.4g V/rtHz", nn, std::max(no, nl))));
  return out;
}

// ---------------------------------------------------------------------------
// Experiments

ExperimentResult run_fig5(const ExperimentOptions& opt, const Fig5Params& params) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult r;
  r.id = "fig5";
  LoopParams fixed = params.fixed;
  if (opt.config) fixed = loop_params_from_config(*opt.config);
  if (opt.config) r.config_snapshot = to_text(*opt.config);
  {
    std::ostringstream s;
    s << "[loop]\nbeta = " << format_number(fixed.beta)
      << "\nr_nominal = " << format_number(fixed.r_nominal)
      << "\nvcc = " << format_number(fixed.vcc) << "\ngains =";
    for (double g : params.gains) s << ' ' << format_number(g);
    s << "\ndr_min = " << format_number(params.dr_min)
      << "\ndr_max = " << format_number(params.dr_max) << "\npoints = " << params.points << "\n";
    r.config_snapshot += s.str();
  }
  const auto grid = log_grid(params.dr_min, params.dr_max, params.points);
  const Table t = loop_sweep_table(gain_sweep(grid, params.gains, fixed));
  emit(r, opt, "fig5", t);
  r.verdicts = fig5_verdicts(t);
  finish(r, opt, start);
  return r;
}

ExperimentResult run_fig7(const ExperimentOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult r;
  r.id = "fig7";
  const SimConfig base = seeded(opt.config ? validate(*opt.config) : fig7_config(), opt);
  r.config_snapshot = to_text(base);

  double f_sig = 0.0, f_dist = 0.0;
  std::size_t rail_index = base.sources.size();
  for (std::size_t i = 0; i < base.sources.size(); ++i) {
    const auto& s = base.sources[i];
    if (s.kind != SourceKind::kTone) continue;
    if (s.target == SourceTarget::kDeltaR && f_sig == 0.0) f_sig = s.frequency;
    if (s.target != SourceTarget::kDeltaR && rail_index == base.sources.size()) {
      rail_index = i;
      f_dist = s.frequency;
    }
  }
  if (f_sig == 0.0 || rail_index == base.sources.size())
    throw Error(ErrorCode::kInvalidArgument,
                "fig7 needs a DELTA_R tone and a VCC or GND tone in the config");
  if (f_sig == f_dist)
    throw Error(ErrorCode::kInvalidArgument, "fig7 signal and disturbance tones must differ");

  const TimeSeries ts = run(base);
  emit(r, opt, "fig7_timeseries", timeseries_table(ts, {"vcc", "out_p", "out_n", "gnd"}));

  const double tones[] = {f_sig, f_dist};
  Table tab;
  tab.columns = {"topology",      "disturbed_rail",    "signal_hz",      "disturbance_hz",
                 "signal_out_v",  "disturbance_out_v", "rejection_db",   "signal_bridge_v",
                 "disturbance_bridge_v"};
  struct Case {
    Topology topo;
    SourceTarget rail;
  };
  const Case cases[] = {{Topology::kPmosFeedback, SourceTarget::kGnd},
                        {Topology::kPmosFeedback, SourceTarget::kVcc},
                        {Topology::kOpenBridge, SourceTarget::kGnd},
                        {Topology::kOpenBridge, SourceTarget::kVcc},
                        {Topology::kNmosFeedback, SourceTarget::kGnd},
                        {Topology::kNmosFeedback, SourceTarget::kVcc}};
  for (const auto& k : cases) {
    SimConfig c = base;
    c.topology = k.topo;
    c.sources[rail_index].target = k.rail;
    if (uses_feedback(k.topo)) {
      if (!c.mos) c.mos = MosParams{};
      c.mos->polarity = k.topo == Topology::kNmosFeedback ? Polarity::kNmos : Polarity::kPmos;
    } else {
      c.mos.reset();
    }
    c.rc.reset();
    const TimeSeries run_ts = c == base ? ts : run(c);
    const TimeSeries w = settle_and_window(run_ts, 0.5, tones);
    const auto diff = w.differential_output();
    const auto vd = w.channel("v_diff");
    const double s_out = tone_amplitude(w, diff, f_sig);
    const double d_out = tone_amplitude(w, diff, f_dist);
    tab.add_row({std::string(to_string(k.topo)), std::string(to_string(k.rail)), f_sig, f_dist,
                 s_out, d_out, psrr_db_from_gains(s_out, d_out), tone_amplitude(w, vd, f_sig),
                 tone_amplitude(w, vd, f_dist)});
  }
  emit(r, opt, "fig7_tones", tab);
  r.verdicts = fig7_verdicts(tab);
  finish(r, opt, start);
  return r;
}

ExperimentResult run_fig9(const ExperimentOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult r;
  r.id = "fig9";
  const SimConfig comp = seeded(opt.config ? validate(*opt.config) : fig9_config(), opt);
  r.config_snapshot = to_text(comp);
  SimConfig open = comp;
  open.topology = Topology::kOpenBridge;
  open.mos.reset();
  open.rc.reset();
  const auto grid = log_grid(1e3, 1e5, 9);
  const Table tc = psrr_table(psrr_sweep(comp, grid, kSensorCarrier));
  const Table to = psrr_table(psrr_sweep(open, grid, kSensorCarrier));
  emit(r, opt, "fig9_" + std::string(comp.topology == Topology::kRcCompensated
                                         ? "compensated"
                                         : "feedback"),
       tc);
  emit(r, opt, "fig9_open", to);
  r.verdicts = fig9_verdicts(tc, to);
  finish(r, opt, start);
  return r;
}

ExperimentResult run_table1(const ExperimentOptions& opt) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentResult r;
  r.id = "table1";
  Table t;
  t.columns = {"architecture", "gain_db", "psrr_inv_db", "intrinsic_noise_v_rthz",
               "total_noise_v_rthz"};
  for (auto& a : table1_architectures(opt.config)) {
    const SimConfig c = seeded(validate(a.config), opt);
    r.config_snapshot += "# architecture " + a.name + "\n" + to_text(c) + "\n";
    const auto lin = linearize(c, kSensorCarrier);
    const auto nb = noise_budget(c, lin);
    t.add_row({a.name, db(lin.chain_gain), db(lin.gain_supply), nb.amp_input, nb.total_output});
  }
  emit(r, opt, "table1", t);
  r.verdicts = table1_verdicts(t);
  finish(r, opt, start);
  return r;
}

ExperimentResult run_experiment(const std::string& id, const ExperimentOptions& opt) {
  if (id == "fig5") return run_fig5(opt);
  if (id == "fig7") return run_fig7(opt);
  if (id == "fig9") return run_fig9(opt);
  if (id == "table1") return run_table1(opt);
  throw Error(ErrorCode::kInvalidArgument,
              "unknown experiment '" + id + "' (expected fig5, fig7, fig9 or table1)");
}

}  // namespace bb
