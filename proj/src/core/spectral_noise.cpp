#include "spectral_noise.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>

#include "bridge_static.hpp"
#include "error.hpp"
#include "transient_engine.hpp"

namespace bb {

ToneMeasurement goertzel(std::span<const double> x, double sample_rate, double f) {
  const auto n = x.size();
  if (n == 0) throw Error(ErrorCode::kRecordTooShort, "RECORD_TOO_SHORT: empty record");
  if (!(f >= 0.0 && f < sample_rate / 2.0))
    throw Error(ErrorCode::kInvalidArgument, "goertzel frequency must lie in [0, fs/2)");
  const double cycles = f * static_cast<double>(n) / sample_rate;
  if (std::abs(cycles - std::round(cycles)) > 1e-6 * std::max(1.0, cycles))
    throw Error(ErrorCode::kNonCoherentWindow,
                "NON_COHERENT_WINDOW: " + std::to_string(cycles) + " periods of " + std::to_string(f) +
                    " Hz in the record");
  const double k = std::round(cycles);
  const double w = 2.0 * kPi * k / static_cast<double>(n);
  const double coeff = 2.0 * std::cos(w);

  // Extended precision keeps the recurrence's rounding below the
  // orthogonality floor on long records.
  long double s1 = 0.0L, s2 = 0.0L;
  for (double v : x) {
    const long double s = v + static_cast<long double>(coeff) * s1 - s2;
    s2 = s1;
    s1 = s;
  }
  const std::complex<double> y(static_cast<double>(s1 - s2 * std::cos(w)),
                               static_cast<double>(s2 * std::sin(w)));
  const std::complex<double> bin = y * std::polar(1.0, w);  // coherent: e^{-jw(N-1)} = e^{jw}

  ToneMeasurement m;
  if (k == 0.0) {
    m.amplitude = std::abs(bin) / static_cast<double>(n);
    m.phase = bin.real() < 0.0 ? kPi : 0.0;
    return m;
  }
  m.amplitude = 2.0 * std::abs(bin) / static_cast<double>(n);
  m.phase = std::arg(bin * std::complex<double>(0.0, 1.0));
  return m;
}

// ---------------------------------------------------------------------------

namespace {

struct FftwPlan {
  fftw_plan plan = nullptr;
  ~FftwPlan() {
    if (plan) fftw_destroy_plan(plan);
  }
};

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

Psd welch_psd(std::span<const double> x, double sample_rate, std::size_t segment_len, double overlap) {
  const bool pow2 = segment_len >= 2 && (segment_len & (segment_len - 1)) == 0;
  if (!pow2) throw Error(ErrorCode::kInvalidArgument, "segment_len must be a power of two");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw Error(ErrorCode::kInvalidArgument, "overlap must be in [0, 1)");
  if (segment_len > x.size())
    throw Error(ErrorCode::kRecordTooShort, "RECORD_TOO_SHORT: record of " + std::to_string(x.size()) +
                                                " samples, segment of " + std::to_string(segment_len));

  const std::size_t n = segment_len;
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * (1.0 - overlap))));
  std::vector<double> window(n);
  double wpow = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    window[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n)));
    wpow += window[i] * window[i];
  }

  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * n)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1))));
  FftwPlan plan;
  plan.plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.get(), out.get(), FFTW_ESTIMATE);

  const std::size_t bins = n / 2 + 1;
  Psd psd;
  psd.freq_hz.resize(bins);
  psd.density.assign(bins, 0.0);
  std::size_t segments = 0;
  for (std::size_t start = 0; start + n <= x.size(); start += step) {
    for (std::size_t i = 0; i < n; ++i) in.get()[i] = x[start + i] * window[i];
    fftw_execute(plan.plan);
    for (std::size_t k = 0; k < bins; ++k) {
      const double re = out.get()[k][0], im = out.get()[k][1];
      psd.density[k] += re * re + im * im;
    }
    ++segments;
  }
  const double norm = 1.0 / (sample_rate * wpow * static_cast<double>(segments));
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || k == n / 2;
    psd.density[k] *= norm * (edge ? 1.0 : 2.0);
    psd.freq_hz[k] = static_cast<double>(k) * sample_rate / static_cast<double>(n);
  }
  return psd;
}

double thermal_noise_density(double r, double temperature) {
  if (!(r > 0.0) || !(temperature > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "thermal noise needs r > 0 and T > 0");
  return std::sqrt(4.0 * kBoltzmann * temperature * r);
}

// ---------------------------------------------------------------------------
// PSRR from transient records

double psrr_db_from_gains(double gain_signal, double gain_supply) {
  if (gain_supply <= 1e-9 * gain_signal) return std::numeric_limits<double>::infinity();
  return 20.0 * std::log10(gain_signal / gain_supply);
}

namespace {

std::size_t window_samples(const SimConfig& c, double settle_fraction) {
  const std::size_t n = c.sample_count();
  return n - static_cast<std::size_t>(std::floor(settle_fraction * static_cast<double>(n)));
}

SimConfig strip_ac_sources(SimConfig c) {
  std::erase_if(c.sources, [](const SourceSpec& s) { return s.kind != SourceKind::kDc; });
  return c;
}

std::vector<double> probe_signal(const TimeSeries& ts, const SimConfig& c, Probe probe) {
  if (probe == Probe::kBridge) {
    auto v = ts.channel("v_diff");
    return {v.begin(), v.end()};
  }
  auto d = ts.differential_output();
  for (auto& v : d) v *= c.chain.post_gain;
  return d;
}

double measure_tone(const SimConfig& c, const std::vector<SourceSpec>& extra, double f, Probe probe,
                    double settle) {
  SimConfig run_cfg = c;
  run_cfg.sources.insert(run_cfg.sources.end(), extra.begin(), extra.end());
  const auto ts = run(run_cfg);
  const double tones[] = {f};
  const auto win = settle_and_window(ts, settle, tones);
  return goertzel(probe_signal(win, c, probe), win.sample_rate(), f).amplitude;
}

struct RawPsrr {
  double gain_signal, gain_supply;
};

// Tone amplitudes at or below this many volts per volt of Vcc (referred to the
// bridge) are rounding residue and read as zero.
constexpr double kToneFloor = 1e-10;

double supply_gain_or_zero(const SimConfig& c, Probe probe, double amplitude, double eps) {
  double floor = kToneFloor * c.bridge.vcc_dc;
  if (probe == Probe::kOutput) floor *= c.chain.post_gain * c.amp.gain_dc * c.chain.lna_gain;
  return amplitude <= floor ? 0.0 : amplitude / eps;
}

RawPsrr measure_once(const SimConfig& base, double f_sig, double f_sup, const PsrrOptions& o,
                     double scale) {
  const double delta = o.signal_amplitude * scale;
  const double eps = o.supply_amplitude * scale;
  const SourceSpec sig{SourceKind::kTone, SourceTarget::kDeltaR, delta, f_sig, std::nullopt};
  const SourceSpec sup{SourceKind::kTone, o.disturbed_rail, eps, f_sup, std::nullopt};
  if (f_sig == f_sup) {
    const double a_sig = measure_tone(base, {sig}, f_sig, o.probe, o.settle_fraction);
    const double a_sup = measure_tone(base, {sup}, f_sup, o.probe, o.settle_fraction);
    return {a_sig / delta, supply_gain_or_zero(base, o.probe, a_sup, eps)};
  }
  SimConfig c = base;
  c.sources.push_back(sig);
  c.sources.push_back(sup);
  const auto ts = run(c);
  const double tones[] = {f_sig, f_sup};
  const auto win = settle_and_window(ts, o.settle_fraction, tones);
  const auto x = probe_signal(win, base, o.probe);
  return {goertzel(x, win.sample_rate(), f_sig).amplitude / delta,
          supply_gain_or_zero(base, o.probe, goertzel(x, win.sample_rate(), f_sup).amplitude, eps)};
}

bool harmonically_related(double a, double b) {
  const double lo = std::min(a, b), hi = std::max(a, b);
  for (int h = 2; h <= 5; ++h)
    if (std::abs(hi - h * lo) <= 1e-9 * hi) return true;
  return false;
}

}  // namespace

double coherent_frequency(const SimConfig& config, double f, double settle_fraction) {
  const double window_s = static_cast<double>(window_samples(config, settle_fraction)) / config.sample_rate;
  const double cycles = std::max(1.0, std::round(f * window_s));
  return cycles / window_s;
}

PsrrReport psrr_from_transient(const SimConfig& config, double f_signal, double f_supply,
                               const PsrrOptions& opt) {
  if (opt.disturbed_rail == SourceTarget::kDeltaR)
    throw Error(ErrorCode::kInvalidArgument, "disturbed rail must be VCC or GND");
  const SimConfig base = strip_ac_sources(validate(config));
  const double fs = coherent_frequency(base, f_signal, opt.settle_fraction);
  const double fp = coherent_frequency(base, f_supply, opt.settle_fraction);
  if (fs != fp && harmonically_related(fs, fp))
    throw Error(ErrorCode::kInvalidArgument,
                "signal and supply tones are harmonically related (order <= 5)");

  const auto full = measure_once(base, fs, fp, opt, 1.0);
  PsrrReport r;
  r.freq_hz = fp;
  r.f_signal = fs;
  r.gain_signal = full.gain_signal;
  r.gain_supply = full.gain_supply;
  r.psrr_db = psrr_db_from_gains(full.gain_signal, full.gain_supply);
  r.topology = base.topology;

  if (opt.linearity_guard) {
    const auto half = measure_once(base, fs, fp, opt, 0.5);
    const double half_db = psrr_db_from_gains(half.gain_signal, half.gain_supply);
    const bool both_inf = std::isinf(half_db) && std::isinf(r.psrr_db);
    if (!both_inf && !(std::abs(half_db - r.psrr_db) < 0.1))
      throw Error(ErrorCode::kNonlinearRegime,
                  "NONLINEAR_REGIME: halving the test tones moved PSRR from " + std::to_string(r.psrr_db) +
                      " dB to " + std::to_string(half_db) + " dB");
  }
  return r;
}

std::vector<PsrrReport> psrr_sweep(const SimConfig& config, const std::vector<double>& f_grid,
                                   double f_signal, const PsrrOptions& opt) {
  if (f_grid.empty()) throw Error(ErrorCode::kInvalidArgument, "empty frequency grid");
  for (double f : f_grid)
    if (!(f > 0.0 && f <= config.sample_rate / 20.0))
      throw Error(ErrorCode::kInvalidArgument, "sweep frequency outside (0, sample_rate/20]");
  std::vector<PsrrReport> out;
  out.reserve(f_grid.size());
  for (double f : f_grid) out.push_back(psrr_from_transient(config, f_signal, f, opt));
  return out;
}

// ---------------------------------------------------------------------------
// Noise budget

Linearization linearize(const SimConfig& config, double analysis_f) {
  const SimConfig c = validate(config);
  Linearization lin;
  lin.freq_hz = analysis_f;
  const auto open = sensitivities(c.bridge);
  if (c.topology == Topology::kOpenBridge) {
    const double g = c.amp.gain_dc * c.chain.lna_gain;
    const double x = analysis_f / c.amp.pole_hz;
    lin.gain_supply = std::abs(open.dv_dvcc);
    lin.gain_ground = std::abs(open.dv_dvcc);
    lin.chain_gain = g / std::sqrt(1.0 + x * x) * c.chain.post_gain;
    return lin;
  }
  PsrrOptions o;
  o.probe = Probe::kOutput;
  o.linearity_guard = false;
  const auto vcc = psrr_from_transient(c, analysis_f, analysis_f, o);
  const double out_per_ohm = vcc.gain_signal;
  lin.freq_hz = vcc.freq_hz;
  lin.chain_gain = out_per_ohm / std::abs(open.dv_ddr);
  lin.gain_supply = vcc.gain_supply / lin.chain_gain;
  if (c.noise.ground_noise_density > 0.0) {
    o.disturbed_rail = SourceTarget::kGnd;
    const auto gnd = psrr_from_transient(c, analysis_f, analysis_f, o);
    lin.gain_ground = gnd.gain_supply / lin.chain_gain;
  }
  return lin;
}

NoiseBudget noise_budget(const SimConfig& config, const Linearization& lin) {
  const auto& b = config.bridge;
  NoiseBudget nb;
  nb.freq_hz = lin.freq_hz;
  nb.chain_gain = lin.chain_gain;
  const double r_eq = b.r1 * b.r3 / (b.r1 + b.r3) + b.r2 * b.r4 / (b.r2 + b.r4);
  nb.bridge_thermal = thermal_noise_density(r_eq, config.noise.temperature) * lin.chain_gain;
  const double first_stage =
      config.chain.has_lna() ? config.chain.lna_noise_density : config.amp.input_noise_density;
  nb.amp_input = first_stage * lin.chain_gain;
  nb.supply_injected = config.noise.supply_noise_density * lin.gain_supply * lin.chain_gain;
  nb.ground_injected = config.noise.ground_noise_density * lin.gain_ground * lin.chain_gain;
  nb.total_output = std::sqrt(nb.bridge_thermal * nb.bridge_thermal + nb.amp_input * nb.amp_input +
                              nb.supply_injected * nb.supply_injected +
                              nb.ground_injected * nb.ground_injected);
  nb.input_referred = nb.total_output / lin.chain_gain;
  const double injected = std::hypot(nb.supply_injected, nb.ground_injected);
  const double intrinsic = std::hypot(nb.bridge_thermal, nb.amp_input);
  nb.resolution_note = injected > intrinsic ? "limited by rail noise rejection"
                                            : "limited by intrinsic noise";
  return nb;
}

NoiseBudget noise_budget(const SimConfig& config, double analysis_f) {
  return noise_budget(config, linearize(config, analysis_f));
}

}  // namespace bb
