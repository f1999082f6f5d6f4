#include "transient_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "error.hpp"
#include "mos_triode.hpp"
#include "network.hpp"

namespace bb {

// ---------------------------------------------------------------------------
// TimeSeries

TimeSeries::TimeSeries(double sample_rate, std::size_t length)
    : sample_rate_(sample_rate), length_(length),
      data_(std::size(kChannelNames), std::vector<double>(length, 0.0)) {}

std::size_t TimeSeries::index_of(std::string_view name) {
  for (std::size_t i = 0; i < std::size(kChannelNames); ++i)
    if (kChannelNames[i] == name) return i;
  throw Error(ErrorCode::kInvalidArgument, "unknown channel '" + std::string(name) + "'");
}

std::span<const double> TimeSeries::channel(std::string_view name) const {
  return data_.at(index_of(name));
}

std::span<double> TimeSeries::channel(std::string_view name) { return data_.at(index_of(name)); }

std::vector<std::string_view> TimeSeries::names() const {
  return {std::begin(kChannelNames), std::end(kChannelNames)};
}

std::vector<double> TimeSeries::differential_output() const {
  auto p = channel("out_p");
  auto n = channel("out_n");
  std::vector<double> d(length_);
  for (std::size_t i = 0; i < length_; ++i) d[i] = p[i] - n[i];
  return d;
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t count) const {
  if (first + count > length_) throw Error(ErrorCode::kInvalidArgument, "slice out of range");
  TimeSeries out(sample_rate_, count);
  out.t0_ = t0_ + static_cast<double>(first) / sample_rate_;
  for (std::size_t c = 0; c < data_.size(); ++c)
    std::copy_n(data_[c].begin() + static_cast<std::ptrdiff_t>(first), count, out.data_[c].begin());
  return out;
}

// ---------------------------------------------------------------------------
// Mechanical resonator

namespace {

struct Resonator {
  double w0, damping;
  // x'' = w0^2 (drive - x) - (w0/Q) x'
  std::array<double, 2> deriv(double x, double v, double drive) const {
    return {v, w0 * w0 * (drive - x) - damping * v};
  }
};

}  // namespace

std::vector<double> mech_delta_r(const SensorParams& s, const std::function<double(double)>& drive,
                                 double t0, double dt, std::size_t samples) {
  if (!(s.f_res > 0.0) || !(s.q_factor > 0.5) || !(dt > 0.0))
    throw Error(ErrorCode::kInvalidArgument, "mech_delta_r needs f_res > 0, Q > 0.5, dt > 0");
  const double w0 = 2.0 * kPi * s.f_res;
  const Resonator r{w0, w0 / s.q_factor};
  std::vector<double> out(samples);
  double x = 0.0, v = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    const double t = t0 + static_cast<double>(n) * dt;
    out[n] = s.force_to_dr * x;
    const double d0 = drive(t), dh = drive(t + 0.5 * dt), d1 = drive(t + dt);
    const auto k1 = r.deriv(x, v, d0);
    const auto k2 = r.deriv(x + 0.5 * dt * k1[0], v + 0.5 * dt * k1[1], dh);
    const auto k3 = r.deriv(x + 0.5 * dt * k2[0], v + 0.5 * dt * k2[1], dh);
    const auto k4 = r.deriv(x + dt * k3[0], v + dt * k3[1], d1);
    x += dt / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    v += dt / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    if (!std::isfinite(x) || !std::isfinite(v) || std::abs(x) > 1e12)
      throw Error(ErrorCode::kDiverged, "DIVERGED: resonator state blew up at t = " + std::to_string(t));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Circuit simulation

namespace {

enum StateIndex { kOutP, kOutN, kGateUP, kGateUN, kMechX, kMechV, kStateSize };
using State = std::array<double, kStateSize>;

struct Snapshot {
  double vcc = 0.0, gnd = 0.0, v_diff = 0.0;
  double gate_p = 0.0, gate_n = 0.0;  // absolute gate voltages (branch B, branch A)
  double vgs_p = 0.0, vgs_n = 0.0;
  bool triode = true;
};

class Engine {
 public:
  explicit Engine(const SimConfig& c)
      : c_(c), dt_(1.0 / c.sample_rate), gain_(c.amp.gain_dc * c.chain.lna_gain),
        w_amp_(2.0 * kPi * c.amp.pole_hz) {
    if (c.sensor) {
      const double w0 = 2.0 * kPi * c.sensor->f_res;
      res_ = Resonator{w0, w0 / c.sensor->q_factor};
    }
    if (c.mos) gate_ref_ = network::gate_reference(*c.mos, c.bridge.vcc_dc);
    for (const auto& s : c.sources) {
      if (s.kind == SourceKind::kWhiteNoise) {
        noise_.push_back({std::mt19937_64(*s.seed), std::normal_distribution<double>(0.0, 1.0),
                          s.amplitude * std::sqrt(c.sample_rate / 2.0), 0.0});
      }
    }
  }

  TimeSeries run() {
    const std::size_t n = c_.sample_count();
    TimeSeries ts(c_.sample_rate, n);
    auto ch_vcc = ts.channel("vcc");
    auto ch_gnd = ts.channel("gnd");
    auto ch_op = ts.channel("out_p");
    auto ch_on = ts.channel("out_n");
    auto ch_vd = ts.channel("v_diff");
    auto ch_gp = ts.channel("v_gate_p");
    auto ch_gn = ts.channel("v_gate_n");

    State x{};
    if (c_.topology == Topology::kRcCompensated) x[kGateUP] = x[kGateUN] = gate_ref_ - c_.bridge.vcc_dc;
    const double limit = 1e6 * c_.bridge.vcc_dc;

    for (std::size_t i = 0; i < n; ++i) {
      const double t = static_cast<double>(i) * dt_;
      for (auto& ns : noise_) ns.held = ns.scale * ns.dist(ns.rng);

      State k1, k2, k3, k4;
      const Snapshot snap = deriv(t, x, k1);
      ch_vcc[i] = snap.vcc;
      ch_gnd[i] = snap.gnd;
      ch_op[i] = x[kOutP];
      ch_on[i] = x[kOutN];
      ch_vd[i] = snap.v_diff;
      ch_gp[i] = snap.gate_p;
      ch_gn[i] = snap.gate_n;

      deriv(t + 0.5 * dt_, axpy(x, 0.5 * dt_, k1), k2);
      deriv(t + 0.5 * dt_, axpy(x, 0.5 * dt_, k2), k3);
      deriv(t + dt_, axpy(x, dt_, k3), k4);
      for (int j = 0; j < kStateSize; ++j)
        x[j] += dt_ / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);

      for (double v : x) {
        if (!std::isfinite(v) || std::abs(v) > limit)
          throw Error(ErrorCode::kDiverged, "DIVERGED at t = " + std::to_string(t + dt_) + " s");
      }
    }
    return ts;
  }

 private:
  struct NoiseSource {
    std::mt19937_64 rng;
    std::normal_distribution<double> dist;
    double scale;  // density * sqrt(fs / 2)
    double held;
  };

  static State axpy(const State& x, double a, const State& k) {
    State y;
    for (int j = 0; j < kStateSize; ++j) y[j] = x[j] + a * k[j];
    return y;
  }

  Snapshot deriv(double t, const State& x, State& dx) const {
    Snapshot s;
    s.vcc = c_.bridge.vcc_dc;
    double delta_r = 0.0, drive = 0.0;
    std::size_t noise_idx = 0;
    for (const auto& src : c_.sources) {
      double v = 0.0;
      switch (src.kind) {
        case SourceKind::kDc: v = src.amplitude; break;
        case SourceKind::kTone: v = src.amplitude * std::sin(2.0 * kPi * src.frequency * t); break;
        case SourceKind::kWhiteNoise: v = noise_[noise_idx++].held; break;
        case SourceKind::kMechResonator: {
          const double shape = src.frequency > 0.0 ? std::sin(2.0 * kPi * src.frequency * t) : 1.0;
          drive += src.amplitude * c_.sensor->drive_amp * shape;
          continue;
        }
      }
      switch (src.target) {
        case SourceTarget::kVcc: s.vcc += v; break;
        case SourceTarget::kGnd: s.gnd += v; break;
        case SourceTarget::kDeltaR: delta_r += v; break;
      }
    }
    dx.fill(0.0);
    if (res_) {
      const auto d = res_->deriv(x[kMechX], x[kMechV], drive);
      dx[kMechX] = d[0];
      dx[kMechV] = d[1];
      delta_r += c_.sensor->force_to_dr * x[kMechX];
    }

    const network::Rails rails{s.vcc, s.gnd};
    const network::Arms arms{c_.bridge.r1 + delta_r, c_.bridge.r2, c_.bridge.r3, c_.bridge.r4};
    network::Devices dev;
    const bool on_top = c_.topology != Topology::kNmosFeedback;

    if (uses_feedback(c_.topology)) {
      const auto& m = *c_.mos;
      const bool fb = c_.chain.feedback_enabled;
      const double drive_p = fb ? x[kOutP] : 0.0;
      const double drive_n = fb ? x[kOutN] : 0.0;
      switch (c_.topology) {
        case Topology::kPmosFeedback:
          s.gate_p = gate_ref_ + drive_p;
          s.gate_n = gate_ref_ + drive_n;
          s.vgs_p = s.vcc - s.gate_p;
          s.vgs_n = s.vcc - s.gate_n;
          break;
        case Topology::kNmosFeedback:
          s.gate_p = gate_ref_ + drive_p;
          s.gate_n = gate_ref_ + drive_n;
          s.vgs_p = s.gate_p - s.gnd;
          s.vgs_n = s.gate_n - s.gnd;
          break;
        case Topology::kRcCompensated: {
          const double tau = c_.rc->tau();
          s.gate_p = s.vcc + x[kGateUP];
          s.gate_n = s.vcc + x[kGateUN];
          s.vgs_p = -x[kGateUP];
          s.vgs_n = -x[kGateUN];
          dx[kGateUP] = (gate_ref_ + drive_p - x[kGateUP] - s.vcc) / tau;
          dx[kGateUN] = (gate_ref_ + drive_n - x[kGateUN] - s.vcc) / tau;
          break;
        }
        case Topology::kOpenBridge: break;
      }
      const auto pb = rds_unchecked(m, s.vgs_p);  // branch B
      const auto pa = rds_unchecked(m, s.vgs_n);  // branch A
      if (!pa.in_triode || !pb.in_triode) {
        throw CutoffError("CUTOFF: feedback device left triode at t = " + std::to_string(t) +
                              " s (|Vgs| = " + std::to_string(std::min(s.vgs_p, s.vgs_n)) + " V)",
                          t);
      }
      if (on_top) {
        dev.upper_a = pa.rds;
        dev.upper_b = pb.rds;
      } else {
        dev.lower_a = pa.rds;
        dev.lower_b = pb.rds;
      }
    }

    const auto nodes = network::resolve(rails, arms, dev, on_top);
    s.v_diff = nodes.v_diff;
    const double target = std::clamp(-gain_ * s.v_diff, -c_.amp.sat_v, c_.amp.sat_v);
    dx[kOutP] = w_amp_ * (0.5 * target - x[kOutP]);
    dx[kOutN] = w_amp_ * (-0.5 * target - x[kOutN]);
    return s;
  }

  SimConfig c_;
  double dt_;
  double gain_;
  double w_amp_;
  double gate_ref_ = 0.0;
  std::optional<Resonator> res_;
  std::vector<NoiseSource> noise_;
};

}  // namespace

TimeSeries run(const SimConfig& config) {
  Engine engine(validate(config));
  return engine.run();
}

SimConfig with_seed(SimConfig config, std::uint64_t seed) {
  std::uint64_t k = 0;
  for (auto& s : config.sources) {
    // Distinct streams per noise source, all derived from the override.
    if (s.kind == SourceKind::kWhiteNoise) s.seed = seed + 0x9E3779B97F4A7C15ull * k++;
  }
  return config;
}

TimeSeries settle_and_window(const TimeSeries& ts, double settle_fraction,
                             std::span<const double> tones) {
  if (!(settle_fraction >= 0.0 && settle_fraction < 1.0))
    throw Error(ErrorCode::kInvalidArgument, "settle_fraction must be in [0, 1)");
  const auto drop = static_cast<std::size_t>(std::floor(settle_fraction * static_cast<double>(ts.size())));
  std::size_t keep = ts.size() - drop;
  if (tones.empty()) return ts.slice(drop, keep);

  const double f_lo = *std::min_element(tones.begin(), tones.end());
  if (!(f_lo > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tone frequencies must be positive");
  const double fs = ts.sample_rate();
  const double samples_per_period = fs / f_lo;
  const auto max_periods = static_cast<long long>(std::floor(static_cast<double>(keep) / samples_per_period + 1e-9));
  if (max_periods < 16)
    throw Error(ErrorCode::kWindowTooShort,
                "WINDOW_TOO_SHORT: " + std::to_string(max_periods) + " periods of " +
                    std::to_string(f_lo) + " Hz remain (need 16)");
  for (long long p = max_periods; p >= 16; --p) {
    const double m = static_cast<double>(p) * samples_per_period;
    if (std::abs(m - std::round(m)) <= 1e-9 * m) {
      const auto count = static_cast<std::size_t>(std::llround(m));
      return ts.slice(ts.size() - count, count);
    }
  }
  throw Error(ErrorCode::kNonCoherentWindow,
              "NON_COHERENT_WINDOW: no whole-period window of " + std::to_string(f_lo) +
                  " Hz fits the sample grid");
}

}  // namespace bb
