#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "model_config.hpp"

namespace bb {

/// Uniformly sampled record with named, equal-length channels.
class TimeSeries {
 public:
  static constexpr std::string_view kChannelNames[] = {"vcc",   "gnd",      "out_p",   "out_n",
                                                       "v_diff", "v_gate_p", "v_gate_n"};

  TimeSeries() = default;
  TimeSeries(double sample_rate, std::size_t length);

  double sample_rate() const { return sample_rate_; }
  std::size_t size() const { return length_; }
  double t0() const { return t0_; }
  void set_t0(double t0) { t0_ = t0; }

  std::span<const double> channel(std::string_view name) const;
  std::span<double> channel(std::string_view name);
  std::vector<std::string_view> names() const;

  /// out_p - out_n
  std::vector<double> differential_output() const;

  /// Copy of samples [first, first + count).
  TimeSeries slice(std::size_t first, std::size_t count) const;

  bool operator==(const TimeSeries&) const = default;

 private:
  static std::size_t index_of(std::string_view name);

  double sample_rate_ = 0.0;
  double t0_ = 0.0;
  std::size_t length_ = 0;
  std::vector<std::vector<double>> data_;
};

/// Integrates x'' + (w0/Q) x' + w0^2 x = w0^2 drive(t) with RK4 on the
/// uniform grid t0 + n dt and returns force_to_dr * x(t_n).
std::vector<double> mech_delta_r(const SensorParams& s, const std::function<double(double)>& drive,
                                 double t0, double dt, std::size_t samples);

/// Fixed-step RK4 simulation of one topology. Throws DIVERGED or a
/// CutoffError carrying the simulation time.
TimeSeries run(const SimConfig& config);

/// Replaces every noise source seed.
SimConfig with_seed(SimConfig config, std::uint64_t seed);

/// Drops the leading settle_fraction of the record. When tone frequencies are
/// given, the tail is further trimmed (from the front) to the largest whole
/// number of periods of the lowest tone that is also a whole number of
/// samples. Throws WINDOW_TOO_SHORT below 16 periods.
TimeSeries settle_and_window(const TimeSeries& ts, double settle_fraction = 0.5,
                             std::span<const double> tones = {});

}  // namespace bb
