#include "model_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "error.hpp"

namespace bb {

BridgeParams BridgeParams::with_mismatch(double r_nominal, double delta_r, double vcc) {
  BridgeParams b;
  b.r_nominal = r_nominal;
  b.r1 = r_nominal + delta_r;
  b.r2 = b.r3 = b.r4 = r_nominal;
  b.vcc_dc = vcc;
  return b;
}

std::size_t SimConfig::sample_count() const {
  const double n = duration * sample_rate;
  if (!std::isfinite(n) || n < 0.0) return 0;
  return static_cast<std::size_t>(std::llround(n));
}

double SimConfig::max_source_frequency() const {
  double f = 0.0;
  for (const auto& s : sources) f = std::max(f, s.frequency);
  return f;
}

bool uses_feedback(Topology t) { return t != Topology::kOpenBridge; }

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::kOpenBridge: return "OPEN_BRIDGE";
    case Topology::kPmosFeedback: return "PMOS_FEEDBACK";
    case Topology::kNmosFeedback: return "NMOS_FEEDBACK";
    case Topology::kRcCompensated: return "RC_COMPENSATED";
  }
  return "?";
}

std::string_view to_string(Polarity p) { return p == Polarity::kPmos ? "PMOS" : "NMOS"; }

std::string_view to_string(SourceKind k) {
  switch (k) {
    case SourceKind::kDc: return "DC";
    case SourceKind::kTone: return "TONE";
    case SourceKind::kWhiteNoise: return "WHITE_NOISE";
    case SourceKind::kMechResonator: return "MECH_RESONATOR";
  }
  return "?";
}

std::string_view to_string(SourceTarget t) {
  switch (t) {
    case SourceTarget::kVcc: return "VCC";
    case SourceTarget::kGnd: return "GND";
    case SourceTarget::kDeltaR: return "DELTA_R";
  }
  return "?";
}

std::optional<Topology> parse_topology(std::string_view s) {
  for (auto t : {Topology::kOpenBridge, Topology::kPmosFeedback, Topology::kNmosFeedback,
                 Topology::kRcCompensated})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

std::optional<Polarity> parse_polarity(std::string_view s) {
  if (s == "PMOS") return Polarity::kPmos;
  if (s == "NMOS") return Polarity::kNmos;
  return std::nullopt;
}

std::optional<SourceKind> parse_source_kind(std::string_view s) {
  for (auto k : {SourceKind::kDc, SourceKind::kTone, SourceKind::kWhiteNoise,
                 SourceKind::kMechResonator})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

std::optional<SourceTarget> parse_source_target(std::string_view s) {
  for (auto t : {SourceTarget::kVcc, SourceTarget::kGnd, SourceTarget::kDeltaR})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Validation

namespace {

class Violations {
 public:
  void require(bool ok, std::string what) {
    if (!ok) list_.push_back(std::move(what));
  }
  std::vector<std::string> take() { return std::move(list_); }

 private:
  std::vector<std::string> list_;
};

bool positive(double x) { return std::isfinite(x) && x > 0.0; }
bool non_negative(double x) { return std::isfinite(x) && x >= 0.0; }

std::string fmt_g(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace

std::vector<std::string> check(const SimConfig& c) {
  Violations v;
  const auto& b = c.bridge;
  v.require(positive(b.r1), "r1 > 0");
  v.require(positive(b.r2), "r2 > 0");
  v.require(positive(b.r3), "r3 > 0");
  v.require(positive(b.r4), "r4 > 0");
  v.require(positive(b.r_nominal), "r_nominal > 0");
  v.require(positive(b.vcc_dc), "vcc_dc > 0");
  v.require(std::isfinite(b.delta_r()), "delta_r finite");

  const auto& a = c.amp;
  v.require(positive(a.gain_dc), "amp.gain_dc > 0");
  v.require(positive(a.pole_hz), "amp.pole_hz > 0");
  v.require(positive(a.sat_v), "amp.sat_v > 0");
  v.require(non_negative(a.input_noise_density), "amp.input_noise_density >= 0");
  v.require(positive(c.chain.lna_gain), "chain.lna_gain > 0");
  v.require(non_negative(c.chain.lna_noise_density), "chain.lna_noise_density >= 0");
  v.require(positive(c.chain.post_gain), "chain.post_gain > 0");

  const double fs = c.sample_rate;
  v.require(positive(fs), "sample_rate > 0");
  v.require(positive(c.duration), "duration > 0");

  if (uses_feedback(c.topology)) {
    v.require(c.mos.has_value(), "mos section required for " + std::string(to_string(c.topology)));
    if (c.mos) {
      const auto& m = *c.mos;
      v.require(positive(m.kprime_wl), "mos.kprime_wl > 0");
      v.require(positive(m.vth_abs), "mos.vth_abs > 0");
      v.require(std::isfinite(m.vgs_bias_abs) && m.vgs_bias_abs > m.vth_abs,
                "mos.vgs_bias_abs > mos.vth_abs");
      const Polarity want =
          c.topology == Topology::kNmosFeedback ? Polarity::kNmos : Polarity::kPmos;
      v.require(m.polarity == want, "mos.polarity = " + std::string(to_string(want)) + " for " +
                                        std::string(to_string(c.topology)));
    }
  }
  if (c.topology == Topology::kRcCompensated) {
    v.require(c.rc.has_value(), "rc section required for RC_COMPENSATED");
    if (c.rc) {
      v.require(positive(c.rc->r_filter), "rc.r_filter > 0");
      v.require(positive(c.rc->c_filter), "rc.c_filter > 0");
      const double fc = c.rc->corner_hz();
      v.require(std::isfinite(fc), "rc corner frequency finite");
      if (positive(fs) && std::isfinite(fc))
        v.require(fc <= fs / 20.0, "rc corner <= sample_rate/20 (needs <= " + fmt_g(fs / 20.0) + " Hz)");
    }
  }
  if (positive(fs) && positive(a.pole_hz))
    v.require(a.pole_hz <= fs / 20.0,
              "amp.pole_hz <= sample_rate/20 (needs <= " + fmt_g(fs / 20.0) + " Hz)");

  if (c.sensor) {
    const auto& s = *c.sensor;
    v.require(positive(s.f_res), "sensor.f_res > 0");
    v.require(std::isfinite(s.q_factor) && s.q_factor > 0.5, "sensor.q_factor > 0.5");
    v.require(std::isfinite(s.force_to_dr), "sensor.force_to_dr finite");
    v.require(std::isfinite(s.drive_amp), "sensor.drive_amp finite");
    if (positive(fs) && positive(s.f_res))
      v.require(s.f_res <= fs / 20.0, "sensor.f_res <= sample_rate/20");
  }

  const auto& n = c.noise;
  v.require(positive(n.temperature), "noise.temperature > 0");
  v.require(non_negative(n.supply_noise_density), "noise.supply_noise_density >= 0");
  v.require(non_negative(n.ground_noise_density), "noise.ground_noise_density >= 0");
  v.require(positive(n.supply_noise_band), "noise.supply_noise_band > 0");

  for (std::size_t i = 0; i < c.sources.size(); ++i) {
    const auto& s = c.sources[i];
    const std::string tag = "source[" + std::to_string(i) + "]";
    v.require(std::isfinite(s.amplitude), tag + ".amplitude finite");
    v.require(non_negative(s.frequency), tag + ".frequency >= 0");
    if (s.kind == SourceKind::kTone) v.require(positive(s.frequency), tag + ".frequency > 0 for TONE");
    if (s.kind == SourceKind::kWhiteNoise) v.require(s.seed.has_value(), tag + ".seed set for WHITE_NOISE");
    if (s.kind == SourceKind::kMechResonator) {
      v.require(c.sensor.has_value(), tag + " MECH_RESONATOR requires a sensor section");
      v.require(s.target == SourceTarget::kDeltaR, tag + " MECH_RESONATOR targets DELTA_R");
    }
  }
  const double fmax = c.max_source_frequency();
  if (positive(fs) && fmax > 0.0)
    v.require(fs >= 50.0 * fmax, "sample_rate >= 50 x max source frequency (needs >= " +
                                     fmt_g(50.0 * fmax) + " Hz)");

  if (positive(fs) && positive(c.duration)) {
    const double n_samp = c.duration * fs;
    const bool integral = std::abs(n_samp - std::round(n_samp)) <= 1e-6 * std::max(1.0, n_samp);
    v.require(integral, "duration x sample_rate is an integer");
    v.require(n_samp >= 1024.0 - 1e-6, "duration x sample_rate >= 1024 samples");
  }
  return v.take();
}

SimConfig validate(const SimConfig& config) {
  auto violations = check(config);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  return config;
}

// ---------------------------------------------------------------------------
// Text format

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + msg);
}

double to_double(std::string_view s, int line) {
  double out = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  if (ec != std::errc() || ptr != end) parse_fail(line, "expected a number, got '" + std::string(s) + "'");
  return out;
}

std::uint64_t to_u64(std::string_view s, int line) {
  std::uint64_t out = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  if (ec != std::errc() || ptr != end) parse_fail(line, "expected an unsigned integer, got '" + std::string(s) + "'");
  return out;
}

bool to_bool(std::string_view s, int line) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  parse_fail(line, "expected true/false, got '" + std::string(s) + "'");
}

template <class T>
T to_enum(std::optional<T> parsed, std::string_view raw, int line) {
  if (!parsed) parse_fail(line, "unknown value '" + std::string(raw) + "'");
  return *parsed;
}


struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  std::string name;
  int line = 0;
  std::map<std::string, Entry, std::less<>> keys;

  const Entry* find(std::string_view key) {
    auto it = keys.find(key);
    if (it == keys.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }
  void get(std::string_view key, double& out) {
    if (const auto* e = find(key)) out = to_double(e->value, e->line);
  }
  std::optional<double> opt(std::string_view key) {
    if (const auto* e = find(key)) return to_double(e->value, e->line);
    return std::nullopt;
  }
  void reject_unused() const {
    for (const auto& [k, e] : keys)
      if (!e.used) parse_fail(e.line, "unknown key '" + k + "' in [" + name + "]");
  }
};

std::vector<Section> split_sections(std::string_view text) {
  std::vector<Section> out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find_first_of("#;"); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') parse_fail(line_no, "unterminated section header");
      out.push_back(Section{std::string(trim(line.substr(1, line.size() - 2))), line_no, {}});
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) parse_fail(line_no, "expected 'key = value'");
      if (out.empty()) parse_fail(line_no, "key outside of any [section]");
      std::string key(trim(line.substr(0, eq)));
      std::string value(trim(line.substr(eq + 1)));
      if (key.empty()) parse_fail(line_no, "empty key");
      if (value.empty()) parse_fail(line_no, "empty value for '" + key + "'");
      auto [it, inserted] = out.back().keys.emplace(key, Entry{value, line_no, false});
      if (!inserted) parse_fail(line_no, "duplicate key '" + key + "'");
    }
    if (nl == text.size()) break;
  }
  return out;
}

void apply_bridge(Section& s, SimConfig& c) {
  auto r1 = s.opt("r1"), r2 = s.opt("r2"), r3 = s.opt("r3"), r4 = s.opt("r4");
  auto rn = s.opt("r_nominal");
  auto dr = s.opt("delta_r");
  s.get("vcc_dc", c.bridge.vcc_dc);
  if (dr && r1) parse_fail(s.find("delta_r")->line, "set either r1 or delta_r, not both");
  auto& b = c.bridge;
  if (rn) b.r_nominal = *rn;
  b.r1 = r1 ? *r1 : b.r_nominal + dr.value_or(0.0);
  b.r2 = r2.value_or(b.r_nominal);
  b.r3 = r3.value_or(b.r_nominal);
  b.r4 = r4.value_or(b.r_nominal);
}

}  // namespace

SimConfig parse_config(std::string_view text) {
  SimConfig c;
  bool seen_mos = false, seen_rc = false;
  for (auto& s : split_sections(text)) {
    if (s.name == "sim") {
      if (const auto* e = s.find("topology"))
        c.topology = to_enum(parse_topology(e->value), e->value, e->line);
      s.get("sample_rate", c.sample_rate);
      s.get("duration", c.duration);
    } else if (s.name == "bridge") {
      apply_bridge(s, c);
    } else if (s.name == "mos") {
      MosParams m;
      if (const auto* e = s.find("polarity")) m.polarity = to_enum(parse_polarity(e->value), e->value, e->line);
      s.get("kprime_wl", m.kprime_wl);
      s.get("vth_abs", m.vth_abs);
      s.get("vgs_bias_abs", m.vgs_bias_abs);
      c.mos = m;
      seen_mos = true;
    } else if (s.name == "amp") {
      s.get("gain_dc", c.amp.gain_dc);
      s.get("pole_hz", c.amp.pole_hz);
      s.get("sat_v", c.amp.sat_v);
      s.get("input_noise_density", c.amp.input_noise_density);
    } else if (s.name == "chain") {
      s.get("lna_gain", c.chain.lna_gain);
      s.get("lna_noise_density", c.chain.lna_noise_density);
      s.get("post_gain", c.chain.post_gain);
      if (const auto* e = s.find("feedback_enabled")) c.chain.feedback_enabled = to_bool(e->value, e->line);
    } else if (s.name == "rc") {
      RcParams r;
      s.get("r_filter", r.r_filter);
      s.get("c_filter", r.c_filter);
      c.rc = r;
      seen_rc = true;
    } else if (s.name == "sensor") {
      SensorParams p;
      s.get("f_res", p.f_res);
      s.get("q_factor", p.q_factor);
      s.get("force_to_dr", p.force_to_dr);
      s.get("drive_amp", p.drive_amp);
      c.sensor = p;
    } else if (s.name == "noise") {
      s.get("temperature", c.noise.temperature);
      s.get("supply_noise_density", c.noise.supply_noise_density);
      s.get("supply_noise_band", c.noise.supply_noise_band);
      s.get("ground_noise_density", c.noise.ground_noise_density);
    } else if (s.name == "source") {
      SourceSpec src;
      if (const auto* e = s.find("kind")) src.kind = to_enum(parse_source_kind(e->value), e->value, e->line);
      if (const auto* e = s.find("target")) src.target = to_enum(parse_source_target(e->value), e->value, e->line);
      s.get("amplitude", src.amplitude);
      s.get("frequency", src.frequency);
      if (const auto* e = s.find("seed")) src.seed = to_u64(e->value, e->line);
      c.sources.push_back(src);
    } else {
      parse_fail(s.line, "unknown section [" + s.name + "]");
    }
    s.reject_unused();
  }
  // Feedback topologies get default device/filter models when the file omits them.
  if (!seen_mos && uses_feedback(c.topology)) {
    MosParams m;
    if (c.topology == Topology::kNmosFeedback) m.polarity = Polarity::kNmos;
    c.mos = m;
  }
  if (!seen_rc && c.topology == Topology::kRcCompensated) c.rc = RcParams{};
  return c;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const Error& e) {
    throw Error(e.code(), path + ": " + e.what());
  }
}

namespace {
std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}
}  // namespace

std::string to_text(const SimConfig& c) {
  std::ostringstream o;
  o << "[sim]\n"
    << "topology = " << to_string(c.topology) << "\n"
    << "sample_rate = " << num(c.sample_rate) << "\n"
    << "duration = " << num(c.duration) << "\n\n";
  const auto& b = c.bridge;
  o << "[bridge]\n"
    << "r1 = " << num(b.r1) << "\nr2 = " << num(b.r2) << "\nr3 = " << num(b.r3) << "\nr4 = " << num(b.r4)
    << "\nr_nominal = " << num(b.r_nominal) << "\nvcc_dc = " << num(b.vcc_dc) << "\n\n";
  if (c.mos) {
    o << "[mos]\n"
      << "polarity = " << to_string(c.mos->polarity) << "\n"
      << "kprime_wl = " << num(c.mos->kprime_wl) << "\nvth_abs = " << num(c.mos->vth_abs)
      << "\nvgs_bias_abs = " << num(c.mos->vgs_bias_abs) << "\n\n";
  }
  o << "[amp]\n"
    << "gain_dc = " << num(c.amp.gain_dc) << "\npole_hz = " << num(c.amp.pole_hz)
    << "\nsat_v = " << num(c.amp.sat_v) << "\ninput_noise_density = " << num(c.amp.input_noise_density)
    << "\n\n";
  o << "[chain]\n"
    << "lna_gain = " << num(c.chain.lna_gain) << "\nlna_noise_density = " << num(c.chain.lna_noise_density)
    << "\npost_gain = " << num(c.chain.post_gain)
    << "\nfeedback_enabled = " << (c.chain.feedback_enabled ? "true" : "false") << "\n\n";
  if (c.rc) o << "[rc]\nr_filter = " << num(c.rc->r_filter) << "\nc_filter = " << num(c.rc->c_filter) << "\n\n";
  if (c.sensor) {
    o << "[sensor]\nf_res = " << num(c.sensor->f_res) << "\nq_factor = " << num(c.sensor->q_factor)
      << "\nforce_to_dr = " << num(c.sensor->force_to_dr) << "\ndrive_amp = " << num(c.sensor->drive_amp)
      << "\n\n";
  }
  o << "[noise]\n"
    << "temperature = " << num(c.noise.temperature)
    << "\nsupply_noise_density = " << num(c.noise.supply_noise_density)
    << "\nsupply_noise_band = " << num(c.noise.supply_noise_band)
    << "\nground_noise_density = " << num(c.noise.ground_noise_density) << "\n";
  for (const auto& s : c.sources) {
    o << "\n[source]\nkind = " << to_string(s.kind) << "\ntarget = " << to_string(s.target)
      << "\namplitude = " << num(s.amplitude) << "\nfrequency = " << num(s.frequency) << "\n";
    if (s.seed) o << "seed = " << *s.seed << "\n";
  }
  return o.str();
}

}  // namespace bb
