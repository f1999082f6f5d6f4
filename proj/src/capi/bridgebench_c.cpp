#include "bridgebench/bridgebench.h"

#include <exception>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "csv.hpp"
#include "error.hpp"
#include "experiments.hpp"
#include "model_config.hpp"

struct bb_config {
  bb::SimConfig config;
  std::string text;
};

struct bb_result {
  struct NamedTable {
    std::string name;
    std::string csv;
    std::string json;
  };
  std::vector<NamedTable> tables;
  std::vector<bb::Verdict> verdicts;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
};

namespace {

thread_local std::string g_last_error;

bb_status status_of(bb::ErrorCode c) { return static_cast<bb_status>(static_cast<int>(c)); }

template <class F>
bb_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return BB_OK;
  } catch (const bb::ValidationError& e) {
    g_last_error.clear();
    for (const auto& v : e.violations()) {
      if (!g_last_error.empty()) g_last_error += "; ";
      g_last_error += v;
    }
    if (g_last_error.empty()) g_last_error = e.what();
    return BB_ERR_VALIDATION_FAILED;
  } catch (const bb::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return BB_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return BB_ERR_INTERNAL;
  }
}

bb_status null_arg(const char* what) {
  g_last_error = std::string(what) + " must not be NULL";
  return BB_ERR_INVALID_ARGUMENT;
}

void add_table(bb_result& r, std::string name, const bb::Table& t) {
  r.tables.push_back({std::move(name), bb::to_csv(t), bb::to_json(t)});
}

bb::SimConfig config_or(const bb_config* c, bb::SimConfig fallback) {
  return c ? bb::validate(c->config) : bb::validate(fallback);
}

template <class T>
const T* at(const std::vector<T>& v, size_t i) {
  return i < v.size() ? &v[i] : nullptr;
}

}  // namespace

extern "C" {

const char* bb_version(void) { return "1.0.0"; }

const char* bb_last_error(void) { return g_last_error.c_str(); }

const char* bb_status_name(bb_status status) {
  if (status == BB_OK) return "OK";
  if (status == BB_ERR_INTERNAL) return "INTERNAL";
  if (status >= BB_ERR_VALIDATION_FAILED && status <= BB_ERR_IO)
    return bb::error_code_name(static_cast<bb::ErrorCode>(status));
  return "UNKNOWN";
}

bb_status bb_config_default(const char* scenario, bb_config** out) {
  if (!scenario) return null_arg("scenario");
  if (!out) return null_arg("out");
  return guarded([&] {
    const std::string s = scenario;
    bb::SimConfig c;
    if (s == "open") c = bb::default_config(bb::Topology::kOpenBridge);
    else if (s == "pmos") c = bb::default_config(bb::Topology::kPmosFeedback);
    else if (s == "nmos") c = bb::default_config(bb::Topology::kNmosFeedback);
    else if (s == "rc") c = bb::default_config(bb::Topology::kRcCompensated);
    else if (s == "fig7") c = bb::fig7_config();
    else if (s == "fig9") c = bb::fig9_config();
    else throw bb::Error(bb::ErrorCode::kInvalidArgument, "unknown scenario '" + s + "'");
    *out = new bb_config{std::move(c), {}};
  });
}

bb_status bb_config_parse(const char* text, bb_config** out) {
  if (!text) return null_arg("text");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new bb_config{bb::parse_config(text), {}}; });
}

bb_status bb_config_load(const char* path, bb_config** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] { *out = new bb_config{bb::load_config(path), {}}; });
}

void bb_config_free(bb_config* config) { delete config; }

bb_status bb_config_set_seed(bb_config* config, uint64_t seed) {
  if (!config) return null_arg("config");
  return guarded([&] { config->config = bb::with_seed(config->config, seed); });
}

const char* bb_config_text(bb_config* config) {
  if (!config) return "";
  config->text = bb::to_text(config->config);
  return config->text.c_str();
}

bb_status bb_parse_grid(const char* spec, double* values, size_t capacity, size_t* count) {
  if (!spec) return null_arg("spec");
  if (!count) return null_arg("count");
  if (!values && capacity) return null_arg("values");
  return guarded([&] {
    const auto g = bb::parse_grid(spec);
    *count = g.size();
    for (size_t i = 0; i < g.size() && i < capacity; ++i) values[i] = g[i];
  });
}

bb_status bb_bridge_dc(const bb_config* config, bb_result** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto c = config_or(config, bb::default_config(bb::Topology::kOpenBridge));
    auto r = std::make_unique<bb_result>();
    add_table(*r, "bridge_dc", bb::bridge_dc_table(c.bridge));
    *out = r.release();
  });
}

bb_status bb_loop_sweep(const bb_config* config, const double* gains, size_t gain_count,
                        double dr_min, double dr_max, int points, bb_result** out) {
  if (!out) return null_arg("out");
  if (!gains && gain_count) return null_arg("gains");
  return guarded([&] {
    bb::Fig5Params p;
    if (gain_count) p.gains.assign(gains, gains + gain_count);
    p.dr_min = dr_min;
    p.dr_max = dr_max;
    p.points = points;
    if (config) p.fixed = bb::loop_params_from_config(bb::validate(config->config));
    const auto t = bb::loop_sweep_table(
        bb::gain_sweep(bb::log_grid(p.dr_min, p.dr_max, p.points), p.gains, p.fixed));
    auto r = std::make_unique<bb_result>();
    add_table(*r, "loop_sweep", t);
    r->verdicts = bb::fig5_verdicts(t);
    *out = r.release();
  });
}

bb_status bb_sim(const bb_config* config, bb_result** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto c = config_or(config, bb::fig7_config());
    auto r = std::make_unique<bb_result>();
    add_table(*r, "sim", bb::timeseries_table(bb::run(c)));
    *out = r.release();
  });
}

bb_status bb_analyze_psrr(const bb_config* config, const double* freqs, size_t freq_count,
                          double f_signal, bb_result** out) {
  if (!out) return null_arg("out");
  if (!freqs || !freq_count) return null_arg("freqs");
  return guarded([&] {
    const auto c = config_or(config, bb::fig9_config());
    const std::vector<double> grid(freqs, freqs + freq_count);
    auto r = std::make_unique<bb_result>();
    add_table(*r, "psrr", bb::psrr_table(bb::psrr_sweep(c, grid, f_signal)));
    *out = r.release();
  });
}

bb_status bb_analyze_noise(const bb_config* config, double freq_hz, bb_result** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    const auto c = config_or(config, bb::default_config(bb::Topology::kOpenBridge));
    auto r = std::make_unique<bb_result>();
    add_table(*r, "noise", bb::noise_table(bb::noise_budget(c, freq_hz)));
    *out = r.release();
  });
}

bb_status bb_experiment(const char* id, const bb_config* config, const char* out_dir,
                        int has_seed, uint64_t seed, int json, bb_result** out) {
  if (!id) return null_arg("id");
  if (!out_dir) return null_arg("out_dir");
  if (!out) return null_arg("out");
  return guarded([&] {
    bb::ExperimentOptions opt;
    opt.out_dir = out_dir;
    if (has_seed) opt.seed = seed;
    opt.json = json != 0;
    if (config) opt.config = config->config;
    const auto res = bb::run_experiment(id, opt);
    auto r = std::make_unique<bb_result>();
    r->verdicts = res.verdicts;
    for (const auto& p : res.outputs) r->outputs.push_back(p.string());
    r->wall_seconds = res.wall_seconds;
    *out = r.release();
  });
}

void bb_result_free(bb_result* result) { delete result; }

size_t bb_result_table_count(const bb_result* r) { return r ? r->tables.size() : 0; }

const char* bb_result_table_name(const bb_result* r, size_t i) {
  const auto* t = r ? at(r->tables, i) : nullptr;
  return t ? t->name.c_str() : nullptr;
}

const char* bb_result_table_csv(const bb_result* r, size_t i) {
  const auto* t = r ? at(r->tables, i) : nullptr;
  return t ? t->csv.c_str() : nullptr;
}

const char* bb_result_table_json(const bb_result* r, size_t i) {
  const auto* t = r ? at(r->tables, i) : nullptr;
  return t ? t->json.c_str() : nullptr;
}

size_t bb_result_verdict_count(const bb_result* r) { return r ? r->verdicts.size() : 0; }

bb_verdict_status bb_result_verdict_status(const bb_result* r, size_t i) {
  const auto* v = r ? at(r->verdicts, i) : nullptr;
  if (!v) return BB_VERDICT_NA;
  switch (v->status) {
    case bb::VerdictStatus::kPass: return BB_VERDICT_PASS;
    case bb::VerdictStatus::kFail: return BB_VERDICT_FAIL;
    case bb::VerdictStatus::kNotApplicable: return BB_VERDICT_NA;
  }
  return BB_VERDICT_NA;
}

const char* bb_result_verdict_name(const bb_result* r, size_t i) {
  const auto* v = r ? at(r->verdicts, i) : nullptr;
  return v ? v->name.c_str() : nullptr;
}

const char* bb_result_verdict_detail(const bb_result* r, size_t i) {
  const auto* v = r ? at(r->verdicts, i) : nullptr;
  return v ? v->detail.c_str() : nullptr;
}

size_t bb_result_output_count(const bb_result* r) { return r ? r->outputs.size() : 0; }

const char* bb_result_output_path(const bb_result* r, size_t i) {
  const auto* p = r ? at(r->outputs, i) : nullptr;
  return p ? p->c_str() : nullptr;
}

int bb_result_passed(const bb_result* r) {
  if (!r) return 0;
  for (const auto& v : r->verdicts)
    if (v.status == bb::VerdictStatus::kFail) return 0;
  return 1;
}

double bb_result_wall_seconds(const bb_result* r) { return r ? r->wall_seconds : 0.0; }

}  // extern "C"
