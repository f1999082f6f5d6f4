// bridgebench command-line front end. Talks to the library only through the C API.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bridgebench/bridgebench.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitVerdictFail = 2;

struct Options {
  std::string config;
  std::string out;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  bool json = false;
  std::string gains = "1e2,1e3,1e4";
  double dr_min = 0.1;
  double dr_max = 100.0;
  int points = 50;
  std::string f_grid = "1e3:1e5:log:9";
  double freq = 22e3;
  std::string experiment;
};

int fail(const std::string& where, bb_status s) {
  std::cerr << "error: " << where << ": " << bb_status_name(s) << ": " << bb_last_error() << "\n";
  return kExitError;
}

struct ConfigHandle {
  bb_config* ptr = nullptr;
  ~ConfigHandle() { bb_config_free(ptr); }
};

struct ResultHandle {
  bb_result* ptr = nullptr;
  ~ResultHandle() { bb_result_free(ptr); }
};

// Loads --config (if given) and applies --seed.
std::optional<int> load_config(const Options& o, ConfigHandle& h) {
  if (!o.config.empty()) {
    if (auto s = bb_config_load(o.config.c_str(), &h.ptr); s != BB_OK) return fail("--config", s);
  }
  if (o.seed) {
    if (!h.ptr) {
      if (auto s = bb_config_default("fig7", &h.ptr); s != BB_OK) return fail("--seed", s);
    }
    if (auto s = bb_config_set_seed(h.ptr, *o.seed); s != BB_OK) return fail("--seed", s);
  }
  return std::nullopt;
}

bool write_file(const std::filesystem::path& p, const std::string& text) {
  std::error_code ec;
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) {
    std::cerr << "error: --out: cannot write '" << p.string() << "'\n";
    return false;
  }
  return true;
}

int print_verdicts(const bb_result* r) {
  for (size_t i = 0; i < bb_result_verdict_count(r); ++i) {
    const char* tag = "N/A";
    switch (bb_result_verdict_status(r, i)) {
      case BB_VERDICT_PASS: tag = "PASS"; break;
      case BB_VERDICT_FAIL: tag = "FAIL"; break;
      case BB_VERDICT_NA: tag = "N/A"; break;
    }
    std::cerr << tag << " " << bb_result_verdict_name(r, i) << ": "
              << bb_result_verdict_detail(r, i) << "\n";
  }
  return bb_result_passed(r) ? kExitOk : kExitVerdictFail;
}

// Writes the single table of r to --out (plus a .json sibling with --json),
// or to stdout.
int emit_table(const Options& o, const bb_result* r) {
  const std::string csv = bb_result_table_csv(r, 0);
  const std::string json = bb_result_table_json(r, 0);
  if (o.out.empty()) {
    std::cout << (o.json ? json : csv);
  } else {
    if (!write_file(o.out, csv)) return kExitError;
    if (o.json) {
      auto p = std::filesystem::path(o.out).replace_extension(".json");
      if (!write_file(p, json)) return kExitError;
    }
  }
  return print_verdicts(r);
}

int cmd_bridge_dc(const Options& o) {
  ConfigHandle c;
  if (auto e = load_config(o, c)) return *e;
  ResultHandle r;
  if (auto s = bb_bridge_dc(c.ptr, &r.ptr); s != BB_OK) return fail("bridge dc", s);
  return emit_table(o, r.ptr);
}

int cmd_loop_sweep(const Options& o) {
  ConfigHandle c;
  if (auto e = load_config(o, c)) return *e;
  size_t n = 0;
  if (auto s = bb_parse_grid(o.gains.c_str(), nullptr, 0, &n); s != BB_OK) return fail("--gains", s);
  std::vector<double> gains(n);
  bb_parse_grid(o.gains.c_str(), gains.data(), gains.size(), &n);
  ResultHandle r;
  if (auto s = bb_loop_sweep(c.ptr, gains.data(), gains.size(), o.dr_min, o.dr_max, o.points, &r.ptr);
      s != BB_OK)
    return fail("loop sweep", s);
  return emit_table(o, r.ptr);
}

int cmd_sim(const Options& o) {
  ConfigHandle c;
  if (auto e = load_config(o, c)) return *e;
  ResultHandle r;
  if (auto s = bb_sim(c.ptr, &r.ptr); s != BB_OK) return fail("sim", s);
  return emit_table(o, r.ptr);
}

int cmd_psrr(const Options& o) {
  ConfigHandle c;
  if (auto e = load_config(o, c)) return *e;
  size_t n = 0;
  if (auto s = bb_parse_grid(o.f_grid.c_str(), nullptr, 0, &n); s != BB_OK) return fail("--f-grid", s);
  std::vector<double> grid(n);
  bb_parse_grid(o.f_grid.c_str(), grid.data(), grid.size(), &n);
  ResultHandle r;
  if (auto s = bb_analyze_psrr(c.ptr, grid.data(), grid.size(), o.freq, &r.ptr); s != BB_OK)
    return fail("analyze psrr", s);
  return emit_table(o, r.ptr);
}

int cmd_noise(const Options& o) {
  ConfigHandle c;
  if (auto e = load_config(o, c)) return *e;
  ResultHandle r;
  if (auto s = bb_analyze_noise(c.ptr, o.freq, &r.ptr); s != BB_OK) return fail("analyze noise", s);
  return emit_table(o, r.ptr);
}

int cmd_exp(const Options& o) {
  ConfigHandle c;
  if (!o.config.empty()) {
    if (auto s = bb_config_load(o.config.c_str(), &c.ptr); s != BB_OK) return fail("--config", s);
  }
  ResultHandle r;
  if (auto s = bb_experiment(o.experiment.c_str(), c.ptr, o.out_dir.c_str(), o.seed.has_value(),
                             o.seed.value_or(0), o.json, &r.ptr);
      s != BB_OK)
    return fail("exp " + o.experiment, s);
  for (size_t i = 0; i < bb_result_output_count(r.ptr); ++i)
    std::cout << bb_result_output_path(r.ptr, i) << "\n";
  return print_verdicts(r.ptr);
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Wheatstone-bridge supply-rejection workbench"};
  app.require_subcommand(1);

  auto add_config = [&](CLI::App* s) {
    s->add_option("--config", o.config, "Configuration file")->check(CLI::ExistingFile);
  };
  auto add_out = [&](CLI::App* s) {
    s->add_option("--out", o.out, "Output CSV path (stdout if omitted)");
    s->add_flag("--json", o.json, "Also write a JSON mirror (JSON to stdout without --out)");
  };

  int code = kExitOk;

  auto* bridge = app.add_subcommand("bridge", "Static bridge analysis");
  bridge->require_subcommand(1);
  auto* dc = bridge->add_subcommand("dc", "Offset, sensitivities and stand-alone PSRR");
  add_config(dc);
  add_out(dc);
  dc->callback([&] { code = cmd_bridge_dc(o); });

  auto* loop = app.add_subcommand("loop", "Closed-loop analysis");
  loop->require_subcommand(1);
  auto* sweep = loop->add_subcommand("sweep", "Inverse PSRR vs mismatch for several gains");
  add_config(sweep);
  add_out(sweep);
  sweep->add_option("--gains", o.gains, "Comma-separated amplifier gains")->capture_default_str();
  sweep->add_option("--dr-min", o.dr_min, "Smallest mismatch (ohm)")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--dr-max", o.dr_max, "Largest mismatch (ohm)")->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--points", o.points, "Log-spaced points")->capture_default_str()
      ->check(CLI::Range(2, 100000));
  sweep->callback([&] { code = cmd_loop_sweep(o); });

  auto* sim = app.add_subcommand("sim", "Transient simulation to CSV");
  add_config(sim);
  add_out(sim);
  sim->add_option("--seed", o.seed, "Noise seed");
  sim->callback([&] { code = cmd_sim(o); });

  auto* analyze = app.add_subcommand("analyze", "Frequency-domain analysis");
  analyze->require_subcommand(1);
  auto* psrr = analyze->add_subcommand("psrr", "Transient PSRR sweep");
  add_config(psrr);
  add_out(psrr);
  psrr->add_option("--f-grid", o.f_grid, "Supply tone grid lo:hi:log|lin:n")->capture_default_str();
  psrr->add_option("--freq", o.freq, "Signal tone frequency (Hz)")->capture_default_str()
      ->check(CLI::PositiveNumber);
  psrr->callback([&] { code = cmd_psrr(o); });
  auto* noise = analyze->add_subcommand("noise", "Output noise budget");
  add_config(noise);
  add_out(noise);
  noise->add_option("--freq", o.freq, "Analysis frequency (Hz)")->capture_default_str()
      ->check(CLI::PositiveNumber);
  noise->callback([&] { code = cmd_noise(o); });

  auto* exp = app.add_subcommand("exp", "Reproduce a figure or table");
  exp->add_option("experiment", o.experiment, "fig5, fig7, fig9 or table1")
      ->required()
      ->check(CLI::IsMember({"fig5", "fig7", "fig9", "table1"}));
  add_config(exp);
  exp->add_option("--out-dir", o.out_dir, "Output directory")->capture_default_str();
  exp->add_option("--seed", o.seed, "Noise seed");
  exp->add_flag("--json", o.json, "Also write JSON mirrors");
  exp->callback([&] { code = cmd_exp(o); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }
  return code;
}
