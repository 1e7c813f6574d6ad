// pulsepair: simulate, process, analyze, coincidence, selftest.
//
// Exit status: 0 success, 2 validation error (bad input, config, arguments),
// 1 anything else.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "pulsepair/pipeline.hpp"
#include "pulsepair/types.hpp"

namespace pp = pulsepair;
namespace pl = pulsepair::pipeline;

namespace {

void print_stages(const pl::RunManifest& m) {
  for (const auto& s : m.stages) {
    std::printf("  %-14s events=%-10lld", s.name.c_str(), static_cast<long long>(s.events));
    if (s.pairs >= 0) std::printf(" pairs=%-8lld", static_cast<long long>(s.pairs));
    std::printf(" %.3fs\n", s.seconds);
  }
  for (const auto& w : m.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarized pulse-pair drift-scan simulator and analysis pipeline"};
  app.set_version_flag("--version", std::string(PULSEPAIR_VERSION));
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;

  pl::SimulateArgs sim;
  bool iq = false, events_flag = false;
  auto* simulate = app.add_subcommand("simulate", "Render a scene to a capture-format event CSV");
  simulate->add_option("--scene", sim.scene_path, "Scene file (omit for AWGN only)")->check(CLI::ExistingFile);
  simulate->add_option("--config", config_path, "Run config file")->check(CLI::ExistingFile);
  simulate->add_option("--out", sim.out_events, "Output event CSV")->required();
  simulate->add_option("--seed", seed, "Override the configured seed");
  auto* iq_flag = simulate->add_flag("--iq", iq, "Render IQ frames and channelize them");
  simulate->add_flag("--events", events_flag, "Event-level fast path (default)")->excludes(iq_flag);

  pl::ProcessArgs proc;
  auto* process = app.add_subcommand("process", "Filter events and match pulse pairs");
  process->add_option("--events", proc.events, "Event CSV")->required()->check(CLI::ExistingFile);
  process->add_option("--config", config_path, "Run config file")->check(CLI::ExistingFile);
  process->add_option("--mask", proc.static_mask_path, "Static mask CSV (overrides config)")->check(CLI::ExistingFile);
  process->add_option("--out", proc.out_pairs, "Output pair CSV")->required();
  process->add_option("--seed", seed, "Override the configured seed");

  pl::AnalyzeArgs ana;
  auto* analyze = app.add_subcommand("analyze", "Binomial likelihood report over RA bins");
  analyze->add_option("--pairs", ana.pairs, "Pair CSV")->required()->check(CLI::ExistingFile);
  analyze->add_option("--config", config_path, "Run config file")->check(CLI::ExistingFile);
  analyze->add_option("--prior", ana.prior, "Prior probability for the odds update")->check(CLI::Range(0.0, 1.0));
  analyze->add_option("--out", ana.out_dir, "Report directory")->required();
  analyze->add_flag("--svg", ana.svg, "Write per-bin SVG curves");

  pp::stats::CoincidenceParams cp;
  std::string mode = "any_match_pair";
  std::int64_t trials = 1000000;
  std::uint64_t coincidence_seed = 1;
  auto* coincidence = app.add_subcommand("coincidence", "Delta-f coincidence probability, MC and analytic");
  coincidence->add_option("--n-pairs", cp.n_pairs, "Pairs per experiment")->capture_default_str();
  coincidence->add_option("--df-min", cp.df_min_hz, "Minimum |df| in Hz")->capture_default_str();
  coincidence->add_option("--df-max", cp.df_max_hz, "Maximum |df| in Hz")->capture_default_str();
  coincidence->add_option("--tol", cp.tolerance_hz, "Match tolerance in Hz")->capture_default_str();
  coincidence->add_option("--mode", mode, "any_match_pair or target_match")
      ->check(CLI::IsMember({"any_match_pair", "target_match"}))
      ->capture_default_str();
  coincidence->add_flag("--magnitude", cp.compare_magnitude, "any_match_pair compares |df|");
  coincidence->add_option("--targets", cp.targets_hz, "Target df values in Hz (space or comma separated)")->delimiter(',');
  coincidence->add_option("--trials", trials, "Monte Carlo experiments")->capture_default_str();
  coincidence->add_option("--seed", coincidence_seed, "Monte Carlo seed")->capture_default_str();

  auto* selftest = app.add_subcommand("selftest", "Run built-in consistency checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*simulate) {
      sim.config_path = config_path;
      sim.seed = seed;
      sim.path = iq ? pl::RenderPath::Iq : pl::RenderPath::Events;
      const auto m = pl::run_simulate(sim);
      std::printf("wrote %s\n", sim.out_events.string().c_str());
      print_stages(m);
    } else if (*process) {
      proc.config_path = config_path;
      proc.seed = seed;
      const auto m = pl::run_process(proc);
      std::printf("wrote %s\n", proc.out_pairs.string().c_str());
      print_stages(m);
    } else if (*analyze) {
      ana.config_path = config_path;
      const auto m = pl::run_analyze(ana);
      std::printf("wrote %s\n", ana.out_dir.string().c_str());
      for (const auto& w : m.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    } else if (*coincidence) {
      cp.mode = mode == "target_match" ? pp::stats::CoincidenceMode::TargetMatch : pp::stats::CoincidenceMode::AnyMatchPair;
      const auto r = pl::run_coincidence(cp, trials, coincidence_seed);
      std::printf("mode=%s n_pairs=%lld df=[%g, %g] Hz tol=%g Hz\n", mode.c_str(), static_cast<long long>(cp.n_pairs),
                  cp.df_min_hz, cp.df_max_hz, cp.tolerance_hz);
      std::printf("monte_carlo  %.6f +- %.6f  (%lld trials)\n", r.mc.probability, r.mc.standard_error,
                  static_cast<long long>(r.mc.trials));
      if (r.analytic) {
        std::printf("analytic     %.6f\n", *r.analytic);
      } else {
        std::printf("analytic     n/a (%s)\n", r.analytic_note.c_str());
      }
    } else if (*selftest) {
      bool ok = true;
      for (const auto& line : pl::selftest()) {
        std::printf("%s\n", line.c_str());
        ok = ok && line.rfind("PASS", 0) == 0;
      }
      return ok ? 0 : 1;
    }
  } catch (const pp::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
