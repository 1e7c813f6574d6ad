#pragma once

// End-to-end stages behind the command line: simulate -> process -> analyze,
// plus the coincidence calculator. Every run writes a JSON manifest next to
// its primary output recording the config, file digests, stage timings and
// per-stage survival counts.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pulsepair/config.hpp"
#include "pulsepair/rfi_filters.hpp"
#include "pulsepair/scene.hpp"
#include "pulsepair/stats.hpp"

namespace pulsepair::pipeline {

struct FileRecord {
  std::string role;
  std::string path;
  std::string sha256;
};

struct StageRecord {
  std::string name;
  std::int64_t events = 0;  // events still represented (2 per pair after matching)
  std::int64_t pairs = -1;  // -1 before matching
  double seconds = 0.0;
};

struct RunManifest {
  std::string command;
  std::string version = PULSEPAIR_VERSION;
  std::string config_snapshot;
  std::vector<FileRecord> inputs;
  std::vector<FileRecord> outputs;
  std::vector<StageRecord> stages;
  std::vector<std::string> warnings;
  bool error = false;
  std::string error_message;

  std::string to_json() const;
};

std::filesystem::path manifest_path_for(const std::filesystem::path& output);
void write_manifest(const std::filesystem::path& path, const RunManifest& manifest);

enum class RenderPath { Events, Iq };

/// Renders a scene into capture-format events. The IQ path channelizes every
/// frame of the configured observation, so keep it to minutes of data.
std::vector<ThresholdEvent> simulate(const scene::SyntheticScene& scene, const RunConfig& cfg, RenderPath path);

struct ProcessResult {
  std::vector<PulsePair> pairs;  // trial-numbered
  std::vector<PulsePair> matched;  // after matching, before interarrival and SNR gates
  std::vector<StageRecord> stages;
  RfiMask post_mask;
  std::vector<TimedMaskInterval> dynamic_trace;
};

/// Fixed filter order: static mask, post mask, dynamic IIR, harmonic,
/// edge/DC, pair matching, interarrival, SNR gate and sort.
ProcessResult process_events(const std::vector<ThresholdEvent>& events, const RunConfig& cfg,
                             const RfiMask& static_mask);

/// RunConfig from a file, or defaults when path is empty; seed overrides.
RunConfig load_config_or_default(const std::string& path, std::optional<std::uint64_t> seed);

struct SimulateArgs {
  std::string scene_path;  // empty: empty scene
  std::string config_path;
  std::filesystem::path out_events;
  RenderPath path = RenderPath::Events;
  std::optional<std::uint64_t> seed;
};
RunManifest run_simulate(const SimulateArgs& args);

struct ProcessArgs {
  std::filesystem::path events;
  std::string config_path;
  std::string static_mask_path;  // overrides the config entry when set
  std::filesystem::path out_pairs;
  std::optional<std::uint64_t> seed;
};
RunManifest run_process(const ProcessArgs& args);

struct AnalyzeArgs {
  std::filesystem::path pairs;
  std::string config_path;
  std::optional<double> prior;
  std::filesystem::path out_dir;
  bool svg = false;
};
RunManifest run_analyze(const AnalyzeArgs& args);

struct CoincidenceReport {
  stats::McEstimate mc;
  std::optional<double> analytic;
  std::string analytic_note;
};
CoincidenceReport run_coincidence(const stats::CoincidenceParams& params, std::int64_t trials, std::uint64_t seed);

/// Quick internal consistency checks; returns one line per check, prefixed
/// PASS or FAIL.
std::vector<std::string> selftest();

}  // namespace pulsepair::pipeline
