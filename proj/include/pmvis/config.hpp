#ifndef PMVIS_CONFIG_HPP
#define PMVIS_CONFIG_HPP

#include <string>

#include "pmvis/curation.hpp"
#include "pmvis/eval.hpp"
#include "pmvis/losses.hpp"
#include "pmvis/synth.hpp"

namespace pmvis {

// Run-level configuration for the CLI. JSON on disk; every field optional
// with the defaults below, and load/save round-trips losslessly.
struct PipelineConfig {
  uint64_t seed = 1;

  std::string raw_path;           // raw-detections JSON
  std::string ground_truth_path;  // YTVIS-style dataset JSON
  std::string out_path;

  FilterConfig filter;   // K = 4, tau = 0.2 defaults
  TrackerConfig tracker;
  EvalConfig eval = EvalConfig::defaults();
  LossHyperparams loss;

  CorpusSpec corpus;
  CorruptionSpec corruption;

  int jobs = 1;
};

PipelineConfig parse_config(const std::string& json_text);
std::string serialize_config(const PipelineConfig& cfg);
PipelineConfig load_config(const std::string& path);

}  // namespace pmvis

#endif  // PMVIS_CONFIG_HPP
