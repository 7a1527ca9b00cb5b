#pragma once

// One config to rule a run: simulation constants, campaign layout, scoring,
// pipeline, model, and training. Config files are JSON and may be partial;
// anything not mentioned keeps its default.

#include <string>
#include <vector>

#include "stabest/c3.hpp"
#include "stabest/model.hpp"
#include "stabest/pipeline.hpp"
#include "stabest/sim.hpp"

namespace stabest {

struct CampaignClass {
  Terrain terrain = Terrain::pavement;
  double speed = 0.0;
  int trials = 0;
};

// Four terrains, three speeds; slower runs spend longer moving and yield
// more windows, so faster classes get extra trials to keep balancing cheap.
std::vector<CampaignClass> default_campaign();

struct RunConfig {
  SimConfig sim;
  std::vector<TerrainProfile> terrains = default_terrains();
  std::vector<CampaignClass> campaign = default_campaign();
  C3Config c3;
  PipelineConfig pipeline;
  ArchitectureSpec model;
  TrainConfig train;

  void validate() const;
};

// Parses a JSON config over the defaults and validates. ConfigError on
// malformed or invalid content, DataError if the file cannot be read.
RunConfig load_config(const std::string& path);

std::string config_json(const RunConfig& cfg);  // canonical dump
std::string config_hash(const RunConfig& cfg);

// Resolves campaign classes against the terrain table.
std::vector<CampaignEntry> campaign_entries(const RunConfig& cfg);

}  // namespace stabest
