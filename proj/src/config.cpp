#include "stabest/config.hpp"

#include <fstream>
#include <sstream>

#include "stabest/error.hpp"
#include "stabest/provenance.hpp"
#include "stabest/serial.hpp"

namespace stabest {

std::vector<CampaignClass> default_campaign() {
  std::vector<CampaignClass> out;
  for (Terrain t : kAllTerrains) {
    out.push_back({t, 0.5, 3});
    out.push_back({t, 1.0, 3});
    out.push_back({t, 1.5, 4});
  }
  return out;
}

void RunConfig::validate() const {
  sim.validate();
  c3.validate();
  pipeline.validate();
  model.validate();
  train.validate();
  if (terrains.empty()) throw ConfigError("terrain table is empty");
  for (const TerrainProfile& p : terrains) {
    if (!(p.roughness >= 0.0)) throw ConfigError("terrain roughness must be >= 0");
  }
  for (std::size_t i = 0; i < terrains.size(); ++i) {
    for (std::size_t k = i + 1; k < terrains.size(); ++k) {
      if (terrains[i].terrain == terrains[k].terrain) {
        throw ConfigError("terrain " + to_string(terrains[i].terrain) +
                          " appears twice in the terrain table");
      }
    }
  }
  if (campaign.empty()) throw ConfigError("campaign is empty");
  for (const CampaignClass& c : campaign) {
    if (!(c.speed > 0.0)) throw ConfigError("campaign speed must be positive");
    if (c.trials < 0) throw ConfigError("campaign trial count must be >= 0");
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open config " + path);
  std::ostringstream buf;
  buf << in.rdbuf();

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }

  RunConfig cfg;
  try {
    j.get_to(cfg);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string config_json(const RunConfig& cfg) {
  return nlohmann::json(cfg).dump(2) + "\n";
}

std::string config_hash(const RunConfig& cfg) { return fnv1a64_hex(config_json(cfg)); }

std::vector<CampaignEntry> campaign_entries(const RunConfig& cfg) {
  std::vector<CampaignEntry> out;
  for (const CampaignClass& c : cfg.campaign) {
    const TerrainProfile* profile = nullptr;
    for (const TerrainProfile& p : cfg.terrains) {
      if (p.terrain == c.terrain) {
        profile = &p;
        break;
      }
    }
    if (!profile) {
      throw ConfigError("campaign references terrain " + to_string(c.terrain) +
                        " missing from the terrain table");
    }
    out.push_back({*profile, c.speed, c.trials});
  }
  return out;
}

}  // namespace stabest
