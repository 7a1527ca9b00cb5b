#pragma once

// nlohmann-json ADL hooks for the config-bearing structs. Keeping them in one
// translation unit means the on-disk field names live in exactly one place.

#include <json.hpp>

#include "stabest/c3.hpp"
#include "stabest/config.hpp"
#include "stabest/model.hpp"
#include "stabest/pipeline.hpp"
#include "stabest/sim.hpp"

namespace stabest {

void to_json(nlohmann::json& j, const C3Config& cfg);
void from_json(const nlohmann::json& j, C3Config& cfg);

void to_json(nlohmann::json& j, const ConvSpec& c);
void from_json(const nlohmann::json& j, ConvSpec& c);

void to_json(nlohmann::json& j, const ArchitectureSpec& spec);
void from_json(const nlohmann::json& j, ArchitectureSpec& spec);

void to_json(nlohmann::json& j, const TrainConfig& cfg);
void from_json(const nlohmann::json& j, TrainConfig& cfg);

void to_json(nlohmann::json& j, const SimConfig& cfg);
void from_json(const nlohmann::json& j, SimConfig& cfg);

void to_json(nlohmann::json& j, const TerrainProfile& p);
void from_json(const nlohmann::json& j, TerrainProfile& p);

void to_json(nlohmann::json& j, const SplitSpec& s);
void from_json(const nlohmann::json& j, SplitSpec& s);

void to_json(nlohmann::json& j, const PipelineConfig& cfg);
void from_json(const nlohmann::json& j, PipelineConfig& cfg);

void to_json(nlohmann::json& j, const CampaignClass& c);
void from_json(const nlohmann::json& j, CampaignClass& c);

void to_json(nlohmann::json& j, const RunConfig& cfg);
void from_json(const nlohmann::json& j, RunConfig& cfg);

}  // namespace stabest
