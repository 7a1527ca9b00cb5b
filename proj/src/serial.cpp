#include "stabest/serial.hpp"

namespace stabest {

void to_json(nlohmann::json& j, const C3Config& cfg) {
  j = nlohmann::json{{"n_circles", cfg.n_circles},
                     {"r_min_px", cfg.r_min},
                     {"r_max_px", cfg.r_max},
                     {"tie_counts_as_crossed", cfg.tie_counts_as_crossed}};
}

void from_json(const nlohmann::json& j, C3Config& cfg) {
  cfg.n_circles = j.value("n_circles", cfg.n_circles);
  cfg.r_min = j.value("r_min_px", cfg.r_min);
  cfg.r_max = j.value("r_max_px", cfg.r_max);
  cfg.tie_counts_as_crossed = j.value("tie_counts_as_crossed", cfg.tie_counts_as_crossed);
}

void to_json(nlohmann::json& j, const ConvSpec& c) {
  j = nlohmann::json{{"in_channels", c.in_channels},
                     {"out_channels", c.out_channels},
                     {"kernel", c.kernel},
                     {"stride", c.stride}};
}

void from_json(const nlohmann::json& j, ConvSpec& c) {
  c.in_channels = j.value("in_channels", c.in_channels);
  c.out_channels = j.value("out_channels", c.out_channels);
  c.kernel = j.value("kernel", c.kernel);
  c.stride = j.value("stride", c.stride);
}

void to_json(nlohmann::json& j, const ArchitectureSpec& spec) {
  j = nlohmann::json{{"input_channels", spec.input_channels},
                     {"input_length", spec.input_length},
                     {"convs", spec.convs},
                     {"dense_hidden", spec.dense_hidden},
                     {"dropout_p", spec.dropout_p}};
}

void from_json(const nlohmann::json& j, ArchitectureSpec& spec) {
  spec.input_channels = j.value("input_channels", spec.input_channels);
  spec.input_length = j.value("input_length", spec.input_length);
  if (j.contains("convs")) spec.convs = j.at("convs").get<std::vector<ConvSpec>>();
  if (j.contains("dense_hidden")) {
    spec.dense_hidden = j.at("dense_hidden").get<std::vector<int>>();
  }
  spec.dropout_p = j.value("dropout_p", spec.dropout_p);
}

void to_json(nlohmann::json& j, const TrainConfig& cfg) {
  j = nlohmann::json{{"epochs", cfg.epochs},
                     {"batch_size", cfg.batch_size},
                     {"learning_rate", cfg.learning_rate},
                     {"beta1", cfg.beta1},
                     {"beta2", cfg.beta2},
                     {"epsilon", cfg.epsilon},
                     {"init_seed", cfg.init_seed},
                     {"shuffle_seed", cfg.shuffle_seed},
                     {"dropout_seed", cfg.dropout_seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& cfg) {
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batch_size = j.value("batch_size", cfg.batch_size);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.beta1 = j.value("beta1", cfg.beta1);
  cfg.beta2 = j.value("beta2", cfg.beta2);
  cfg.epsilon = j.value("epsilon", cfg.epsilon);
  cfg.init_seed = j.value("init_seed", cfg.init_seed);
  cfg.shuffle_seed = j.value("shuffle_seed", cfg.shuffle_seed);
  cfg.dropout_seed = j.value("dropout_seed", cfg.dropout_seed);
}

void to_json(nlohmann::json& j, const SimConfig& cfg) {
  j = nlohmann::json{{"imu_rate_hz", cfg.imu_rate_hz},
                     {"gps_rate_hz", cfg.gps_rate_hz},
                     {"cam_rate_hz", cfg.cam_rate_hz},
                     {"duration_s", cfg.duration_s},
                     {"start_distance_m", cfg.start_distance_m},
                     {"standoff_m", cfg.standoff_m},
                     {"stationary_prefix_s", cfg.stationary_prefix_s},
                     {"marker_u0_px", cfg.marker_u0_px},
                     {"marker_v0_px", cfg.marker_v0_px},
                     {"latent_components", cfg.latent_components},
                     {"latent_f_lo_hz", cfg.latent_f_lo_hz},
                     {"latent_f_hi_hz", cfg.latent_f_hi_hz},
                     {"mod_components", cfg.mod_components},
                     {"mod_f_lo_hz", cfg.mod_f_lo_hz},
                     {"mod_f_hi_hz", cfg.mod_f_hi_hz},
                     {"mod_depth", cfg.mod_depth},
                     {"vel_ripple", cfg.vel_ripple},
                     {"speed_exponent", cfg.speed_exponent},
                     {"base_jitter_px", cfg.base_jitter_px},
                     {"imu_coupling", cfg.imu_coupling},
                     {"noise_floor", cfg.noise_floor},
                     {"gps_noise_scale", cfg.gps_noise_scale},
                     {"px_noise_scale", cfg.px_noise_scale},
                     {"marker_dropout", cfg.marker_dropout},
                     {"seed", cfg.seed}};
}

void from_json(const nlohmann::json& j, SimConfig& cfg) {
  cfg.imu_rate_hz = j.value("imu_rate_hz", cfg.imu_rate_hz);
  cfg.gps_rate_hz = j.value("gps_rate_hz", cfg.gps_rate_hz);
  cfg.cam_rate_hz = j.value("cam_rate_hz", cfg.cam_rate_hz);
  cfg.duration_s = j.value("duration_s", cfg.duration_s);
  cfg.start_distance_m = j.value("start_distance_m", cfg.start_distance_m);
  cfg.standoff_m = j.value("standoff_m", cfg.standoff_m);
  cfg.stationary_prefix_s = j.value("stationary_prefix_s", cfg.stationary_prefix_s);
  cfg.marker_u0_px = j.value("marker_u0_px", cfg.marker_u0_px);
  cfg.marker_v0_px = j.value("marker_v0_px", cfg.marker_v0_px);
  cfg.latent_components = j.value("latent_components", cfg.latent_components);
  cfg.latent_f_lo_hz = j.value("latent_f_lo_hz", cfg.latent_f_lo_hz);
  cfg.latent_f_hi_hz = j.value("latent_f_hi_hz", cfg.latent_f_hi_hz);
  cfg.mod_components = j.value("mod_components", cfg.mod_components);
  cfg.mod_f_lo_hz = j.value("mod_f_lo_hz", cfg.mod_f_lo_hz);
  cfg.mod_f_hi_hz = j.value("mod_f_hi_hz", cfg.mod_f_hi_hz);
  cfg.mod_depth = j.value("mod_depth", cfg.mod_depth);
  cfg.vel_ripple = j.value("vel_ripple", cfg.vel_ripple);
  cfg.speed_exponent = j.value("speed_exponent", cfg.speed_exponent);
  cfg.base_jitter_px = j.value("base_jitter_px", cfg.base_jitter_px);
  cfg.imu_coupling = j.value("imu_coupling", cfg.imu_coupling);
  cfg.noise_floor = j.value("noise_floor", cfg.noise_floor);
  cfg.gps_noise_scale = j.value("gps_noise_scale", cfg.gps_noise_scale);
  cfg.px_noise_scale = j.value("px_noise_scale", cfg.px_noise_scale);
  cfg.marker_dropout = j.value("marker_dropout", cfg.marker_dropout);
  cfg.seed = j.value("seed", cfg.seed);
}

void to_json(nlohmann::json& j, const TerrainProfile& p) {
  j = nlohmann::json{{"terrain", to_string(p.terrain)}, {"roughness", p.roughness}};
}

void from_json(const nlohmann::json& j, TerrainProfile& p) {
  if (j.contains("terrain")) p.terrain = terrain_from_string(j.at("terrain").get<std::string>());
  p.roughness = j.value("roughness", p.roughness);
}

void to_json(nlohmann::json& j, const SplitSpec& s) {
  j = nlohmann::json{
      {"val_fraction", s.val_fraction}, {"n_bins", s.n_bins}, {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, SplitSpec& s) {
  s.val_fraction = j.value("val_fraction", s.val_fraction);
  s.n_bins = j.value("n_bins", s.n_bins);
  s.seed = j.value("seed", s.seed);
}

void to_json(nlohmann::json& j, const PipelineConfig& cfg) {
  j = nlohmann::json{{"min_mean_speed", cfg.min_mean_speed},
                     {"holdout_terrain", to_string(cfg.holdout_terrain)},
                     {"balance_seed", cfg.balance_seed},
                     {"split", cfg.split}};
}

void from_json(const nlohmann::json& j, PipelineConfig& cfg) {
  cfg.min_mean_speed = j.value("min_mean_speed", cfg.min_mean_speed);
  if (j.contains("holdout_terrain")) {
    cfg.holdout_terrain = terrain_from_string(j.at("holdout_terrain").get<std::string>());
  }
  cfg.balance_seed = j.value("balance_seed", cfg.balance_seed);
  if (j.contains("split")) j.at("split").get_to(cfg.split);
}

void to_json(nlohmann::json& j, const CampaignClass& c) {
  j = nlohmann::json{
      {"terrain", to_string(c.terrain)}, {"speed", c.speed}, {"trials", c.trials}};
}

void from_json(const nlohmann::json& j, CampaignClass& c) {
  if (j.contains("terrain")) c.terrain = terrain_from_string(j.at("terrain").get<std::string>());
  c.speed = j.value("speed", c.speed);
  c.trials = j.value("trials", c.trials);
}

void to_json(nlohmann::json& j, const RunConfig& cfg) {
  j = nlohmann::json{{"sim", cfg.sim},
                     {"terrains", cfg.terrains},
                     {"campaign", cfg.campaign},
                     {"c3", cfg.c3},
                     {"pipeline", cfg.pipeline},
                     {"model", cfg.model},
                     {"train", cfg.train}};
}

void from_json(const nlohmann::json& j, RunConfig& cfg) {
  if (j.contains("sim")) j.at("sim").get_to(cfg.sim);
  if (j.contains("terrains")) {
    cfg.terrains = j.at("terrains").get<std::vector<TerrainProfile>>();
  }
  if (j.contains("campaign")) {
    cfg.campaign = j.at("campaign").get<std::vector<CampaignClass>>();
  }
  if (j.contains("c3")) j.at("c3").get_to(cfg.c3);
  if (j.contains("pipeline")) j.at("pipeline").get_to(cfg.pipeline);
  if (j.contains("model")) j.at("model").get_to(cfg.model);
  if (j.contains("train")) j.at("train").get_to(cfg.train);
}

}  // namespace stabest
