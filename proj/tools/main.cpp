#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "stabest/config.hpp"
#include "stabest/error.hpp"
#include "stabest/io.hpp"
#include "stabest/kernels.hpp"
#include "stabest/model.hpp"
#include "stabest/numio.hpp"
#include "stabest/pipeline.hpp"
#include "stabest/provenance.hpp"
#include "stabest/report.hpp"
#include "stabest/serial.hpp"
#include "stabest/sim.hpp"
#include "stabest/version.hpp"

namespace fs = std::filesystem;
using namespace stabest;

namespace {

RunConfig resolve_config(const std::string& cli_path) {
  std::string path = cli_path;
  if (path.empty()) {
    if (const char* env = std::getenv("STABEST_CONFIG")) path = env;
  }
  if (path.empty()) {
    RunConfig cfg;
    cfg.validate();
    return cfg;
  }
  return load_config(path);
}

RunLog load_checked(const fs::path& dir) {
  RunLog log = load_runlog(dir);
  const std::vector<Violation> violations = validate_runlog(log);
  if (!violations.empty()) {
    std::string msg = dir.string() + ": invalid trial log:";
    const std::size_t shown = std::min<std::size_t>(violations.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) msg += "\n  " + describe(violations[i]);
    if (violations.size() > shown) {
      msg += "\n  ... " + std::to_string(violations.size() - shown) + " more";
    }
    throw DataError(msg);
  }
  return log;
}

nlohmann::json base_provenance(const RunConfig& cfg) {
  return nlohmann::json{
      {"tool", kToolName}, {"version", kToolVersion}, {"config_hash", config_hash(cfg)}};
}

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw DataError("failed writing " + path.string());
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir) {
  const std::vector<CampaignEntry> entries = campaign_entries(cfg);
  fs::create_directories(out_dir);
  const std::vector<RunLog> logs = generate_campaign(entries, cfg.sim, out_dir);

  nlohmann::json trials = nlohmann::json::array();
  for (const RunLog& log : logs) trials.push_back(log.meta.trial_id);
  nlohmann::json manifest{{"provenance", base_provenance(cfg)},
                          {"seed", cfg.sim.seed},
                          {"n_trials", logs.size()},
                          {"trials", trials}};
  write_text(fs::path(out_dir) / "campaign.json", manifest.dump(2) + "\n");
  write_text(fs::path(out_dir) / "config.json", config_json(cfg));

  std::cout << "simulated " << logs.size() << " trials -> " << out_dir << "\n";
  return 0;
}

int cmd_score(const RunConfig& cfg, const std::string& trial_dir, const std::string& out_file) {
  const RunLog log = load_checked(trial_dir);
  const std::vector<DataFrame> frames = make_windows(log);
  const std::vector<WindowScore> scores = score_windows(log, frames, cfg.c3);
  save_scores_csv(scores, out_file);

  std::size_t flagged = 0;
  for (const WindowScore& s : scores) flagged += s.flagged ? 1 : 0;
  std::cout << "scored " << scores.size() << " windows (" << flagged << " flagged) -> "
            << out_file << "\n";
  return 0;
}

int cmd_build_dataset(const RunConfig& cfg, const std::string& trials_dir,
                      const std::string& out_dir) {
  const std::vector<fs::path> dirs = list_trial_dirs(trials_dir);
  if (dirs.empty()) throw DataError("no trial directories under " + trials_dir);
  std::vector<RunLog> logs;
  logs.reserve(dirs.size());
  for (const fs::path& d : dirs) logs.push_back(load_checked(d));

  const DatasetBundle bundle = build_dataset(logs, cfg.c3, cfg.pipeline);
  if (bundle.c3_max_fallback) {
    std::cerr << "warning: training portion has no positive raw score; "
                 "labels normalized against 1.0\n";
  }

  fs::create_directories(out_dir);
  const fs::path out(out_dir);
  const std::string test_name = "test_" + to_string(cfg.pipeline.holdout_terrain) + ".jsonl";

  std::vector<ScoredWindow> dataset = bundle.train;
  dataset.insert(dataset.end(), bundle.val.begin(), bundle.val.end());
  save_dataset(dataset, out / "dataset.jsonl");
  save_dataset(bundle.test, out / test_name);

  std::string pruned_csv = "id,mean_speed\n";
  for (const auto& r : bundle.removed) {
    pruned_csv += r.id + "," + format_double(r.mean_speed) + "\n";
  }
  write_text(out / "pruned.csv", pruned_csv);

  nlohmann::json counts = nlohmann::json::array();
  for (const ClassCount& c : bundle.class_counts) {
    counts.push_back({{"terrain", to_string(c.terrain)},
                      {"speed", c.commanded_speed},
                      {"windowed", c.windowed},
                      {"pruned", c.pruned},
                      {"balanced", c.balanced}});
  }
  nlohmann::json val_ids = nlohmann::json::array();
  for (const ScoredWindow& w : bundle.val) val_ids.push_back(w.id());
  nlohmann::json manifest{
      {"provenance", base_provenance(cfg)},
      {"holdout_terrain", to_string(cfg.pipeline.holdout_terrain)},
      {"c3_max", bundle.c3_max},
      {"c3_max_fallback", bundle.c3_max_fallback},
      {"counts", counts},
      {"n_train", bundle.train.size()},
      {"n_val", bundle.val.size()},
      {"n_test", bundle.test.size()},
      {"n_pruned", bundle.removed.size()},
      {"val_ids", val_ids},
      {"hashes",
       {{"dataset.jsonl", file_hash_hex((out / "dataset.jsonl").string())},
        {test_name, file_hash_hex((out / test_name).string())}}}};
  write_text(out / "manifest.json", manifest.dump(2) + "\n");

  std::cout << "dataset: " << bundle.train.size() << " train, " << bundle.val.size()
            << " val, " << bundle.test.size() << " test ("
            << to_string(cfg.pipeline.holdout_terrain) << " holdout), "
            << bundle.removed.size() << " pruned -> " << out_dir << "\n";
  return 0;
}

int cmd_train(RunConfig cfg, const std::string& dataset_dir, const std::string& out_file,
              int epochs_override) {
  if (epochs_override > 0) cfg.train.epochs = epochs_override;

  const fs::path dir(dataset_dir);
  const nlohmann::json manifest = read_json(dir / "manifest.json");
  const std::vector<ScoredWindow> all = load_dataset(dir / "dataset.jsonl");

  std::set<std::string> val_ids;
  for (const auto& id : manifest.value("val_ids", nlohmann::json::array())) {
    val_ids.insert(id.get<std::string>());
  }
  std::vector<ScoredWindow> train_set, val_set;
  for (const ScoredWindow& w : all) {
    (val_ids.count(w.id()) ? val_set : train_set).push_back(w);
  }
  if (train_set.empty()) throw DataError("dataset has no training windows");
  if (val_set.empty()) throw DataError("dataset has no validation windows");

  std::cout << "training on " << train_set.size() << " windows, validating on "
            << val_set.size() << " (" << kernels::active().name << " kernels)\n";
  ModelCheckpoint ckpt = train(train_set, val_set, cfg.model, cfg.train);

  nlohmann::json prov = base_provenance(cfg);
  prov["dataset_hash"] =
      manifest.value("hashes", nlohmann::json::object()).value("dataset.jsonl", "");
  ckpt.provenance_json = prov.dump();
  save_checkpoint(ckpt, out_file);

  const TrainCurvePoint& last = ckpt.curve.back();
  std::cout << "epoch " << last.epoch << ": train mse " << format_double(last.train_mse)
            << ", val mse " << format_double(last.val_mse) << "\n";
  std::cout << "saved model -> " << out_file << "\n";
  return 0;
}

void cross_check_manifest(const fs::path& test_file) {
  const fs::path manifest_path = test_file.parent_path() / "manifest.json";
  if (!fs::exists(manifest_path)) return;
  const nlohmann::json manifest = read_json(manifest_path);
  const nlohmann::json hashes = manifest.value("hashes", nlohmann::json::object());
  const std::string name = test_file.filename().string();
  if (!hashes.contains(name)) return;
  if (hashes.at(name).get<std::string>() != file_hash_hex(test_file.string())) {
    throw DataError(test_file.string() + " does not match the hash in " +
                    manifest_path.string());
  }
}

int cmd_eval(const std::string& model_file, const std::string& test_file,
             const std::string& out_dir) {
  const ModelCheckpoint ckpt = load_checkpoint(model_file);
  cross_check_manifest(test_file);
  const std::vector<ScoredWindow> test = load_dataset(test_file);
  if (test.empty()) throw DataError(test_file + " holds no windows");

  const std::vector<double> preds = predict(ckpt, test);
  const Report report = make_report(test, preds);

  nlohmann::json prov{{"tool", kToolName},
                      {"version", kToolVersion},
                      {"checkpoint_hash", file_hash_hex(model_file)},
                      {"test_hash", file_hash_hex(test_file)},
                      {"model", nlohmann::json::parse(ckpt.provenance_json)}};
  render_report(report, test, preds, out_dir, prov.dump());

  std::string csv = "id,terrain,speed,gt,pred\n";
  for (std::size_t i = 0; i < test.size(); ++i) {
    csv += test[i].id() + "," + to_string(test[i].meta.terrain) + "," +
           format_double(test[i].meta.commanded_speed) + "," + format_double(test[i].gt) +
           "," + format_double(preds[i]) + "\n";
  }
  write_text(fs::path(out_dir) / "predictions.csv", csv);

  std::cout << "eval: n=" << report.n << " mse=" << format_double(report.mse)
            << " bias=" << format_double(report.bias) << " -> " << out_dir << "\n";
  return 0;
}

int cmd_report(const std::string& errors_file, const std::string& out_dir) {
  std::ifstream in(errors_file, std::ios::binary);
  if (!in) throw DataError("cannot open " + errors_file);
  std::string line;
  if (!std::getline(in, line) || line != "id,terrain,speed,gt,pred,error") {
    throw DataError(errors_file + ": expected an errors.csv header");
  }

  std::vector<ScoredWindow> windows;
  std::vector<double> preds;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream row(line);
    std::string col;
    while (std::getline(row, col, ',')) cols.push_back(col);
    if (cols.size() != 6) {
      throw DataError(errors_file + ":" + std::to_string(lineno) + ": expected 6 columns");
    }
    ScoredWindow w;
    const std::size_t hash = cols[0].rfind('#');
    if (hash == std::string::npos) {
      throw DataError(errors_file + ":" + std::to_string(lineno) + ": bad window id");
    }
    w.meta.trial_id = cols[0].substr(0, hash);
    w.window_index = parse_int(cols[0].substr(hash + 1));
    w.meta.terrain = terrain_from_string(cols[1]);
    w.meta.commanded_speed = parse_double(cols[2]);
    w.gt = parse_double(cols[3]);
    windows.push_back(w);
    preds.push_back(parse_double(cols[4]));
  }

  const Report report = make_report(windows, preds);
  nlohmann::json prov{{"tool", kToolName},
                      {"version", kToolVersion},
                      {"errors_hash", file_hash_hex(errors_file)}};
  render_report(report, windows, preds, out_dir, prov.dump());
  std::cout << "report: n=" << report.n << " mse=" << format_double(report.mse) << " -> "
            << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"terrain stability dataset and model pipeline"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path,
                 "JSON config file; STABEST_CONFIG is honored when unset");

  auto* sim_cmd = app.add_subcommand("simulate", "generate a campaign of synthetic trials");
  std::string sim_out;
  std::uint64_t sim_seed = 0;
  sim_cmd->add_option("--out", sim_out, "output directory")->required();
  sim_cmd->add_option("--seed", sim_seed, "override the campaign seed");

  auto* score_cmd = app.add_subcommand("score", "score one trial's windows");
  std::string score_trial, score_out;
  score_cmd->add_option("--trial", score_trial, "trial directory")->required();
  score_cmd->add_option("--out", score_out, "scores csv path")->required();

  auto* build_cmd = app.add_subcommand("build-dataset", "turn trials into a labeled dataset");
  std::string build_trials, build_out, build_holdout;
  std::uint64_t balance_seed = 0, split_seed = 0;
  build_cmd->add_option("--trials", build_trials, "directory of trial directories")->required();
  build_cmd->add_option("--out", build_out, "output directory")->required();
  build_cmd->add_option("--holdout-terrain", build_holdout, "override the holdout terrain");
  build_cmd->add_option("--balance-seed", balance_seed, "override the balancing seed");
  build_cmd->add_option("--split-seed", split_seed, "override the split seed");

  auto* train_cmd = app.add_subcommand("train", "fit the regressor on a dataset");
  std::string train_dataset, train_out;
  int train_epochs = 0;
  train_cmd->add_option("--dataset", train_dataset, "dataset directory")->required();
  train_cmd->add_option("--out", train_out, "checkpoint path")->required();
  train_cmd->add_option("--epochs", train_epochs, "override the epoch count");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a test set");
  std::string eval_model, eval_test, eval_out;
  eval_cmd->add_option("--model", eval_model, "checkpoint path")->required();
  eval_cmd->add_option("--test", eval_test, "test jsonl path")->required();
  eval_cmd->add_option("--out", eval_out, "report directory")->required();

  auto* report_cmd = app.add_subcommand("report", "re-render a report from errors.csv");
  std::string report_errors, report_out;
  report_cmd->add_option("--errors", report_errors, "errors.csv path")->required();
  report_cmd->add_option("--out", report_out, "report directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim_cmd) {
      RunConfig cfg = resolve_config(config_path);
      if (sim_cmd->count("--seed")) cfg.sim.seed = sim_seed;
      return cmd_simulate(cfg, sim_out);
    }
    if (*score_cmd) {
      return cmd_score(resolve_config(config_path), score_trial, score_out);
    }
    if (*build_cmd) {
      RunConfig cfg = resolve_config(config_path);
      if (!build_holdout.empty()) {
        cfg.pipeline.holdout_terrain = terrain_from_string(build_holdout);
      }
      if (build_cmd->count("--balance-seed")) cfg.pipeline.balance_seed = balance_seed;
      if (build_cmd->count("--split-seed")) cfg.pipeline.split.seed = split_seed;
      return cmd_build_dataset(cfg, build_trials, build_out);
    }
    if (*train_cmd) {
      return cmd_train(resolve_config(config_path), train_dataset, train_out, train_epochs);
    }
    if (*eval_cmd) {
      return cmd_eval(eval_model, eval_test, eval_out);
    }
    if (*report_cmd) {
      return cmd_report(report_errors, report_out);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
