/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "aimc/common.hpp"
#include "aimc/csv.hpp"
#include "aimc/experiments.hpp"

namespace {

void report_written(const aimc::CsvDocument &doc, const std::string &path) {
  std::cout << "wrote " << path << " (" << doc.rows.size() << " data rows)\n";
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"deterministic analog in-memory crossbar inference bench"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string out_path;
  std::string manifest_path;
  std::uint64_t seed = 1234;
  std::size_t jobs = 1;
  app.add_option("--config", config_path, "JSON experiment config");
  app.add_option("--seed", seed, "base seed for every random stream");
  app.add_option("--out", out_path, "output CSV path");
  app.add_option("--jobs", jobs, "worker threads for multi-seed runs")
      ->check(CLI::Range(std::size_t{1}, std::size_t{256}));

  CLI::App *cmd_mvm = app.add_subcommand(
      "mvm-error", "tile read-back error over the drift time grid");
  CLI::App *cmd_map = app.add_subcommand(
      "map-report", "tile mapping summary for a model manifest");
  cmd_map->add_option("--manifest", manifest_path, "model manifest file")
      ->required();
  CLI::App *cmd_calibrate = app.add_subcommand(
      "calibrate", "run both calibration passes on the bench network");
  CLI::App *cmd_train = app.add_subcommand(
      "train-demo", "one hardware-aware training run on the bench network");
  CLI::App *cmd_ablation = app.add_subcommand(
      "ablation", "calibration ablation across seeds on the bench network");

  CLI11_PARSE(app, argc, argv);

  try {
    const aimc::ExperimentConfig cfg =
        config_path.empty() ? aimc::default_experiment_config()
                            : aimc::load_experiment_config(config_path);

    if (cmd_mvm->parsed()) {
      const aimc::CsvDocument doc = aimc::run_mvm_error(cfg, seed);
      const std::string path = out_path.empty() ? "mvm_error.csv" : out_path;
      aimc::write_csv_file(doc, path);
      report_written(doc, path);
      for (const auto &row : doc.rows)
        std::cout << "  t = " << row[0] << " s  l2 = " << row[1] << " %\n";
      return 0;
    }
    if (cmd_map->parsed()) {
      const aimc::CsvDocument doc =
          aimc::run_map_report(manifest_path, cfg.hw);
      const std::string path = out_path.empty() ? "map_report.csv" : out_path;
      aimc::write_csv_file(doc, path);
      report_written(doc, path);
      const auto &total = doc.rows.back();
      std::cout << "  tiles = " << total[4]
                << "  mapped_params = " << total[5]
                << "  avg_utilization = " << total[6] << " %\n";
      return 0;
    }
    if (cmd_calibrate->parsed()) {
      const aimc::CsvDocument doc = aimc::run_calibrate_demo(cfg, seed);
      const std::string path = out_path.empty() ? "calibration.csv" : out_path;
      aimc::write_csv_file(doc, path);
      report_written(doc, path);
      std::size_t saturating = 0;
      for (const auto &row : doc.rows)
        if (row[7] == "1")
          ++saturating;
      std::cout << "  saturating columns = " << saturating << " of "
                << doc.rows.size() << "\n";
      return 0;
    }
    if (cmd_train->parsed()) {
      const aimc::CsvDocument doc = aimc::run_train_demo(cfg, seed);
      const std::string path = out_path.empty() ? "train_demo.csv" : out_path;
      aimc::write_csv_file(doc, path);
      report_written(doc, path);
      const auto &last = doc.rows.back();
      std::cout << "  final epoch " << last[0] << ": val_loss = " << last[3]
                << "  val_accuracy = " << last[4] << "\n";
      return 0;
    }
    if (cmd_ablation->parsed()) {
      const aimc::CsvDocument doc = aimc::run_ablation(cfg, seed, jobs);
      const std::string path = out_path.empty() ? "ablation.csv" : out_path;
      aimc::write_csv_file(doc, path);
      report_written(doc, path);
      for (const auto &row : doc.rows)
        if (row[0] == "mean")
          std::cout << "  " << row[1] << " @ t=" << row[2]
                    << " s: mean accuracy = " << row[3] << "\n";
      return 0;
    }
  } catch (const aimc::Error &e) {
    std::cerr << "error: " << e.category() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
