/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "aimc/experiments.hpp"
#include "test_helpers.hpp"

using namespace aimc;

namespace {

std::string serialize(const CsvDocument &doc) {
  std::ostringstream out;
  write_csv(doc, out);
  return out.str();
}

/* independent reader for the artifact format: '#'-prefixed header lines,
 * one column line, comma-separated rows with no quoting */
struct ParsedCsv {
  std::vector<std::string> headers;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

std::vector<std::string> split_commas(const std::string &line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  out.push_back(cell);
  return out;
}

ParsedCsv parse_csv(const std::string &text) {
  ParsedCsv doc;
  std::istringstream in(text);
  std::string line;
  bool have_columns = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') {
      doc.headers.push_back(line);
    } else if (!have_columns) {
      doc.columns = split_commas(line);
      have_columns = true;
    } else {
      doc.rows.push_back(split_commas(line));
    }
  }
  return doc;
}

double cell_num(const ParsedCsv &doc, std::size_t row, std::size_t col) {
  return std::stod(doc.rows.at(row).at(col));
}

std::string write_temp(const std::string &name, const std::string &text) {
  const std::string path = "./" + name;
  std::ofstream out(path);
  out << text;
  return path;
}

ExperimentConfig tiny_bench_config() {
  return parse_experiment_config(R"({
    "ablation": {"seeds": 2, "train_count": 64, "val_count": 64,
                 "hidden": 16, "tile_dim": 16, "epochs": 2,
                 "eval_times": [20]}
  })");
}

} // namespace

TEST_CASE("empty config object reproduces the built-in defaults") {
  ExperimentConfig parsed = parse_experiment_config("{}");
  ExperimentConfig defaults = default_experiment_config();
  CHECK(config_fingerprint(parsed) == config_fingerprint(defaults));
  CHECK(parsed.hw.rows == 512);
  CHECK(parsed.hw.i_sat == 50.0);
  CHECK(parsed.hw.y_factor == doctest::Approx(2.54).epsilon(1e-12));
  CHECK(parsed.mvm.n_inputs == 5120);
  CHECK(parsed.mvm.times.size() == 6);
  CHECK(parsed.calibration.percentile_k == 99.995);
  CHECK(parsed.ablation.seeds == 10);
  CHECK(parsed.ablation.i_sat_factor == 0.3);
}

TEST_CASE("section overrides land in the right fields") {
  ExperimentConfig cfg = parse_experiment_config(R"({
    "hardware": {"rows": 128, "cols": 64, "wire_resistance": 0.5},
    "noise": {"sigma_out": 0.2, "prog_coeffs": [0.1, 0.2, 0.3]},
    "mvm": {"n_inputs": 17, "ir_drop": true, "times": [20, 40]},
    "calibration": {"n_std": 3.5, "g_min_floor": 2.0},
    "train": {"quantization": false, "lr_init": 0.25, "lr_final": 0.025},
    "ablation": {"seeds": 4, "data_scale": 1.5}
  })");
  CHECK(cfg.hw.rows == 128);
  CHECK(cfg.hw.cols == 64);
  CHECK(cfg.hw.wire_resistance == 0.5);
  CHECK(cfg.noise.sigma_out == 0.2);
  CHECK(cfg.noise.prog_coeffs[2] == 0.3);
  CHECK(cfg.mvm.n_inputs == 17);
  CHECK(cfg.mvm.ir_drop);
  CHECK(cfg.mvm.times == std::vector<double>{20.0, 40.0});
  CHECK(cfg.calibration.n_std == 3.5);
  CHECK(cfg.calibration.g_min_floor == 2.0);
  CHECK_FALSE(cfg.train.enable_quantization);
  CHECK(cfg.train.lr_init == 0.25);
  CHECK(cfg.ablation.seeds == 4);
  CHECK(cfg.ablation.data_scale == 1.5);
}

TEST_CASE("unknown keys are rejected with the offending path") {
  CHECK_THROWS_AS((void)parse_experiment_config(R"({"bogus": {}})"),
                  ConfigError);
  const char *sections[] = {"hardware", "noise",  "mvm",
                            "calibration", "train", "ablation"};
  for (const char *section : sections) {
    const std::string text =
        std::string("{\"") + section + "\": {\"bogus\": 1}}";
    try {
      (void)parse_experiment_config(text);
      FAIL("missing rejection for ", section);
    } catch (const ConfigError &e) {
      CHECK(std::string(e.what()).find(std::string(section) + ".bogus") !=
            std::string::npos);
    }
  }
}

TEST_CASE("type mismatches and malformed text are parse errors") {
  CHECK_THROWS_AS((void)parse_experiment_config("{"), ParseError);
  CHECK_THROWS_AS((void)parse_experiment_config("[]"), ParseError);
  CHECK_THROWS_AS(
      (void)parse_experiment_config(R"({"hardware": {"rows": "many"}})"),
      ParseError);
  CHECK_THROWS_AS(
      (void)parse_experiment_config(R"({"hardware": {"rows": 7.5}})"),
      ParseError);
  CHECK_THROWS_AS(
      (void)parse_experiment_config(R"({"mvm": {"times": 5}})"), ParseError);
  CHECK_THROWS_AS(
      (void)parse_experiment_config(R"({"mvm": {"ir_drop": 1}})"),
      ParseError);
  CHECK_THROWS_AS(
      (void)parse_experiment_config(R"({"noise": {"prog_coeffs": [1, 2]}})"),
      ConfigError);
  CHECK_THROWS_AS((void)load_experiment_config("./no_such_config.json"),
                  IoError);
}

TEST_CASE("converter limits derive from the hardware unless pinned") {
  ExperimentConfig derived =
      parse_experiment_config(R"({"hardware": {"g_max": 50}})");
  CHECK(derived.hw.i_sat == doctest::Approx(100.0).epsilon(1e-12));
  CHECK(derived.hw.y_factor == doctest::Approx(1.27).epsilon(1e-12));

  ExperimentConfig pinned = parse_experiment_config(
      R"({"hardware": {"g_max": 50, "i_sat": 50}})");
  CHECK(pinned.hw.i_sat == 50.0);
  CHECK(pinned.hw.y_factor == doctest::Approx(2.54).epsilon(1e-12));

  ExperimentConfig both = parse_experiment_config(
      R"({"hardware": {"g_max": 50, "i_sat": 50, "y_factor": 1.0}})");
  CHECK(both.hw.y_factor == 1.0);
}

TEST_CASE("finalize syncs the training graph with the hardware") {
  ExperimentConfig cfg = parse_experiment_config(
      R"({"hardware": {"adc_bits": 6, "dac_bits": 4}})");
  CHECK(cfg.train.adc_bits == 6);
  CHECK(cfg.train.dac_bits == 4);
  CHECK(cfg.train.sat_bound ==
        doctest::Approx(cfg.hw.i_sat / (cfg.hw.v_read * cfg.hw.g_max))
            .epsilon(1e-12));
}

TEST_CASE("finalize rejects inconsistent experiment settings") {
  CHECK_THROWS_AS(
      (void)parse_experiment_config(R"({"ablation": {"seeds": 1}})"),
      ConfigError);
  CHECK_THROWS_AS(
      (void)parse_experiment_config(R"({"mvm": {"times": [10]}})"),
      ConfigError);
  CHECK_THROWS_AS(
      (void)parse_experiment_config(R"({"ablation": {"eval_times": [5]}})"),
      ConfigError);
  CHECK_THROWS_AS(
      (void)parse_experiment_config(
          R"({"calibration": {"percentile_k": 0}})"),
      ConfigError);
  CHECK_THROWS_AS(
      (void)parse_experiment_config(
          R"({"ablation": {"lr_init": 1e-6, "lr_final": 1e-3}})"),
      ConfigError);
  CHECK_THROWS_AS(
      (void)parse_experiment_config(R"({"mvm": {"n_inputs": 0}})"),
      ConfigError);
}

TEST_CASE("fingerprint is canonical and sensitive to every section") {
  const std::string base = config_fingerprint(default_experiment_config());
  CHECK(base.find('\n') == std::string::npos);
  CHECK(config_fingerprint(parse_experiment_config("{}")) == base);
  CHECK(config_fingerprint(parse_experiment_config(
            R"({"mvm": {"n_inputs": 5120}, "hardware": {"rows": 512}})")) ==
        base);
  CHECK(config_fingerprint(parse_experiment_config(
            R"({"ablation": {"seeds": 3}})")) != base);
  CHECK(config_fingerprint(parse_experiment_config(
            R"({"noise": {"sigma_w": 0.01}})")) != base);
}

TEST_CASE("map-report matches a hand-tiled manifest") {
  const std::string path = write_temp("tiny.manifest",
                                      "# two layers\n"
                                      "total_params 7190\n"
                                      "fit linear 64 64\n"
                                      "split linear 100 30\n");
  TileHardwareConfig hw;
  hw.rows = 64;
  hw.cols = 64;
  const ParsedCsv doc = parse_csv(serialize(run_map_report(path, hw)));
  REQUIRE(doc.columns ==
          std::vector<std::string>{"name", "kind", "rows", "cols", "tiles",
                                   "mapped_params", "utilization_percent"});
  REQUIRE(doc.rows.size() == 3);
  CHECK(doc.rows[0][0] == "fit");
  CHECK(cell_num(doc, 0, 4) == 1);
  CHECK(cell_num(doc, 0, 5) == 64 * 64 + 64);
  CHECK(cell_num(doc, 0, 6) == 100.0);
  CHECK(doc.rows[1][0] == "split");
  CHECK(cell_num(doc, 1, 4) == 2);
  CHECK(cell_num(doc, 1, 5) == 100 * 30 + 30);
  CHECK(cell_num(doc, 1, 6) ==
        doctest::Approx(100.0 * 3000.0 / (2.0 * 4096.0)).epsilon(1e-12));
  CHECK(doc.rows[2][0] == "TOTAL");
  CHECK(cell_num(doc, 2, 4) == 3);
  CHECK(cell_num(doc, 2, 5) == 7190);
  CHECK(cell_num(doc, 2, 6) ==
        doctest::Approx((100.0 + 100.0 * 3000.0 / (2.0 * 4096.0)) / 2.0)
            .epsilon(1e-12));
  std::remove(path.c_str());
}

TEST_CASE("map-report reproduces the transformer tiling totals") {
  const std::string path = aimc_test::data_dir() + "/roberta_base.manifest";
  const ParsedCsv doc =
      parse_csv(serialize(run_map_report(path, TileHardwareConfig{})));
  REQUIRE(!doc.rows.empty());
  const std::size_t last = doc.rows.size() - 1;
  CHECK(doc.rows[last][0] == "TOTAL");
  CHECK(cell_num(doc, last, 4) == 486);
  CHECK(cell_num(doc, last, 5) == 85609730);
  CHECK(std::abs(cell_num(doc, last, 6) - 61.57) <= 0.01);
}

TEST_CASE("mvm-error is exact when every analog mechanism is disabled") {
  ExperimentConfig cfg = parse_experiment_config(R"({
    "hardware": {"rows": 48, "cols": 48},
    "noise": {"prog_coeffs": [0, 0, 0], "read_coeffs": [0, 0],
              "drift_nu_mean": 0, "drift_nu_std": 0},
    "mvm": {"n_inputs": 32, "quantization": false, "times": [20, 3600]}
  })");
  const ParsedCsv doc = parse_csv(serialize(run_mvm_error(cfg, 5)));
  REQUIRE(doc.rows.size() == 2);
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    CHECK(cell_num(doc, r, 1) <= 1e-9);
  }
}

TEST_CASE("mvm-error artifact schema and byte-identical rerun") {
  ExperimentConfig cfg = parse_experiment_config(R"({
    "hardware": {"rows": 64, "cols": 64},
    "mvm": {"n_inputs": 40, "times": [20, 60, 3600]}
  })");
  const std::string first = serialize(run_mvm_error(cfg, 9));
  const std::string second = serialize(run_mvm_error(cfg, 9));
  CHECK(first == second);
  CHECK(serialize(run_mvm_error(cfg, 10)) != first);

  const ParsedCsv doc = parse_csv(first);
  REQUIRE(doc.headers.size() == 3);
  CHECK(doc.headers[0] == "# experiment: mvm-error");
  CHECK(doc.headers[1] == "# seed: 9");
  CHECK(doc.headers[2] == "# config: " + config_fingerprint(cfg));
  REQUIRE(doc.columns ==
          std::vector<std::string>{"time_seconds", "l2_error_percent",
                                   "seed"});
  REQUIRE(doc.rows.size() == 3);
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    CHECK(cell_num(doc, r, 0) == cfg.mvm.times[r]);
    CHECK(cell_num(doc, r, 1) > 0.0);
    CHECK(doc.rows[r][2] == "9");
  }
}

TEST_CASE("calibrate demo reports every column decision deterministically") {
  ExperimentConfig cfg = tiny_bench_config();
  const std::string first = serialize(run_calibrate_demo(cfg, 3));
  CHECK(first == serialize(run_calibrate_demo(cfg, 3)));

  const ParsedCsv doc = parse_csv(first);
  REQUIRE(doc.columns == std::vector<std::string>{
                             "layer", "tile", "column", "input_range",
                             "g_col_cap", "peak_before", "peak_after",
                             "saturating", "skipped"});
  REQUIRE(!doc.rows.empty());
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    CHECK(cell_num(doc, r, 3) > 0.0);
    if (!doc.rows[r][4].empty()) {
      CHECK(cell_num(doc, r, 4) > 0.0);
      CHECK(cell_num(doc, r, 4) <= cfg.hw.g_max);
    }
    CHECK((doc.rows[r][7] == "0" || doc.rows[r][7] == "1"));
    CHECK((doc.rows[r][8] == "0" || doc.rows[r][8] == "1"));
  }
}

TEST_CASE("train demo logs one row per epoch") {
  ExperimentConfig cfg = tiny_bench_config();
  const std::string first = serialize(run_train_demo(cfg, 21));
  CHECK(first == serialize(run_train_demo(cfg, 21)));

  const ParsedCsv doc = parse_csv(first);
  REQUIRE(doc.columns ==
          std::vector<std::string>{"epoch", "train_loss", "train_accuracy",
                                   "val_loss", "val_accuracy", "seed"});
  REQUIRE(doc.rows.size() == cfg.ablation.epochs);
  for (std::size_t r = 0; r < doc.rows.size(); ++r) {
    CHECK(cell_num(doc, r, 0) == static_cast<double>(r + 1));
    CHECK(std::isfinite(cell_num(doc, r, 1)));
    CHECK(cell_num(doc, r, 2) >= 0.0);
    CHECK(cell_num(doc, r, 2) <= 1.0);
    CHECK(cell_num(doc, r, 4) >= 0.0);
    CHECK(cell_num(doc, r, 4) <= 1.0);
  }
}

TEST_CASE("ablation artifact carries data plus exact summary rows") {
  ExperimentConfig cfg = tiny_bench_config();
  const ParsedCsv doc = parse_csv(serialize(run_ablation(cfg, 11, 1)));
  REQUIRE(doc.columns ==
          std::vector<std::string>{"seed", "variant", "time_seconds",
                                   "accuracy"});
  const std::vector<std::string> variants = {
      "none", "pt_input", "pt_conductance", "pt_both", "learned",
      "learned_pt"};
  const std::size_t data_rows =
      cfg.ablation.seeds * variants.size() * cfg.ablation.eval_times.size();
  const std::size_t summary_rows =
      2 * variants.size() * cfg.ablation.eval_times.size();
  REQUIRE(doc.rows.size() == data_rows + summary_rows);

  for (const std::string &variant : variants) {
    std::vector<double> accs;
    double mean_reported = -1.0;
    double std_reported = -1.0;
    for (const auto &row : doc.rows) {
      if (row[1] != variant) {
        continue;
      }
      if (row[0] == "mean") {
        mean_reported = std::stod(row[3]);
      } else if (row[0] == "std") {
        std_reported = std::stod(row[3]);
      } else {
        accs.push_back(std::stod(row[3]));
      }
    }
    REQUIRE(accs.size() == cfg.ablation.seeds);
    const aimc_test::SampleStats st = aimc_test::sample_stats(accs);
    CHECK(mean_reported == doctest::Approx(st.mean).epsilon(1e-12));
    CHECK(std_reported == doctest::Approx(st.std_dev).epsilon(1e-12));
    for (double a : accs) {
      CHECK(a >= 0.0);
      CHECK(a <= 1.0);
    }
  }
}

TEST_CASE("ablation thread sweep is identical to the serial run") {
  ExperimentConfig cfg = tiny_bench_config();
  const std::string serial = serialize(run_ablation(cfg, 11, 1));
  const std::string threaded = serialize(run_ablation(cfg, 11, 3));
  CHECK(threaded == serial);
}
