#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "rollcast/metrics.hpp"
#include "rollcast/pipeline.hpp"

using namespace rollcast;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_ou_config() {
  RunConfig cfg;
  cfg.system.kind = SystemKind::ou;
  cfg.system.dim = 2;
  cfg.system.stride = 1;
  cfg.system.burn_in = 50;
  cfg.data.n_train = 600;
  cfg.data.n_test = 80;
  cfg.model.hidden = {32, 32};
  cfg.training.steps = 300;
  cfg.training.batch = 16;
  cfg.training.checkpoint_every = 200;
  cfg.baseline.sample_steps = 12;
  cfg.members = 8;
  cfg.seed = 77;
  return cfg;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(bool(in));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) lines.push_back(line);
  return lines;
}

std::string read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(bool(in));
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::vector<double> csv_row(const std::string& line) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t comma = line.find(',', pos);
    if (comma == std::string::npos) comma = line.size();
    vals.push_back(std::stod(line.substr(pos, comma - pos)));
    pos = comma + 1;
  }
  return vals;
}

}  // namespace

TEST_CASE("full workspace run: generate, train both targets, forecast, evaluate") {
  const std::string root = "pipeline_test_tmp";
  fs::remove_all(root);
  RunConfig cfg = tiny_ou_config();

  GeneratePaths gp = run_generate(cfg, root + "/data");
  ArrayFile train = read_array(gp.train);
  ArrayFile test = read_array(gp.test);
  REQUIRE(train.header.shape == std::vector<int>({600, 2}));
  REQUIRE(test.header.shape == std::vector<int>({80, 2}));
  CHECK(train.header.config_hash == config_hash(cfg));
  CHECK(test.header.norm_mean == train.header.norm_mean);
  // standardized train split has near-zero mean and near-unit variance
  double mean = 0.0, var = 0.0;
  for (double v : train.data) mean += v;
  mean /= double(train.data.size());
  for (double v : train.data) var += (v - mean) * (v - mean);
  var /= double(train.data.size() - 1);
  CHECK(std::abs(mean) < 0.05);
  CHECK(var == doctest::Approx(1.0).epsilon(0.05));
  CHECK(fs::exists(root + "/data/config.json"));

  TrainPaths tp = run_train(cfg, root + "/train_erdm", root + "/data");
  CHECK(fs::exists(tp.checkpoint));
  CHECK(fs::exists(root + "/train_erdm/checkpoint_200.bin"));
  auto loss_lines = read_lines(tp.loss_csv);
  REQUIRE(int(loss_lines.size()) == cfg.training.steps + 1);
  CHECK(loss_lines[0] == "step,loss,lr,grad_norm");
  double head = 0.0, tail = 0.0;
  for (int i = 1; i <= 30; ++i) head += csv_row(loss_lines[std::size_t(i)])[1];
  for (int i = cfg.training.steps - 29; i <= cfg.training.steps; ++i)
    tail += csv_row(loss_lines[std::size_t(i)])[1];
  CHECK(tail < head);  // 300 steps from random init must reduce the loss

  RunConfig bcfg = cfg;
  bcfg.train_target = "edm-baseline";
  TrainPaths bp = run_train(bcfg, root + "/train_baseline", root + "/data");
  Checkpoint bck = load_checkpoint(bp.checkpoint);
  CHECK(bck.den.window() == 1);
  CHECK(bck.den.cond_dim() == 2);
  CHECK(bck.schedule.sigma_max == 80.0);

  RunConfig fcfg = cfg;
  fcfg.init.forecaster_checkpoint = bp.checkpoint;
  ForecastPaths fp =
      run_forecast(fcfg, root + "/forecast", root + "/data", tp.checkpoint, 12, true);
  ArrayFile fc = read_array(fp.forecast);
  REQUIRE(fc.header.shape == std::vector<int>({8, 12, 2}));
  CHECK(fc.header.config_hash == config_hash(fcfg));
  for (double v : fc.data) CHECK(std::isfinite(v));
  auto trace_lines = read_lines(root + "/forecast/trace.csv");
  CHECK(trace_lines.size() > 10);
  CHECK(trace_lines[0].rfind("iter,t_cur,t_next,n_clean,sigma0", 0) == 0);

  // members differ from each other but share no bytes with a reseeded run
  bool differ = false;
  for (int k = 0; k < 24; ++k) differ |= fc.data[std::size_t(k)] != fc.data[std::size_t(24 + k)];
  CHECK(differ);

  // one-step checkpoint produces an autoregressive ensemble with the same layout
  ForecastPaths bfp = run_forecast(fcfg, root + "/forecast_base", root + "/data", bp.checkpoint,
                                   12, false);
  ArrayFile bfc = read_array(bfp.forecast);
  REQUIRE(bfc.header.shape == std::vector<int>({8, 12, 2}));
  CHECK(bfc.header.meta_json.find("one-step") != std::string::npos);

  EvaluatePaths ep = run_evaluate(fcfg, root + "/eval", {fp.forecast, bfp.forecast},
                                  root + "/data/test.bin");
  REQUIRE(ep.per_forecast.size() == 2);
  auto m0 = read_lines(ep.per_forecast[0]);
  REQUIRE(m0.size() == 13);  // header + one row per lead
  CHECK(m0[0] == "lead,crps,rmse,spread,ssr");
  for (std::size_t i = 1; i < m0.size(); ++i) {
    auto row = csv_row(m0[i]);
    REQUIRE(row.size() == 5);
    CHECK(row[0] == double(i));
    CHECK(row[1] > 0.0);  // crps
    CHECK(row[2] > 0.0);  // rmse
    CHECK(row[3] > 0.0);  // spread
  }
  auto summary = read_lines(ep.summary);
  REQUIRE(summary.size() == 3);
  CHECK(summary[0] ==
        "file,crps_all,crps_second_half,ssr_all,ssr_second_half,"
        "crpss_vs_first_all,crpss_vs_first_second_half");
  // the reference row scores itself: zero skill against itself
  auto ref = csv_row(summary[1].substr(summary[1].find(',') + 1));
  CHECK(ref[4] == 0.0);
  CHECK(ref[5] == 0.0);

  fs::remove_all(root);
}

TEST_CASE("forecast output is byte-identical across reruns") {
  const std::string root = "pipeline_det_tmp";
  fs::remove_all(root);
  RunConfig cfg = tiny_ou_config();
  cfg.data.n_train = 200;
  cfg.training.steps = 60;
  cfg.init.kind = "persistence";
  run_generate(cfg, root + "/data");
  TrainPaths tp = run_train(cfg, root + "/train_erdm", root + "/data");

  ForecastPaths a = run_forecast(cfg, root + "/fa", root + "/data", tp.checkpoint, 10, false);
  ForecastPaths b = run_forecast(cfg, root + "/fb", root + "/data", tp.checkpoint, 10, false);
  CHECK(read_bytes(a.forecast) == read_bytes(b.forecast));

  // a different seed must change the sampled members
  RunConfig cfg2 = cfg;
  cfg2.seed = cfg.seed + 1;
  ForecastPaths c = run_forecast(cfg2, root + "/fc", root + "/data", tp.checkpoint, 10, false);
  CHECK(read_bytes(a.forecast) != read_bytes(c.forecast));
  fs::remove_all(root);
}

TEST_CASE("truth and persistence initializers are accepted by the forecast stage") {
  const std::string root = "pipeline_init_tmp";
  fs::remove_all(root);
  RunConfig cfg = tiny_ou_config();
  cfg.data.n_train = 200;
  cfg.training.steps = 40;
  run_generate(cfg, root + "/data");
  TrainPaths tp = run_train(cfg, root + "/train_erdm", root + "/data");

  cfg.init.kind = "truth";
  ForecastPaths ft = run_forecast(cfg, root + "/ft", root + "/data", tp.checkpoint, 8, false);
  CHECK(read_array(ft.forecast).header.shape == std::vector<int>({8, 8, 2}));

  cfg.init.kind = "persistence";
  ForecastPaths fpers = run_forecast(cfg, root + "/fp", root + "/data", tp.checkpoint, 8, false);
  CHECK(read_bytes(ft.forecast) != read_bytes(fpers.forecast));
  fs::remove_all(root);
}

TEST_CASE("pipeline stages fail loudly on bad inputs") {
  const std::string root = "pipeline_err_tmp";
  fs::remove_all(root);
  RunConfig cfg = tiny_ou_config();
  cfg.data.n_train = 100;
  cfg.data.n_test = 4;  // shorter than window + 1
  cfg.training.steps = 5;
  run_generate(cfg, root + "/data");
  TrainPaths tp = run_train(cfg, root + "/tr", root + "/data");

  RunConfig bcfg = cfg;
  bcfg.train_target = "edm-baseline";
  TrainPaths bp = run_train(bcfg, root + "/tb", root + "/data");

  cfg.init.kind = "truth";
  CHECK_THROWS_WITH_AS(run_forecast(cfg, root + "/f", root + "/data", tp.checkpoint, 4, false),
                       "forecast: test split too short for the truth initializer",
                       std::runtime_error);
  CHECK_THROWS_WITH_AS(run_forecast(cfg, root + "/f", root + "/data", bp.checkpoint, 4, true),
                       "forecast: --trace requires a rolling model checkpoint",
                       std::invalid_argument);
  cfg.init.kind = "external_forecaster";
  cfg.init.forecaster_checkpoint = "";
  CHECK_THROWS_WITH_AS(run_forecast(cfg, root + "/f", root + "/data", tp.checkpoint, 4, false),
                       "forecast: init.forecaster_checkpoint is empty", std::runtime_error);
  CHECK_THROWS_WITH_AS(run_forecast(cfg, root + "/f", root + "/data", tp.checkpoint, 0, false),
                       "forecast: horizon must be >= 1", std::invalid_argument);
  CHECK_THROWS_AS(run_evaluate(cfg, root + "/e", {}, root + "/data/test.bin"),
                  std::invalid_argument);
  // initializer checkpoint of the wrong kind
  cfg.init.forecaster_checkpoint = tp.checkpoint;
  CHECK_THROWS_WITH_AS(run_forecast(cfg, root + "/f", root + "/data", tp.checkpoint, 4, false),
                       "forecast: initializer checkpoint is not a one-step conditional model",
                       std::runtime_error);
  fs::remove_all(root);
}

TEST_CASE("schedule dump walks every snapshot over the unit interval") {
  const std::string root = "pipeline_sched_tmp";
  fs::remove_all(root);
  RunConfig cfg;
  std::string path = run_schedule_dump(cfg, root);
  auto lines = read_lines(path);
  REQUIRE(int(lines.size()) == 1 + cfg.schedule.window * 101);
  CHECK(lines[0] == "snapshot,t,sigma");
  auto first = csv_row(lines[1]);
  CHECK(first[0] == 1.0);
  CHECK(first[1] == 0.0);
  CHECK(first[2] == doctest::Approx(cfg.schedule.sigma_bar(1, 0.0)).epsilon(1e-15));
  auto last = csv_row(lines.back());
  CHECK(last[0] == double(cfg.schedule.window));
  CHECK(last[1] == 1.0);
  CHECK(last[2] == doctest::Approx(cfg.schedule.sigma_bar(cfg.schedule.window, 1.0))
                       .epsilon(1e-15));
  // each snapshot's sigma decreases in t
  for (std::size_t i = 2; i < lines.size(); ++i) {
    auto prev = csv_row(lines[i - 1]);
    auto cur = csv_row(lines[i]);
    if (cur[0] == prev[0]) CHECK(cur[2] < prev[2]);
  }
  fs::remove_all(root);
}
