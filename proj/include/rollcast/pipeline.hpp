#pragma once
#include <string>
#include <vector>

#include "rollcast/config_io.hpp"

namespace rollcast {

// Workspace layout used by the subcommands: one root directory holding
// data/, train_erdm/, train_baseline/, forecast*/ and eval/ stages. Every
// stage writes the resolved config it ran with next to its outputs.

// Simulates train and test trajectories, standardizes per channel on the
// train split (when configured), and writes both splits with the
// standardization stats in their headers.
struct GeneratePaths {
  std::string train, test;
};
GeneratePaths run_generate(const RunConfig& cfg, const std::string& out_dir);

// Trains cfg.train_target on the generated train split; writes
// checkpoint.bin (EMA parameters), periodic checkpoint_<step>.bin files, and
// loss.csv with one (step, loss, lr, grad_norm) row per step.
struct TrainPaths {
  std::string checkpoint, loss_csv;
  double last_loss = 0.0;
};
TrainPaths run_train(const RunConfig& cfg, const std::string& out_dir,
                     const std::string& data_dir);

// Rolls out an ensemble forecast from the test split's first snapshot. A
// rolling checkpoint goes through the window sampler (with the configured
// initializer); a one-step conditional checkpoint is rolled out
// autoregressively. Members run concurrently on preassigned random-number
// streams, so the output bytes do not depend on thread scheduling.
struct ForecastPaths {
  std::string forecast;
};
ForecastPaths run_forecast(const RunConfig& cfg, const std::string& out_dir,
                           const std::string& data_dir, const std::string& checkpoint,
                           int horizon, bool trace);

// Scores forecast files against the test split: per-lead CRPS, ensemble
// rmse/spread/ssr, plus a summary table with second-half aggregates and
// skill relative to the first file.
struct EvaluatePaths {
  std::vector<std::string> per_forecast;
  std::string summary;
};
EvaluatePaths run_evaluate(const RunConfig& cfg, const std::string& out_dir,
                           const std::vector<std::string>& forecasts,
                           const std::string& truth_path);

// Writes the (snapshot, t, sigma) grid of the configured schedule.
std::string run_schedule_dump(const RunConfig& cfg, const std::string& out_dir);

// Aggregate scores evaluate computes per forecast file; exposed for tests
// and the acceptance harness.
struct ForecastScores {
  std::vector<double> crps, rmse, spread, ssr;  // per lead, lead 1 first
  double crps_all = 0.0, crps_second_half = 0.0;
  double ssr_all = 0.0, ssr_second_half = 0.0;
};
ForecastScores score_forecast(const Mat& truth, const ArrayFile& forecast);

}  // namespace rollcast
