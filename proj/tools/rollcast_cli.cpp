#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rollcast/pipeline.hpp"

using namespace rollcast;

namespace {

struct CliState {
  std::string config_path;
  std::string out_root = "run";
  std::string stage_dir;  // overrides the conventional stage directory
  std::string data_dir, ckpt, truth, target;
  std::vector<std::string> sets, forecast_files;
  std::uint64_t seed = 0;
  int members = 0, horizon = 64;
  bool trace = false;
};

void add_common(CLI::App* sub, CliState& st) {
  sub->add_option("--config", st.config_path, "JSON run configuration (defaults when omitted)");
  sub->add_option("--set", st.sets, "override one config field, dotted path: key=value")
      ->expected(-1)
      ->allow_extra_args(false);
  sub->add_option("--out", st.out_root, "workspace root directory");
  sub->add_option("--dir", st.stage_dir, "output directory for this stage (overrides the layout)");
  sub->add_option("--seed", st.seed, "override the run seed");
  sub->add_option("--members", st.members, "override the ensemble size");
}

bool opt_given(const CLI::App* sub, const std::string& name) {
  const CLI::Option* o = sub->get_option_no_throw(name);
  return o != nullptr && o->count() > 0;
}

RunConfig resolve_config(const CLI::App* sub, CliState& st) {
  RunConfig cfg = st.config_path.empty() ? RunConfig{} : load_config(st.config_path);
  for (const auto& kv : st.sets) {
    auto pos = kv.find('=');
    if (pos == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got \"" + kv + "\"");
    apply_override(cfg, kv.substr(0, pos), kv.substr(pos + 1));
  }
  if (opt_given(sub, "--target")) apply_override(cfg, "train_target", st.target);
  if (opt_given(sub, "--seed")) cfg.seed = st.seed;
  if (opt_given(sub, "--members")) cfg.members = st.members;
  cfg.validate();
  return cfg;
}

std::string stage(const CliState& st, const std::string& conventional) {
  return st.stage_dir.empty() ? st.out_root + "/" + conventional : st.stage_dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rolling-window diffusion forecasting for chaotic systems"};
  app.require_subcommand(1);
  CliState st;

  auto* gen = app.add_subcommand("generate", "simulate and standardize train/test trajectories");
  add_common(gen, st);

  auto* trn = app.add_subcommand("train", "train the rolling model or the one-step baseline");
  add_common(trn, st);
  trn->add_option("--data", st.data_dir, "directory holding train.bin (default <out>/data)");
  trn->add_option("--target", st.target, "erdm or edm-baseline");

  auto* fct = app.add_subcommand("forecast", "roll out an ensemble forecast from a checkpoint");
  add_common(fct, st);
  fct->add_option("--data", st.data_dir, "directory holding test.bin (default <out>/data)");
  fct->add_option("--ckpt", st.ckpt, "checkpoint file (default <out>/train_erdm/checkpoint.bin)");
  fct->add_option("--horizon", st.horizon, "number of forecast snapshots");
  fct->add_flag("--trace", st.trace, "write member 0's solver trace as CSV");

  auto* evl = app.add_subcommand("evaluate", "score forecast files against the test split");
  add_common(evl, st);
  evl->add_option("--forecast", st.forecast_files,
                  "forecast file(s) to score (default <out>/forecast/forecast.bin)")
      ->expected(-1)
      ->allow_extra_args(false);
  evl->add_option("--truth", st.truth, "truth trajectory (default <out>/data/test.bin)");

  auto* dmp = app.add_subcommand("schedule-dump", "write the (snapshot, t, sigma) grid as CSV");
  add_common(dmp, st);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      RunConfig cfg = resolve_config(gen, st);
      GeneratePaths p = run_generate(cfg, stage(st, "data"));
      std::printf("wrote %s\nwrote %s\n", p.train.c_str(), p.test.c_str());
    } else if (trn->parsed()) {
      RunConfig cfg = resolve_config(trn, st);
      std::string data = st.data_dir.empty() ? st.out_root + "/data" : st.data_dir;
      std::string dir =
          stage(st, cfg.train_target == "edm-baseline" ? "train_baseline" : "train_erdm");
      TrainPaths p = run_train(cfg, dir, data);
      std::printf("wrote %s\nwrote %s\nfinal loss %.6g\n", p.checkpoint.c_str(),
                  p.loss_csv.c_str(), p.last_loss);
    } else if (fct->parsed()) {
      RunConfig cfg = resolve_config(fct, st);
      std::string data = st.data_dir.empty() ? st.out_root + "/data" : st.data_dir;
      std::string ckpt =
          st.ckpt.empty() ? st.out_root + "/train_erdm/checkpoint.bin" : st.ckpt;
      if (cfg.init.kind == "external_forecaster" && cfg.init.forecaster_checkpoint.empty())
        cfg.init.forecaster_checkpoint = st.out_root + "/train_baseline/checkpoint.bin";
      ForecastPaths p = run_forecast(cfg, stage(st, "forecast"), data, ckpt, st.horizon, st.trace);
      std::printf("wrote %s\n", p.forecast.c_str());
    } else if (evl->parsed()) {
      RunConfig cfg = resolve_config(evl, st);
      std::vector<std::string> files = st.forecast_files;
      if (files.empty()) files.push_back(st.out_root + "/forecast/forecast.bin");
      std::string truth = st.truth.empty() ? st.out_root + "/data/test.bin" : st.truth;
      EvaluatePaths p = run_evaluate(cfg, stage(st, "eval"), files, truth);
      for (const auto& f : p.per_forecast) std::printf("wrote %s\n", f.c_str());
      std::printf("wrote %s\n", p.summary.c_str());
    } else if (dmp->parsed()) {
      RunConfig cfg = resolve_config(dmp, st);
      std::string path = run_schedule_dump(cfg, stage(st, "schedule"));
      std::printf("wrote %s\n", path.c_str());
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
