#include "rollcast/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <thread>

#include "rollcast/init.hpp"
#include "rollcast/metrics.hpp"
#include "rollcast/training.hpp"

namespace fs = std::filesystem;

namespace rollcast {
namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("pipeline: cannot create directory " + dir);
}

// All text outputs go through temp + rename like the binary arrays, so a
// crash never leaves a truncated file behind.
void write_text_atomic(const std::string& path, const std::string& text) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("pipeline: cannot open " + tmp + " for writing");
    out << text;
    if (!out) throw std::runtime_error("pipeline: write failed for " + tmp);
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw std::runtime_error("pipeline: cannot rename " + tmp + " to " + path);
}

Mat to_mat(const ArrayFile& f, const std::string& what) {
  if (f.header.shape.size() != 2)
    throw std::runtime_error("pipeline: " + what + " must be a 2-d array (snapshots x channels)");
  Mat m(f.header.shape[0], f.header.shape[1]);
  m.v.assign(f.data.begin(), f.data.end());
  return m;
}

std::vector<std::string> channel_names(const SystemSpec& s) {
  if (s.kind == SystemKind::lorenz63) return {"x", "y", "z"};
  std::vector<std::string> names;
  names.reserve(std::size_t(s.dim));
  for (int i = 0; i < s.dim; ++i) names.push_back("c" + std::to_string(i));
  return names;
}

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

GeneratePaths run_generate(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  Rng train_rng = make_rng(cfg.seed, 11);
  Rng test_rng = make_rng(cfg.seed, 12);
  Mat train = simulate(cfg.system, cfg.data.n_train, train_rng);
  Mat test = simulate(cfg.system, cfg.data.n_test, test_rng);

  Standardizer st;
  if (cfg.data.standardize) {
    st.fit(train);  // test reuses the train-split stats
    train = st.apply(train);
    test = st.apply(test);
  } else {
    st.mean.assign(std::size_t(train.cols), 0.0);
    st.std.assign(std::size_t(train.cols), 1.0);
  }

  ArrayHeader h;
  h.channels = channel_names(cfg.system);
  h.norm_mean = st.mean;
  h.norm_std = st.std;
  h.config_hash = config_hash(cfg);

  GeneratePaths paths{out_dir + "/train.bin", out_dir + "/test.bin"};
  h.shape = {train.rows, train.cols};
  h.meta_json = "{\"split\":\"train\"}";
  write_array(paths.train, h, train.v);
  h.shape = {test.rows, test.cols};
  h.meta_json = "{\"split\":\"test\"}";
  write_array(paths.test, h, test.v);
  save_config(cfg, out_dir + "/config.json");
  return paths;
}

TrainPaths run_train(const RunConfig& cfg, const std::string& out_dir,
                     const std::string& data_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  Mat traj = to_mat(read_array(data_dir + "/train.bin"), "train split");
  const bool baseline = cfg.train_target == "edm-baseline";
  const int W = baseline ? 1 : cfg.schedule.window;
  if (window_count(traj.rows, W) < 1)
    throw std::runtime_error("train: train split too short for the window length");

  MlpDenoiser den =
      baseline ? MlpDenoiser(1, traj.cols, traj.cols, cfg.model.hidden, cfg.weighting.sigma_data)
               : MlpDenoiser(cfg.schedule.window, traj.cols, 0, cfg.model.hidden,
                             cfg.weighting.sigma_data);
  NoiseSchedule sched = cfg.schedule;
  if (baseline) {
    sched = NoiseSchedule{cfg.baseline.sigma_min, cfg.baseline.sigma_max, cfg.baseline.rho, 1};
    sched.validate();
  }

  Trainer trainer(den, cfg.training, sched, cfg.weighting, cfg.sampler.alpha);
  Rng init_rng = make_rng(cfg.seed, 21);
  trainer.init(init_rng);
  Rng data_rng = make_rng(cfg.seed, 22);
  Rng noise_rng = make_rng(cfg.seed, 23);

  const std::string hash = config_hash(cfg);
  std::string csv = "step,loss,lr,grad_norm\n";
  TrainPaths paths{out_dir + "/checkpoint.bin", out_dir + "/loss.csv", 0.0};
  for (int s = 0; s < cfg.training.steps; ++s) {
    std::vector<WindowSample> batch;
    batch.reserve(std::size_t(cfg.training.batch));
    for (int b = 0; b < cfg.training.batch; ++b) batch.push_back(random_window(traj, W, data_rng));
    StepInfo info =
        baseline ? trainer.step_baseline(batch, cfg.baseline.p_mean, cfg.baseline.p_std, noise_rng)
                 : trainer.step_rolling(batch, noise_rng);
    csv += std::to_string(s + 1) + "," + num(info.loss) + "," + num(info.lr) + "," +
           num(info.grad_norm) + "\n";
    paths.last_loss = info.loss;
    if (cfg.training.checkpoint_every > 0 && (s + 1) % cfg.training.checkpoint_every == 0 &&
        s + 1 < cfg.training.steps)
      save_checkpoint(out_dir + "/checkpoint_" + std::to_string(s + 1) + ".bin", den,
                      trainer.ema(), sched, cfg.weighting, hash);
  }
  // Checkpoints hold the EMA parameters; the raw ones only exist to continue
  // training and are not persisted.
  save_checkpoint(paths.checkpoint, den, trainer.ema(), sched, cfg.weighting, hash);
  write_text_atomic(paths.loss_csv, csv);
  save_config(cfg, out_dir + "/config.json");
  return paths;
}

ForecastPaths run_forecast(const RunConfig& cfg, const std::string& out_dir,
                           const std::string& data_dir, const std::string& checkpoint,
                           int horizon, bool trace) {
  cfg.validate();
  if (horizon < 1) throw std::invalid_argument("forecast: horizon must be >= 1");
  ensure_dir(out_dir);
  ArrayFile tf = read_array(data_dir + "/test.bin");
  Mat test = to_mat(tf, "test split");
  Checkpoint ck = load_checkpoint(checkpoint);
  if (ck.den.dim() != test.cols)
    throw std::runtime_error("forecast: checkpoint channel count does not match the test split");
  // A rolling checkpoint is sampled with the rolling-window solver; a
  // one-step conditional checkpoint is rolled out autoregressively.
  const bool one_step = ck.den.cond_dim() > 0;
  if (one_step && (ck.den.cond_dim() != ck.den.dim() || ck.den.window() != 1))
    throw std::runtime_error("forecast: conditional checkpoint is not a one-step model");
  if (one_step && trace)
    throw std::invalid_argument("forecast: --trace requires a rolling model checkpoint");
  const int W = ck.den.window();
  const int D = test.cols;
  const int M = cfg.members;
  if (test.rows < 1) throw std::runtime_error("forecast: test split is empty");
  Vec y0(test.row(0), test.row(0) + D);

  // The first test snapshot is the analysis state; truth for lead k is test
  // row k, so the truth initializer needs rows 1..W.
  std::unique_ptr<WindowForecaster> init;
  Mat truth_future;
  Checkpoint base_ck;
  if (one_step) {
    // no initializer: the rollout starts directly from the analysis state
  } else if (cfg.init.kind == "persistence") {
    init = std::make_unique<PersistenceInit>();
  } else if (cfg.init.kind == "truth") {
    if (test.rows < 1 + W)
      throw std::runtime_error("forecast: test split too short for the truth initializer");
    truth_future = Mat(W, D);
    for (int r = 0; r < W; ++r)
      std::copy(test.row(r + 1), test.row(r + 1) + D, truth_future.row(r));
    auto t = std::make_unique<TruthInit>();
    t->future = &truth_future;
    init = std::move(t);
  } else {
    if (cfg.init.forecaster_checkpoint.empty())
      throw std::runtime_error("forecast: init.forecaster_checkpoint is empty");
    base_ck = load_checkpoint(cfg.init.forecaster_checkpoint);
    if (base_ck.den.cond_dim() != base_ck.den.dim() || base_ck.den.window() != 1)
      throw std::runtime_error("forecast: initializer checkpoint is not a one-step conditional model");
    auto b = std::make_unique<BaselineInit>();
    b->den = &base_ck.den;
    b->segment = base_ck.schedule;
    b->n_steps = cfg.baseline.sample_steps;
    init = std::move(b);
  }

  Vec data(std::size_t(M) * horizon * D);
  std::string trace_text;
  // Stream ids are preassigned per member, so the result is byte-identical
  // however the members are scheduled across threads.
  auto run_member = [&](int m) {
    Rng srng = make_rng(cfg.seed, 0x20000000ull + std::uint64_t(m));
    Mat traj;
    if (one_step) {
      traj = edm_baseline_rollout(ck.den, y0, ck.schedule, cfg.baseline.sample_steps, horizon,
                                  srng);
    } else {
      Rng irng = make_rng(cfg.seed, 0x10000000ull + std::uint64_t(m));
      Mat y_init = init->forecast_window(y0, W, irng);
      TraceFn tfn;
      if (trace && m == 0) {
        tfn = [&trace_text](const TraceRow& row) {
          if (trace_text.empty()) {
            trace_text = "iter,t_cur,t_next,n_clean";
            for (std::size_t i = 0; i < row.sigma.size(); ++i)
              trace_text += ",sigma" + std::to_string(i);
            trace_text += "\n";
          }
          trace_text += std::to_string(row.iter) + "," + num(row.t_cur) + "," + num(row.t_next) +
                        "," + std::to_string(row.n_clean);
          for (double s : row.sigma) trace_text += "," + num(s);
          trace_text += "\n";
        };
      }
      traj = rolling_rollout(ck.den, ck.schedule, cfg.sampler, y_init, horizon, srng, tfn);
    }
    std::copy(traj.v.begin(), traj.v.end(), data.begin() + std::size_t(m) * horizon * D);
  };

  unsigned hw = std::thread::hardware_concurrency();
  int n_threads = std::min(M, int(hw ? hw : 1));
  if (n_threads <= 1) {
    for (int m = 0; m < M; ++m) run_member(m);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errs(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (int m = t; m < M; m += n_threads) run_member(m);
        } catch (...) {
          errs[std::size_t(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errs)
      if (e) std::rethrow_exception(e);
  }

  ArrayHeader h;
  h.shape = {M, horizon, D};
  h.channels = tf.header.channels;
  h.norm_mean = tf.header.norm_mean;
  h.norm_std = tf.header.norm_std;
  h.config_hash = config_hash(cfg);
  h.meta_json = std::string("{\"kind\":\"forecast\",\"model\":\"") +
                (one_step ? "one-step" : "rolling") + "\",\"model_hash\":\"" + ck.config_hash +
                "\"}";
  ForecastPaths paths{out_dir + "/forecast.bin"};
  write_array(paths.forecast, h, data);
  if (trace) write_text_atomic(out_dir + "/trace.csv", trace_text);
  save_config(cfg, out_dir + "/config.json");
  return paths;
}

ForecastScores score_forecast(const Mat& truth, const ArrayFile& forecast) {
  const auto& shape = forecast.header.shape;
  if (shape.size() != 3)
    throw std::runtime_error("evaluate: forecast must be a 3-d array (members x leads x channels)");
  const int M = shape[0], H = shape[1], D = shape[2];
  if (M < 2) throw std::runtime_error("evaluate: need at least two ensemble members");
  if (truth.cols != D) throw std::runtime_error("evaluate: channel count mismatch with truth");
  if (truth.rows < H + 1)
    throw std::runtime_error("evaluate: truth has fewer snapshots than the forecast horizon");

  ForecastScores sc;
  SsrAccumulator all, second;
  Mat ens(M, D);
  for (int k = 1; k <= H; ++k) {
    for (int m = 0; m < M; ++m) {
      const double* src = forecast.data.data() + (std::size_t(m) * H + (k - 1)) * D;
      std::copy(src, src + D, ens.row(m));
    }
    Vec obs(truth.row(k), truth.row(k) + D);
    EnsembleStats es = ensemble_stats(ens, obs);
    sc.crps.push_back(crps_field(ens, obs));
    sc.rmse.push_back(es.rmse);
    sc.spread.push_back(es.spread);
    sc.ssr.push_back(es.ssr);
    all.add(ens, obs);
    if (k > H / 2) second.add(ens, obs);
  }
  double sum_all = 0.0, sum_second = 0.0;
  for (int k = 1; k <= H; ++k) {
    sum_all += sc.crps[std::size_t(k - 1)];
    if (k > H / 2) sum_second += sc.crps[std::size_t(k - 1)];
  }
  sc.crps_all = sum_all / H;
  sc.crps_second_half = (H - H / 2) > 0 ? sum_second / (H - H / 2) : 0.0;
  sc.ssr_all = all.ssr();
  sc.ssr_second_half = second.ssr();
  return sc;
}

EvaluatePaths run_evaluate(const RunConfig& cfg, const std::string& out_dir,
                           const std::vector<std::string>& forecasts,
                           const std::string& truth_path) {
  cfg.validate();
  if (forecasts.empty()) throw std::invalid_argument("evaluate: no forecast files given");
  ensure_dir(out_dir);
  Mat truth = to_mat(read_array(truth_path), "truth");

  EvaluatePaths paths;
  std::vector<ForecastScores> scores;
  for (std::size_t i = 0; i < forecasts.size(); ++i) {
    ForecastScores sc = score_forecast(truth, read_array(forecasts[i]));
    std::string csv = "lead,crps,rmse,spread,ssr\n";
    for (std::size_t k = 0; k < sc.crps.size(); ++k)
      csv += std::to_string(k + 1) + "," + num(sc.crps[k]) + "," + num(sc.rmse[k]) + "," +
             num(sc.spread[k]) + "," + num(sc.ssr[k]) + "\n";
    std::string stem = fs::path(forecasts[i]).stem().string();
    std::string out = out_dir + "/metrics_" + std::to_string(i) + "_" + stem + ".csv";
    write_text_atomic(out, csv);
    paths.per_forecast.push_back(out);
    scores.push_back(std::move(sc));
  }

  std::string summary =
      "file,crps_all,crps_second_half,ssr_all,ssr_second_half,"
      "crpss_vs_first_all,crpss_vs_first_second_half\n";
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const auto& sc = scores[i];
    summary += fs::path(forecasts[i]).filename().string() + "," + num(sc.crps_all) + "," +
               num(sc.crps_second_half) + "," + num(sc.ssr_all) + "," +
               num(sc.ssr_second_half) + "," +
               num(skill_score(sc.crps_all, scores[0].crps_all)) + "," +
               num(skill_score(sc.crps_second_half, scores[0].crps_second_half)) + "\n";
  }
  paths.summary = out_dir + "/summary.csv";
  write_text_atomic(paths.summary, summary);
  save_config(cfg, out_dir + "/config.json");
  return paths;
}

std::string run_schedule_dump(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  ensure_dir(out_dir);
  std::string csv = "snapshot,t,sigma\n";
  const int steps = 100;
  for (int w = 1; w <= cfg.schedule.window; ++w)
    for (int i = 0; i <= steps; ++i) {
      double t = double(i) / steps;
      csv += std::to_string(w) + "," + num(t) + "," + num(cfg.schedule.sigma_bar(w, t)) + "\n";
    }
  std::string path = out_dir + "/schedule.csv";
  write_text_atomic(path, csv);
  return path;
}

}  // namespace rollcast
