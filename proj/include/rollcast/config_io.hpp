#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "rollcast/denoiser.hpp"
#include "rollcast/dynamics.hpp"
#include "rollcast/mat.hpp"
#include "rollcast/sampler.hpp"
#include "rollcast/schedule.hpp"
#include "rollcast/weighting.hpp"

namespace rollcast {

struct InitConfig {
  std::string kind = "external_forecaster";  // external_forecaster | persistence | truth
  std::string forecaster_checkpoint;
  void validate() const;
};

struct DataConfig {
  int n_train = 4096;
  int n_test = 512;
  bool standardize = true;
  void validate() const;
};

struct ModelConfig {
  std::vector<int> hidden = {128, 128};
  void validate() const;
};

struct TrainingConfig {
  int steps = 3000;
  int batch = 32;
  double lr = 5e-4;  // peak rate of the warmup + cosine schedule
  int warmup = 100;
  double weight_decay = 1e-4;
  double ema_decay = 0.995;
  double grad_clip = 1.0;
  int checkpoint_every = 1000;
  bool weight_by_f = true;          // ablation: drop the density factor from the loss
  bool randomize_schedule = false;  // ablation only; normal runs keep it off
  void validate() const;
};

// The one-step conditional baseline keeps its own schedule and noise-draw
// parameters; they deliberately differ from the rolling model's defaults.
struct BaselineConfig {
  double sigma_min = 0.002;
  double sigma_max = 80.0;
  double rho = 7.0;
  double p_mean = -1.2;
  double p_std = 1.2;
  int sample_steps = 18;
  void validate() const;
};

struct RunConfig {
  NoiseSchedule schedule;
  LossWeighting weighting;
  SamplerConfig sampler;
  InitConfig init;
  SystemSpec system;
  DataConfig data;
  ModelConfig model;
  TrainingConfig training;
  BaselineConfig baseline;
  std::string train_target = "erdm";  // erdm | edm-baseline
  int members = 50;
  std::uint64_t seed = 1;
  void validate() const;
};

// Strict JSON (de)serialization: every key must be present, unknown keys are
// rejected, and the loaded config is validated field by field.
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& cfg, const std::string& path);
std::string config_to_string(const RunConfig& cfg);  // canonical (sorted keys)
RunConfig config_from_string(const std::string& text);

// Sets one field through its dotted path, e.g. "schedule.rho" = "7".
// The path must name an existing field; the value is parsed as JSON when
// possible and treated as a string otherwise.
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

// FNV-1a 64-bit over the canonical serialization, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);

// Self-describing binary array container: a length-prefixed JSON header
// followed by the payload as little-endian float32, row-major.
struct ArrayHeader {
  int version = 1;
  std::vector<int> shape;
  std::vector<std::string> channels;
  Vec norm_mean, norm_std;
  std::string config_hash;
  std::string meta_json = "{}";
};
struct ArrayFile {
  ArrayHeader header;
  Vec data;
};
// Writes atomically (temp file + rename). data.size() must equal the shape
// product; values are rounded to float32.
void write_array(const std::string& path, const ArrayHeader& header, const Vec& data);
// Never crashes on malformed input: any structural problem throws a
// runtime_error naming the defect.
ArrayFile read_array(const std::string& path);

// Checkpoints reuse the array container: parameters as payload, network and
// schedule description in the header.
void save_checkpoint(const std::string& path, const MlpDenoiser& den, const Vec& params,
                     const NoiseSchedule& sched, const LossWeighting& weight,
                     const std::string& cfg_hash);
struct Checkpoint {
  MlpDenoiser den;  // parameters already loaded
  NoiseSchedule schedule;
  LossWeighting weighting;
  std::string config_hash;
};
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rollcast
