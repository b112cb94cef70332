#include "rollcast/config_io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <stdexcept>

#include "json.hpp"

namespace rollcast {

using nlohmann::json;

void InitConfig::validate() const {
  if (kind != "external_forecaster" && kind != "persistence" && kind != "truth")
    throw std::invalid_argument(
        "init.kind must be external_forecaster, persistence, or truth");
}

void DataConfig::validate() const {
  if (n_train < 2) throw std::invalid_argument("data.n_train must be >= 2");
  if (n_test < 2) throw std::invalid_argument("data.n_test must be >= 2");
}

void ModelConfig::validate() const {
  if (hidden.empty()) throw std::invalid_argument("model.hidden must be non-empty");
  for (int h : hidden)
    if (h < 1) throw std::invalid_argument("model.hidden entries must be >= 1");
}

void TrainingConfig::validate() const {
  if (steps < 1) throw std::invalid_argument("training.steps must be >= 1");
  if (batch < 1) throw std::invalid_argument("training.batch must be >= 1");
  if (!(lr > 0)) throw std::invalid_argument("training.lr must be > 0");
  if (warmup < 0) throw std::invalid_argument("training.warmup must be >= 0");
  if (weight_decay < 0) throw std::invalid_argument("training.weight_decay must be >= 0");
  if (!(ema_decay >= 0 && ema_decay < 1))
    throw std::invalid_argument("training.ema_decay must be in [0, 1)");
  if (!(grad_clip > 0)) throw std::invalid_argument("training.grad_clip must be > 0");
  if (checkpoint_every < 1)
    throw std::invalid_argument("training.checkpoint_every must be >= 1");
}

void BaselineConfig::validate() const {
  if (!(sigma_min > 0)) throw std::invalid_argument("baseline.sigma_min must be > 0");
  if (!(sigma_max > sigma_min))
    throw std::invalid_argument("baseline.sigma_max must be > baseline.sigma_min");
  if (rho == 0) throw std::invalid_argument("baseline.rho must be nonzero");
  if (!(p_std > 0)) throw std::invalid_argument("baseline.p_std must be > 0");
  if (sample_steps < 1) throw std::invalid_argument("baseline.sample_steps must be >= 1");
}

void RunConfig::validate() const {
  schedule.validate();
  weighting.validate();
  sampler.validate();
  init.validate();
  system.validate();
  data.validate();
  model.validate();
  training.validate();
  baseline.validate();
  if (train_target != "erdm" && train_target != "edm-baseline")
    throw std::invalid_argument("train_target must be erdm or edm-baseline");
  if (members < 2) throw std::invalid_argument("members must be >= 2");
}

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("config: " + msg);
}

void expect_keys(const json& j, const std::string& where,
                 std::initializer_list<const char*> keys) {
  if (!j.is_object()) fail("section '" + where + "' must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) fail("unknown key '" + it.key() + "' in " + where);
  }
  for (const char* k : keys)
    if (!j.contains(k)) fail("missing key '" + std::string(k) + "' in " + where);
}

template <typename T>
T get(const json& j, const std::string& where, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    fail("key '" + std::string(key) + "' in " + where + " has the wrong type");
  }
}

json schedule_to_json(const NoiseSchedule& s) {
  return {{"sigma_min", s.sigma_min},
          {"sigma_max", s.sigma_max},
          {"rho", s.rho},
          {"window", s.window}};
}

NoiseSchedule schedule_from_json(const json& j) {
  expect_keys(j, "schedule", {"sigma_min", "sigma_max", "rho", "window"});
  NoiseSchedule s;
  s.sigma_min = get<double>(j, "schedule", "sigma_min");
  s.sigma_max = get<double>(j, "schedule", "sigma_max");
  s.rho = get<double>(j, "schedule", "rho");
  s.window = get<int>(j, "schedule", "window");
  return s;
}

json weighting_to_json(const LossWeighting& w) {
  return {{"p_mean", w.p_mean}, {"p_std", w.p_std}, {"sigma_data", w.sigma_data}};
}

LossWeighting weighting_from_json(const json& j) {
  expect_keys(j, "weighting", {"p_mean", "p_std", "sigma_data"});
  LossWeighting w;
  w.p_mean = get<double>(j, "weighting", "p_mean");
  w.p_std = get<double>(j, "weighting", "p_std");
  w.sigma_data = get<double>(j, "weighting", "sigma_data");
  return w;
}

json sampler_to_json(const SamplerConfig& s) {
  return {{"steps_per_snapshot", s.steps_per_snapshot},
          {"order", s.order == SolverOrder::heun ? "heun" : "euler"},
          {"s_churn", s.s_churn},
          {"s_noise", s.s_noise},
          {"alpha", s.alpha},
          {"divergence_bound", s.divergence_bound}};
}

SamplerConfig sampler_from_json(const json& j) {
  expect_keys(j, "sampler", {"steps_per_snapshot", "order", "s_churn", "s_noise", "alpha",
                             "divergence_bound"});
  SamplerConfig s;
  s.steps_per_snapshot = get<double>(j, "sampler", "steps_per_snapshot");
  const std::string ord = get<std::string>(j, "sampler", "order");
  if (ord == "heun")
    s.order = SolverOrder::heun;
  else if (ord == "euler")
    s.order = SolverOrder::euler;
  else
    fail("sampler.order must be euler or heun");
  s.s_churn = get<double>(j, "sampler", "s_churn");
  s.s_noise = get<double>(j, "sampler", "s_noise");
  s.alpha = get<double>(j, "sampler", "alpha");
  s.divergence_bound = get<double>(j, "sampler", "divergence_bound");
  return s;
}

json init_to_json(const InitConfig& i) {
  return {{"kind", i.kind}, {"forecaster_checkpoint", i.forecaster_checkpoint}};
}

InitConfig init_from_json(const json& j) {
  expect_keys(j, "init", {"kind", "forecaster_checkpoint"});
  InitConfig i;
  i.kind = get<std::string>(j, "init", "kind");
  i.forecaster_checkpoint = get<std::string>(j, "init", "forecaster_checkpoint");
  return i;
}

json system_to_json(const SystemSpec& s) {
  const char* kind = s.kind == SystemKind::lorenz63  ? "lorenz63"
                     : s.kind == SystemKind::lorenz96 ? "lorenz96"
                                                      : "ou";
  return {{"kind", kind},        {"dim", s.dim},
          {"dt", s.dt},          {"stride", s.stride},
          {"burn_in", s.burn_in}, {"forcing", s.forcing},
          {"theta", s.theta},    {"ou_noise", s.ou_noise}};
}

SystemSpec system_from_json(const json& j) {
  expect_keys(j, "system",
              {"kind", "dim", "dt", "stride", "burn_in", "forcing", "theta", "ou_noise"});
  SystemSpec s;
  const std::string kind = get<std::string>(j, "system", "kind");
  if (kind == "lorenz63")
    s.kind = SystemKind::lorenz63;
  else if (kind == "lorenz96")
    s.kind = SystemKind::lorenz96;
  else if (kind == "ou")
    s.kind = SystemKind::ou;
  else
    fail("system.kind must be lorenz63, lorenz96, or ou");
  s.dim = get<int>(j, "system", "dim");
  s.dt = get<double>(j, "system", "dt");
  s.stride = get<int>(j, "system", "stride");
  s.burn_in = get<int>(j, "system", "burn_in");
  s.forcing = get<double>(j, "system", "forcing");
  s.theta = get<double>(j, "system", "theta");
  s.ou_noise = get<double>(j, "system", "ou_noise");
  return s;
}

json data_to_json(const DataConfig& d) {
  return {{"n_train", d.n_train}, {"n_test", d.n_test}, {"standardize", d.standardize}};
}

DataConfig data_from_json(const json& j) {
  expect_keys(j, "data", {"n_train", "n_test", "standardize"});
  DataConfig d;
  d.n_train = get<int>(j, "data", "n_train");
  d.n_test = get<int>(j, "data", "n_test");
  d.standardize = get<bool>(j, "data", "standardize");
  return d;
}

json model_to_json(const ModelConfig& m) { return {{"hidden", m.hidden}}; }

ModelConfig model_from_json(const json& j) {
  expect_keys(j, "model", {"hidden"});
  ModelConfig m;
  m.hidden = get<std::vector<int>>(j, "model", "hidden");
  return m;
}

json training_to_json(const TrainingConfig& t) {
  return {{"steps", t.steps},
          {"batch", t.batch},
          {"lr", t.lr},
          {"warmup", t.warmup},
          {"weight_decay", t.weight_decay},
          {"ema_decay", t.ema_decay},
          {"grad_clip", t.grad_clip},
          {"checkpoint_every", t.checkpoint_every},
          {"weight_by_f", t.weight_by_f},
          {"randomize_schedule", t.randomize_schedule}};
}

TrainingConfig training_from_json(const json& j) {
  expect_keys(j, "training",
              {"steps", "batch", "lr", "warmup", "weight_decay", "ema_decay", "grad_clip",
               "checkpoint_every", "weight_by_f", "randomize_schedule"});
  TrainingConfig t;
  t.steps = get<int>(j, "training", "steps");
  t.batch = get<int>(j, "training", "batch");
  t.lr = get<double>(j, "training", "lr");
  t.warmup = get<int>(j, "training", "warmup");
  t.weight_decay = get<double>(j, "training", "weight_decay");
  t.ema_decay = get<double>(j, "training", "ema_decay");
  t.grad_clip = get<double>(j, "training", "grad_clip");
  t.checkpoint_every = get<int>(j, "training", "checkpoint_every");
  t.weight_by_f = get<bool>(j, "training", "weight_by_f");
  t.randomize_schedule = get<bool>(j, "training", "randomize_schedule");
  return t;
}

json baseline_to_json(const BaselineConfig& b) {
  return {{"sigma_min", b.sigma_min}, {"sigma_max", b.sigma_max},
          {"rho", b.rho},             {"p_mean", b.p_mean},
          {"p_std", b.p_std},         {"sample_steps", b.sample_steps}};
}

BaselineConfig baseline_from_json(const json& j) {
  expect_keys(j, "baseline",
              {"sigma_min", "sigma_max", "rho", "p_mean", "p_std", "sample_steps"});
  BaselineConfig b;
  b.sigma_min = get<double>(j, "baseline", "sigma_min");
  b.sigma_max = get<double>(j, "baseline", "sigma_max");
  b.rho = get<double>(j, "baseline", "rho");
  b.p_mean = get<double>(j, "baseline", "p_mean");
  b.p_std = get<double>(j, "baseline", "p_std");
  b.sample_steps = get<int>(j, "baseline", "sample_steps");
  return b;
}

json config_to_json(const RunConfig& c) {
  return {{"schedule", schedule_to_json(c.schedule)},
          {"weighting", weighting_to_json(c.weighting)},
          {"sampler", sampler_to_json(c.sampler)},
          {"init", init_to_json(c.init)},
          {"system", system_to_json(c.system)},
          {"data", data_to_json(c.data)},
          {"model", model_to_json(c.model)},
          {"training", training_to_json(c.training)},
          {"baseline", baseline_to_json(c.baseline)},
          {"train_target", c.train_target},
          {"members", c.members},
          {"seed", c.seed}};
}

RunConfig config_from_json(const json& j) {
  expect_keys(j, "config root",
              {"schedule", "weighting", "sampler", "init", "system", "data", "model",
               "training", "baseline", "train_target", "members", "seed"});
  RunConfig c;
  c.schedule = schedule_from_json(j.at("schedule"));
  c.weighting = weighting_from_json(j.at("weighting"));
  c.sampler = sampler_from_json(j.at("sampler"));
  c.init = init_from_json(j.at("init"));
  c.system = system_from_json(j.at("system"));
  c.data = data_from_json(j.at("data"));
  c.model = model_from_json(j.at("model"));
  c.training = training_from_json(j.at("training"));
  c.baseline = baseline_from_json(j.at("baseline"));
  c.train_target = get<std::string>(j, "config root", "train_target");
  c.members = get<int>(j, "config root", "members");
  c.seed = get<std::uint64_t>(j, "config root", "seed");
  c.validate();
  return c;
}

void atomic_write(const std::string& path, const std::string& bytes) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("io: cannot open '" + tmp + "' for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw std::runtime_error("io: short write to '" + tmp + "'");
  }
  fs::rename(tmp, p);
}

}  // namespace

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("config: cannot open '" + path + "'");
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("config: '" + path + "' is not valid JSON");
  return config_from_json(j);
}

void save_config(const RunConfig& cfg, const std::string& path) {
  atomic_write(path, config_to_json(cfg).dump(2) + "\n");
}

std::string config_to_string(const RunConfig& cfg) { return config_to_json(cfg).dump(); }

RunConfig config_from_string(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw std::invalid_argument("config: text is not valid JSON");
  return config_from_json(j);
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
  json j = config_to_json(cfg);
  json* node = &j;
  std::size_t pos = 0;
  while (true) {
    const std::size_t dot = key.find('.', pos);
    const std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
    if (!node->is_object() || !node->contains(part))
      fail("no such field '" + key + "'");
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    pos = dot + 1;
  }
  json parsed = json::parse(value, nullptr, false);
  *node = parsed.is_discarded() ? json(value) : parsed;
  cfg = config_from_json(j);
}

std::string config_hash(const RunConfig& cfg) {
  const std::string s = config_to_string(cfg);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

namespace {

[[noreturn]] void bad_array(const std::string& msg) {
  throw std::runtime_error("array: " + msg);
}

std::size_t shape_product(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int s : shape) {
    if (s < 0) bad_array("negative shape entry");
    if (s != 0 && n > (static_cast<std::size_t>(1) << 30) / s) bad_array("shape too large");
    n *= static_cast<std::size_t>(s);
  }
  return n;
}

constexpr std::uint32_t kMaxHeaderBytes = 1u << 24;

}  // namespace

void write_array(const std::string& path, const ArrayHeader& header, const Vec& data) {
  if (shape_product(header.shape) != data.size())
    bad_array("data size does not match shape");
  json meta = json::parse(header.meta_json, nullptr, false);
  if (meta.is_discarded()) bad_array("meta_json is not valid JSON");
  const json h = {{"magic", "RCAST"},
                  {"version", header.version},
                  {"dtype", "f32"},
                  {"shape", header.shape},
                  {"channels", header.channels},
                  {"norm_mean", header.norm_mean},
                  {"norm_std", header.norm_std},
                  {"config_hash", header.config_hash},
                  {"meta", meta}};
  const std::string htext = h.dump();
  if (htext.size() > kMaxHeaderBytes) bad_array("header too large");
  std::string bytes;
  bytes.reserve(4 + htext.size() + 4 * data.size());
  const std::uint32_t len = static_cast<std::uint32_t>(htext.size());
  for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((len >> (8 * i)) & 0xff));
  bytes += htext;
  for (double v : data) {
    const float fv = static_cast<float>(v);
    char raw[4];
    std::memcpy(raw, &fv, 4);
    bytes.append(raw, 4);
  }
  atomic_write(path, bytes);
}

ArrayFile read_array(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) bad_array("cannot open '" + path + "'");
  char lenraw[4];
  if (!f.read(lenraw, 4)) bad_array("file shorter than the length prefix");
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i)
    len |= static_cast<std::uint32_t>(static_cast<unsigned char>(lenraw[i])) << (8 * i);
  if (len == 0 || len > kMaxHeaderBytes) bad_array("implausible header length");
  std::string htext(len, '\0');
  if (!f.read(htext.data(), len)) bad_array("truncated header");
  const json h = json::parse(htext, nullptr, false);
  if (h.is_discarded() || !h.is_object()) bad_array("header is not a JSON object");

  ArrayFile out;
  try {
    if (h.at("magic").get<std::string>() != "RCAST") bad_array("bad magic");
    out.header.version = h.at("version").get<int>();
    if (out.header.version != 1) bad_array("unsupported version");
    if (h.at("dtype").get<std::string>() != "f32") bad_array("unsupported dtype");
    out.header.shape = h.at("shape").get<std::vector<int>>();
    out.header.channels = h.at("channels").get<std::vector<std::string>>();
    out.header.norm_mean = h.at("norm_mean").get<Vec>();
    out.header.norm_std = h.at("norm_std").get<Vec>();
    out.header.config_hash = h.at("config_hash").get<std::string>();
    out.header.meta_json = h.at("meta").dump();
  } catch (const json::exception& e) {
    bad_array(std::string("malformed header: ") + e.what());
  }

  const std::size_t n = shape_product(out.header.shape);
  std::string payload(4 * n, '\0');
  if (!f.read(payload.data(), static_cast<std::streamsize>(payload.size())))
    bad_array("payload shorter than the shape requires");
  f.peek();
  if (!f.eof()) bad_array("trailing bytes after the payload");
  out.data.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    float fv;
    std::memcpy(&fv, payload.data() + 4 * i, 4);
    out.data[i] = static_cast<double>(fv);
  }
  return out;
}

void save_checkpoint(const std::string& path, const MlpDenoiser& den, const Vec& params,
                     const NoiseSchedule& sched, const LossWeighting& weight,
                     const std::string& cfg_hash) {
  if (params.size() != den.net().param_count())
    bad_array("checkpoint: parameter count does not match the network");
  const json meta = {{"kind", "checkpoint"},
                     {"net",
                      {{"window", den.window()},
                       {"dim", den.dim()},
                       {"cond_dim", den.cond_dim()},
                       {"hidden", den.net().shape().hidden},
                       {"sigma_data", den.preconditioner().sigma_data}}},
                     {"schedule", schedule_to_json(sched)},
                     {"weighting", weighting_to_json(weight)}};
  ArrayHeader h;
  h.shape = {static_cast<int>(params.size())};
  h.config_hash = cfg_hash;
  h.meta_json = meta.dump();
  write_array(path, h, params);
}

Checkpoint load_checkpoint(const std::string& path) {
  ArrayFile file = read_array(path);
  const json meta = json::parse(file.header.meta_json, nullptr, false);
  if (meta.is_discarded() || !meta.is_object()) bad_array("checkpoint meta is not JSON");
  Checkpoint ck;
  try {
    if (meta.at("kind").get<std::string>() != "checkpoint")
      bad_array("not a checkpoint file");
    const json& net = meta.at("net");
    ck.den = MlpDenoiser(net.at("window").get<int>(), net.at("dim").get<int>(),
                         net.at("cond_dim").get<int>(),
                         net.at("hidden").get<std::vector<int>>(),
                         net.at("sigma_data").get<double>());
    ck.schedule = schedule_from_json(meta.at("schedule"));
    ck.weighting = weighting_from_json(meta.at("weighting"));
  } catch (const json::exception& e) {
    bad_array(std::string("malformed checkpoint meta: ") + e.what());
  }
  ck.config_hash = file.header.config_hash;
  if (file.data.size() != ck.den.net().param_count())
    bad_array("checkpoint payload does not match the network shape");
  ck.den.net().set_flat_params(file.data);
  return ck;
}

}  // namespace rollcast
