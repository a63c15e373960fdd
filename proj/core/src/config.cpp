#include "binlab/config.hpp"

#include <cmath>

#include "binlab/error.hpp"

namespace binlab {

using nlohmann::json;

std::string to_string(Task task) { return task == Task::kMnist ? "mnist" : "charlm"; }

Task parse_task(const std::string& name) {
  if (name == "mnist") return Task::kMnist;
  if (name == "charlm" || name == "char_lm" || name == "lstm") return Task::kCharLm;
  throw ConfigError("unknown task '" + name + "' (expected mnist or charlm)");
}

TrainConfig TrainConfig::defaults(Task task, bool full_size) {
  TrainConfig c;
  c.task = task;
  c.full_size = full_size;
  if (task == Task::kMnist) {
    c.schedule = Schedule::mnist();
    c.batch = 100;
    c.epochs = full_size ? 50 : 10;
    if (full_size) {
      c.hidden = {2048, 2048, 2048};
      c.train_limit = 50000;
    }
  } else {
    c.schedule = Schedule::char_lstm();
    c.batch = 32;
    c.epochs = full_size ? 200 : 3;
    c.grad_clip = 5.0;
    c.cells = full_size ? 512 : 128;
    c.corpus_bytes = full_size ? 0 : 500000;
  }
  return c;
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
  };
  try {
    scheme.validate();
  } catch (const ConfigError& e) {
    fail("scheme", e.what());
  }
  if (epochs < 0) fail("epochs", "must be >= 0");
  if (batch == 0) fail("batch", "must be >= 1");
  if (eval_every < 1) fail("eval_every", "must be >= 1");
  try {
    schedule.validate();
  } catch (const ConfigError& e) {
    fail("schedule", e.what());
  }
  if (grad_clip && !(*grad_clip > 0)) fail("grad_clip", "must be > 0");
  if (weight_clip && !(*weight_clip > 0)) fail("weight_clip", "must be > 0");
  if (!(adam.beta1 > 0 && adam.beta1 < 1)) fail("adam.beta1", "must lie in (0,1)");
  if (!(adam.beta2 > 0 && adam.beta2 < 1)) fail("adam.beta2", "must lie in (0,1)");
  if (!(adam.epsilon > 0)) fail("adam.epsilon", "must be > 0");
  if (overrides.uniform_curvature && !(*overrides.uniform_curvature > 0))
    fail("overrides.uniform_curvature", "must be > 0");
  if (task == Task::kMnist) {
    if (hidden.empty()) fail("hidden", "needs at least one layer");
    for (auto h : hidden)
      if (h == 0) fail("hidden", "layer widths must be positive");
    if (batch_norm && batch < 2) fail("batch", "must be >= 2 with batch norm");
  } else {
    if (cells == 0) fail("cells", "must be >= 1");
    if (time_steps == 0) fail("time_steps", "must be >= 1");
    if (!(init_bound > 0)) fail("init_bound", "must be > 0");
    if (split.train < 0 || split.val < 0 || split.test < 0 ||
        std::fabs(split.train + split.val + split.test - 1.0) > 1e-9)
      fail("split", "fractions must be non-negative and sum to 1");
  }
}

NetworkSpec TrainConfig::network_spec(std::size_t input_dim, std::size_t classes) const {
  if (task == Task::kMnist) return NetworkSpec::mlp(input_dim, hidden, classes, scheme, batch_norm);
  return NetworkSpec::char_lstm(input_dim, cells, scheme);
}

OptimizerOptions TrainConfig::optimizer_options() const {
  OptimizerOptions o;
  o.adam = adam;
  o.grad_clip = grad_clip;
  o.weight_clip = weight_clip;
  return o;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

json schedule_json(const Schedule& s) {
  return {{"kind", to_string(s.kind)},
          {"base_rate", s.base_rate},
          {"decay_factor", s.decay_factor},
          {"milestones", s.milestones},
          {"start_epoch", s.start_epoch}};
}

Schedule schedule_from(const json& j, Schedule s) {
  for (const auto& [key, value] : j.items()) {
    if (key == "kind") s.kind = parse_schedule_kind(value.get<std::string>());
    else if (key == "base_rate") s.base_rate = value.get<double>();
    else if (key == "decay_factor") s.decay_factor = value.get<double>();
    else if (key == "milestones") s.milestones = value.get<std::vector<int>>();
    else if (key == "start_epoch") s.start_epoch = value.get<int>();
    else throw ConfigError("unknown schedule key '" + key + "'");
  }
  return s;
}

}  // namespace

json to_json(const TrainConfig& c) {
  json j;
  j["task"] = to_string(c.task);
  j["scheme"] = c.scheme.name();
  j["epochs"] = c.epochs;
  j["batch"] = c.batch;
  j["schedule"] = schedule_json(c.schedule);
  j["grad_clip"] = optional_json(c.grad_clip);
  j["weight_clip"] = optional_json(c.weight_clip);
  j["seed"] = c.seed;
  j["adam"] = {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"epsilon", c.adam.epsilon}};
  j["hidden"] = c.hidden;
  j["batch_norm"] = c.batch_norm;
  j["train_limit"] = c.train_limit;
  j["val_limit"] = c.val_limit;
  j["test_limit"] = c.test_limit;
  j["mnist_dir"] = c.mnist_dir;
  j["cells"] = c.cells;
  j["time_steps"] = c.time_steps;
  j["corpus_bytes"] = c.corpus_bytes;
  j["split"] = {{"train", c.split.train}, {"val", c.split.val}, {"test", c.split.test}};
  j["init_bound"] = c.init_bound;
  j["corpus_path"] = c.corpus_path;
  j["grad_samples_per_step"] = c.grad_samples_per_step;
  j["eval_every"] = c.eval_every;
  j["record_wall_time"] = c.record_wall_time;
  j["save_checkpoints"] = c.save_checkpoints;
  j["full_size"] = c.full_size;
  j["overrides"] = {{"uniform_curvature", optional_json(c.overrides.uniform_curvature)},
                    {"force_unit_alpha", c.overrides.force_unit_alpha}};
  return j;
}

TrainConfig config_from_json(const json& doc, TrainConfig c) {
  const json& j = doc.contains("config") ? doc.at("config") : doc;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "task") c.task = parse_task(v.get<std::string>());
      else if (key == "scheme") c.scheme = BinarizationScheme::parse(v.get<std::string>());
      else if (key == "epochs") c.epochs = v.get<int>();
      else if (key == "batch") c.batch = v.get<std::size_t>();
      else if (key == "schedule") c.schedule = schedule_from(v, c.schedule);
      else if (key == "grad_clip") c.grad_clip = optional_from(v);
      else if (key == "weight_clip") c.weight_clip = optional_from(v);
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "adam") {
        for (const auto& [k, x] : v.items()) {
          if (k == "beta1") c.adam.beta1 = x.get<double>();
          else if (k == "beta2") c.adam.beta2 = x.get<double>();
          else if (k == "epsilon") c.adam.epsilon = x.get<double>();
          else throw ConfigError("unknown adam key '" + k + "'");
        }
      } else if (key == "hidden") c.hidden = v.get<std::vector<std::size_t>>();
      else if (key == "batch_norm") c.batch_norm = v.get<bool>();
      else if (key == "train_limit") c.train_limit = v.get<std::size_t>();
      else if (key == "val_limit") c.val_limit = v.get<std::size_t>();
      else if (key == "test_limit") c.test_limit = v.get<std::size_t>();
      else if (key == "mnist_dir") c.mnist_dir = v.get<std::string>();
      else if (key == "cells") c.cells = v.get<std::size_t>();
      else if (key == "time_steps") c.time_steps = v.get<std::size_t>();
      else if (key == "corpus_bytes") c.corpus_bytes = v.get<std::size_t>();
      else if (key == "split") {
        for (const auto& [k, x] : v.items()) {
          if (k == "train") c.split.train = x.get<double>();
          else if (k == "val") c.split.val = x.get<double>();
          else if (k == "test") c.split.test = x.get<double>();
          else throw ConfigError("unknown split key '" + k + "'");
        }
      } else if (key == "init_bound") c.init_bound = v.get<double>();
      else if (key == "corpus_path") c.corpus_path = v.get<std::string>();
      else if (key == "grad_samples_per_step") c.grad_samples_per_step = v.get<std::size_t>();
      else if (key == "eval_every") c.eval_every = v.get<int>();
      else if (key == "record_wall_time") c.record_wall_time = v.get<bool>();
      else if (key == "save_checkpoints") c.save_checkpoints = v.get<bool>();
      else if (key == "full_size") c.full_size = v.get<bool>();
      else if (key == "overrides") {
        for (const auto& [k, x] : v.items()) {
          if (k == "uniform_curvature") c.overrides.uniform_curvature = optional_from(x);
          else if (k == "force_unit_alpha") c.overrides.force_unit_alpha = x.get<bool>();
          else throw ConfigError("unknown overrides key '" + k + "'");
        }
      } else {
        throw ConfigError("unknown config key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw ConfigError("config field '" + key + "': " + e.what());
    }
  }
  return c;
}

TrainConfig config_from_json(const json& doc) {
  const json& j = doc.contains("config") ? doc.at("config") : doc;
  Task task = Task::kMnist;
  bool full = false;
  try {
    if (j.contains("task")) task = parse_task(j.at("task").get<std::string>());
    if (j.contains("full_size")) full = j.at("full_size").get<bool>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return config_from_json(j, TrainConfig::defaults(task, full));
}

json to_json(const NetworkSpec& spec) {
  json layers = json::array();
  for (const auto& l : spec.layers) {
    json e{{"kind", to_string(l.kind)}};
    if (l.kind == LayerDesc::Kind::kFc || l.kind == LayerDesc::Kind::kLstm) e["units"] = l.units;
    if (l.kind == LayerDesc::Kind::kFc) e["bias"] = l.bias;
    if (l.kind == LayerDesc::Kind::kActivation) e["activation"] = to_string(l.activation);
    layers.push_back(std::move(e));
  }
  return {{"input_dim", spec.input_dim},
          {"classes", spec.classes},
          {"scheme", spec.scheme.name()},
          {"loss", to_string(spec.loss)},
          {"layers", std::move(layers)}};
}

NetworkSpec network_spec_from_json(const json& j) {
  try {
    NetworkSpec s;
    s.input_dim = j.at("input_dim").get<std::size_t>();
    s.classes = j.at("classes").get<std::size_t>();
    s.scheme = BinarizationScheme::parse(j.at("scheme").get<std::string>());
    s.loss = parse_loss(j.at("loss").get<std::string>());
    for (const auto& e : j.at("layers")) {
      LayerDesc l;
      l.kind = parse_layer_kind(e.at("kind").get<std::string>());
      if (e.contains("units")) l.units = e.at("units").get<std::size_t>();
      if (e.contains("bias")) l.bias = e.at("bias").get<bool>();
      if (l.kind == LayerDesc::Kind::kLstm) l.bias = true;
      if (e.contains("activation")) l.activation = parse_activation(e.at("activation").get<std::string>());
      s.layers.push_back(l);
    }
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("network spec: ") + e.what());
  }
}

}  // namespace binlab
