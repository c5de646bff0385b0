#include "feel/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "feel/errors.hpp"

namespace feel::config {
namespace {

using nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "workers", "rounds", "seed", "trials", "output_dir",
      "select_fraction", "threshold", "epochs", "batch_size", "learning_rate",
      "bandwidth_hz", "noise_power", "cycles_per_sample", "bandwidth_mode", "strategy",
      "deadline_s", "deadline_slack", "antennas", "rician_k_db", "pathloss_exponent",
      "channel_mode", "p_min_dbm", "p_max_dbm", "f_min_hz", "f_max_hz", "capacitance",
      "energy_budget_j", "distance_min_m", "distance_max_m", "partition", "classes_per_worker",
      "test_fraction", "hidden_widths", "data_source", "synthetic_dim", "synthetic_classes",
      "synthetic_samples", "synthetic_spread", "mnist_images", "mnist_labels", "mnist_subset",
      "threads", "golden_tol", "golden_max_iter", "check_unimodality"};
  return keys;
}

constexpr const char* kRequired[] = {"workers", "rounds", "data_source"};

template <typename T>
T field(const json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end()) {
    return fallback;
  }
  try {
    if constexpr (std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
      if (!it->is_number_unsigned()) {
        throw ConfigError(std::string("field '") + key + "': expected a non-negative integer");
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!it->is_number()) {
        throw ConfigError(std::string("field '") + key + "': expected a number");
      }
    }
    return it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("field '") + key + "': " + e.what());
  }
}

template <typename E>
E enum_field(const json& j, const char* key, E fallback, std::initializer_list<std::pair<const char*, E>> names) {
  const auto it = j.find(key);
  if (it == j.end()) {
    return fallback;
  }
  if (!it->is_string()) {
    throw ConfigError(std::string("field '") + key + "': expected a string");
  }
  const auto value = it->get<std::string>();
  std::string allowed;
  for (const auto& [name, e] : names) {
    if (value == name) return e;
    allowed += (allowed.empty() ? "" : ", ") + std::string(name);
  }
  throw ConfigError(std::string("field '") + key + "': unknown value '" + value + "' (expected one of " + allowed + ")");
}

template <typename E>
std::string enum_name(E value, std::initializer_list<std::pair<const char*, E>> names) {
  for (const auto& [name, e] : names) {
    if (e == value) return name;
  }
  return "?";
}

const std::initializer_list<std::pair<const char*, BandwidthMode>> kBandwidthModes = {
    {"equal_split", BandwidthMode::kEqualSplit}, {"min_bandwidth_split", BandwidthMode::kMinBandwidthSplit}};
const std::initializer_list<std::pair<const char*, Strategy>> kStrategies = {{"optimized", Strategy::kOptimized},
                                                                           {"naive", Strategy::kNaive}};
const std::initializer_list<std::pair<const char*, ChannelMode>> kChannelModes = {
    {"block_fading", ChannelMode::kBlockFading}, {"static", ChannelMode::kStatic}};
const std::initializer_list<std::pair<const char*, PartitionScheme>> kPartitions = {
    {"iid", PartitionScheme::kIid}, {"noniid", PartitionScheme::kNonIid}};
const std::initializer_list<std::pair<const char*, DataSourceKind>> kSources = {
    {"synthetic", DataSourceKind::kSynthetic}, {"mnist", DataSourceKind::kMnist}};

void require(bool ok, const std::string& constraint) {
  if (!ok) {
    throw ConfigError("validation failed: " + constraint);
  }
}

std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

void validate(const ExperimentConfig& c) {
  const auto& r = c.round;
  const auto& p = c.population;
  const auto& b = p.bounds;
  require(p.workers >= 1, "workers >= 1");
  require(c.rounds >= 1, "rounds >= 1");
  require(c.trials >= 1, "trials >= 1");
  require(r.select_fraction > 0.0 && r.select_fraction <= 1.0, "0 < select_fraction <= 1");
  require(r.threshold >= 0.0 && r.threshold <= 1.0, "0 <= threshold <= 1");
  require(r.epochs >= 1, "epochs >= 1");
  require(r.batch_size >= 1, "batch_size >= 1");
  require(r.learning_rate > 0.0, "learning_rate > 0");
  require(r.bandwidth_hz > 0.0, "bandwidth_hz > 0");
  require(r.noise_power > 0.0, "noise_power > 0");
  require(r.cycles_per_sample > 0.0, "cycles_per_sample > 0");
  require(r.deadline_s >= 0.0, "deadline_s >= 0 (0 selects the automatic deadline)");
  require(r.deadline_slack > 1.0, "deadline_slack > 1");
  require(r.channel.antennas >= 1, "antennas >= 1");
  require(r.channel.pathloss_exponent > 0.0, "pathloss_exponent > 0");
  require(!std::isnan(r.channel.rician_k_db), "rician_k_db is a number");
  require(r.optimizer.relative_tol > 0.0, "golden_tol > 0");
  require(r.optimizer.max_iter >= 1, "golden_max_iter >= 1");
  require(r.threads >= 1, "threads >= 1");
  require(b.f_min > 0.0 && b.f_min <= b.f_max, "0 < f_min_hz <= f_max_hz");
  require(b.p_min > 0.0 && b.p_min <= b.p_max, "p_min_dbm <= p_max_dbm");
  require(b.capacitance_alpha > 0.0, "capacitance > 0");
  require(b.energy_budget > 0.0, "energy_budget_j > 0");
  require(p.distance_min_m > 0.0 && p.distance_min_m <= p.distance_max_m, "0 < distance_min_m <= distance_max_m");
  require(p.test_fraction > 0.0 && p.test_fraction < 1.0, "0 < test_fraction < 1");
  require(p.classes_per_worker >= 1, "classes_per_worker >= 1");
  for (const auto w : p.hidden) {
    require(w >= 1, "hidden_widths entries >= 1");
  }
  if (c.data.kind == DataSourceKind::kSynthetic) {
    require(c.data.synthetic_classes >= 2, "synthetic_classes >= 2");
    require(c.data.synthetic_dim >= 1, "synthetic_dim >= 1");
    require(c.data.synthetic_classes <= 2 * c.data.synthetic_dim, "synthetic_classes <= 2 * synthetic_dim");
    require(c.data.synthetic_samples >= c.data.synthetic_classes, "synthetic_samples >= synthetic_classes");
    require(c.data.synthetic_spread >= 0.0, "synthetic_spread >= 0");
  } else {
    require(!c.data.mnist_images.empty(), "mnist_images is set");
    require(!c.data.mnist_labels.empty(), "mnist_labels is set");
    require(c.data.mnist_subset >= 1, "mnist_subset >= 1");
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("parse error at " + line_column(text, e.byte) + ": " + e.what());
  }
  if (!j.is_object()) {
    throw ConfigError("config must be a JSON object");
  }
  for (const auto& [key, value] : j.items()) {
    if (!known_keys().contains(key)) {
      throw ConfigError("unknown field '" + key + "'");
    }
  }
  for (const char* key : kRequired) {
    if (!j.contains(key)) {
      throw ConfigError(std::string("missing required field '") + key + "'");
    }
  }

  ExperimentConfig c = mnist_defaults();
  auto& r = c.round;
  auto& p = c.population;
  c.population.workers = field<std::size_t>(j, "workers", p.workers);
  c.rounds = field<std::uint32_t>(j, "rounds", c.rounds);
  c.seed = field<std::uint64_t>(j, "seed", c.seed);
  c.trials = field<std::uint32_t>(j, "trials", c.trials);
  c.output_dir = field<std::string>(j, "output_dir", c.output_dir);

  r.select_fraction = field<double>(j, "select_fraction", r.select_fraction);
  r.threshold = field<double>(j, "threshold", r.threshold);
  r.epochs = field<std::uint32_t>(j, "epochs", r.epochs);
  r.batch_size = field<std::size_t>(j, "batch_size", r.batch_size);
  r.learning_rate = field<double>(j, "learning_rate", r.learning_rate);
  r.bandwidth_hz = field<double>(j, "bandwidth_hz", r.bandwidth_hz);
  r.noise_power = field<double>(j, "noise_power", r.noise_power);
  r.cycles_per_sample = field<double>(j, "cycles_per_sample", r.cycles_per_sample);
  r.bandwidth_mode = enum_field(j, "bandwidth_mode", r.bandwidth_mode, kBandwidthModes);
  r.strategy = enum_field(j, "strategy", r.strategy, kStrategies);
  r.deadline_s = field<double>(j, "deadline_s", r.deadline_s);
  r.deadline_slack = field<double>(j, "deadline_slack", r.deadline_slack);
  r.channel.antennas = field<int>(j, "antennas", r.channel.antennas);
  r.channel.rician_k_db = field<double>(j, "rician_k_db", r.channel.rician_k_db);
  r.channel.pathloss_exponent = field<double>(j, "pathloss_exponent", r.channel.pathloss_exponent);
  r.channel_mode = enum_field(j, "channel_mode", r.channel_mode, kChannelModes);
  r.threads = field<unsigned>(j, "threads", r.threads);
  r.optimizer.relative_tol = field<double>(j, "golden_tol", r.optimizer.relative_tol);
  r.optimizer.max_iter = field<std::size_t>(j, "golden_max_iter", r.optimizer.max_iter);
  r.optimizer.check_unimodality = field<bool>(j, "check_unimodality", r.optimizer.check_unimodality);

  c.p_min_dbm = field<double>(j, "p_min_dbm", c.p_min_dbm);
  c.p_max_dbm = field<double>(j, "p_max_dbm", c.p_max_dbm);
  p.bounds.p_min = dbm_to_watts(c.p_min_dbm);
  p.bounds.p_max = dbm_to_watts(c.p_max_dbm);
  p.bounds.f_min = field<double>(j, "f_min_hz", p.bounds.f_min);
  p.bounds.f_max = field<double>(j, "f_max_hz", p.bounds.f_max);
  p.bounds.capacitance_alpha = field<double>(j, "capacitance", p.bounds.capacitance_alpha);
  p.bounds.energy_budget = field<double>(j, "energy_budget_j", p.bounds.energy_budget);
  p.distance_min_m = field<double>(j, "distance_min_m", p.distance_min_m);
  p.distance_max_m = field<double>(j, "distance_max_m", p.distance_max_m);
  p.partition = enum_field(j, "partition", p.partition, kPartitions);
  p.classes_per_worker = field<std::size_t>(j, "classes_per_worker", p.classes_per_worker);
  p.test_fraction = field<double>(j, "test_fraction", p.test_fraction);
  p.hidden = field<std::vector<std::size_t>>(j, "hidden_widths", p.hidden);

  c.data.kind = enum_field(j, "data_source", c.data.kind, kSources);
  c.data.synthetic_dim = field<std::size_t>(j, "synthetic_dim", c.data.synthetic_dim);
  c.data.synthetic_classes = field<std::size_t>(j, "synthetic_classes", c.data.synthetic_classes);
  c.data.synthetic_samples = field<std::size_t>(j, "synthetic_samples", c.data.synthetic_samples);
  c.data.synthetic_spread = field<double>(j, "synthetic_spread", c.data.synthetic_spread);
  c.data.mnist_images = field<std::string>(j, "mnist_images", c.data.mnist_images);
  c.data.mnist_labels = field<std::string>(j, "mnist_labels", c.data.mnist_labels);
  c.data.mnist_subset = field<std::size_t>(j, "mnist_subset", c.data.mnist_subset);

  validate(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file " + path.string());
  }
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

nlohmann::json to_json(const ExperimentConfig& c) {
  const auto& r = c.round;
  const auto& p = c.population;
  json j;
  j["workers"] = p.workers;
  j["rounds"] = c.rounds;
  j["seed"] = c.seed;
  j["trials"] = c.trials;
  j["output_dir"] = c.output_dir;
  j["select_fraction"] = r.select_fraction;
  j["threshold"] = r.threshold;
  j["epochs"] = r.epochs;
  j["batch_size"] = r.batch_size;
  j["learning_rate"] = r.learning_rate;
  j["bandwidth_hz"] = r.bandwidth_hz;
  j["noise_power"] = r.noise_power;
  j["cycles_per_sample"] = r.cycles_per_sample;
  j["bandwidth_mode"] = enum_name(r.bandwidth_mode, kBandwidthModes);
  j["strategy"] = enum_name(r.strategy, kStrategies);
  j["deadline_s"] = r.deadline_s;
  j["deadline_slack"] = r.deadline_slack;
  j["antennas"] = r.channel.antennas;
  j["rician_k_db"] = r.channel.rician_k_db;
  j["pathloss_exponent"] = r.channel.pathloss_exponent;
  j["channel_mode"] = enum_name(r.channel_mode, kChannelModes);
  j["threads"] = r.threads;
  j["golden_tol"] = r.optimizer.relative_tol;
  j["golden_max_iter"] = r.optimizer.max_iter;
  j["check_unimodality"] = r.optimizer.check_unimodality;
  j["p_min_dbm"] = c.p_min_dbm;
  j["p_max_dbm"] = c.p_max_dbm;
  j["f_min_hz"] = p.bounds.f_min;
  j["f_max_hz"] = p.bounds.f_max;
  j["capacitance"] = p.bounds.capacitance_alpha;
  j["energy_budget_j"] = p.bounds.energy_budget;
  j["distance_min_m"] = p.distance_min_m;
  j["distance_max_m"] = p.distance_max_m;
  j["partition"] = enum_name(p.partition, kPartitions);
  j["classes_per_worker"] = p.classes_per_worker;
  j["test_fraction"] = p.test_fraction;
  j["hidden_widths"] = p.hidden;
  j["data_source"] = enum_name(c.data.kind, kSources);
  j["synthetic_dim"] = c.data.synthetic_dim;
  j["synthetic_classes"] = c.data.synthetic_classes;
  j["synthetic_samples"] = c.data.synthetic_samples;
  j["synthetic_spread"] = c.data.synthetic_spread;
  j["mnist_images"] = c.data.mnist_images;
  j["mnist_labels"] = c.data.mnist_labels;
  j["mnist_subset"] = c.data.mnist_subset;
  return j;
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write config file " + path.string());
  }
  out << to_json(config).dump(2) << '\n';
}

ExperimentConfig mnist_defaults() {
  ExperimentConfig c;
  c.round.bandwidth_hz = 10e6;
  c.round.noise_power = 1e-8;
  c.round.cycles_per_sample = 20.0;
  c.round.learning_rate = 0.001;
  c.round.batch_size = 20;
  c.round.epochs = 5;
  c.round.select_fraction = 0.1;
  c.round.threshold = 1.0;
  c.population.bounds.f_min = 1e9;
  c.population.bounds.f_max = 9e9;
  c.population.bounds.capacitance_alpha = 2e-28;
  c.p_min_dbm = -10.0;
  c.p_max_dbm = 20.0;
  c.population.bounds.p_min = dbm_to_watts(c.p_min_dbm);
  c.population.bounds.p_max = dbm_to_watts(c.p_max_dbm);
  c.population.bounds.energy_budget = 1e3;
  c.population.workers = 100;
  c.population.hidden = {32};
  c.data.kind = DataSourceKind::kMnist;
  c.data.mnist_images = "data/train-images-idx3-ubyte";
  c.data.mnist_labels = "data/train-labels-idx1-ubyte";
  c.rounds = 200;
  return c;
}

ExperimentConfig synthetic_preset(double threshold) {
  ExperimentConfig c = mnist_defaults();
  c.data = DataSource{};
  c.data.kind = DataSourceKind::kSynthetic;
  c.data.synthetic_dim = 8;
  c.data.synthetic_classes = 4;
  c.data.synthetic_samples = 4000;
  c.data.synthetic_spread = 0.3;
  c.population.workers = 20;
  c.population.hidden = {16};
  c.population.partition = PartitionScheme::kIid;
  c.round.threshold = threshold;
  c.round.learning_rate = 0.05;
  // Quieter receiver and a per-sample cost that reflects an MLP pass. With
  // the default radio settings upload energy dwarfs computation by four
  // orders of magnitude and the threshold has no visible effect.
  c.round.noise_power = 1e-14;
  c.round.cycles_per_sample = 1e5;
  c.rounds = 100;
  c.output_dir = threshold < 1.0 ? "out/synthetic_filtered" : "out/synthetic_baseline";
  return c;
}

ExperimentConfig synthetic_naive_preset() {
  ExperimentConfig c = synthetic_preset(1.0);
  c.round.strategy = Strategy::kNaive;
  c.output_dir = "out/synthetic_naive";
  return c;
}

}  // namespace feel::config
