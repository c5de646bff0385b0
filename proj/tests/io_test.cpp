#include <cstdint>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"

#include "feel/config.hpp"
#include "feel/datasets.hpp"
#include "feel/errors.hpp"
#include "feel/experiment.hpp"
#include "feel/metrics.hpp"

using namespace feel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("feel_io_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void put_u32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) b.push_back(static_cast<std::uint8_t>(v >> s));
}

}  // namespace

TEST_CASE("dBm conversion") {
  CHECK(config::dbm_to_watts(20.0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(config::dbm_to_watts(-10.0) == doctest::Approx(1e-4).epsilon(1e-15));
}

TEST_CASE("config errors name the problem") {
  try {
    config::parse_config(R"({"rounds": 3, "data_source": "synthetic"})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("workers") != std::string::npos);
  }
  CHECK_THROWS_AS(config::parse_config(R"({"workers": 4, "rounds": 3, "data_source": "synthetic", "bogus": 1})"),
                  ConfigError);
  CHECK_THROWS_AS(config::parse_config("{\n  \"workers\": 4,\n  oops\n}"), ConfigError);
  const auto c = config::parse_config(R"({"workers": 4, "rounds": 3, "data_source": "synthetic", "p_max_dbm": 20})");
  CHECK(c.population.bounds.p_max == doctest::Approx(0.1));
}

TEST_CASE("bundled configs match the presets") {
  const fs::path dir = fs::path(FEEL_SOURCE_DIR) / "configs";
  const auto check = [&](const char* file, ExperimentConfig preset) {
    auto loaded = config::load_config(dir / file);
    preset.output_dir = loaded.output_dir;
    CHECK(config::to_json(loaded) == config::to_json(preset));
  };
  check("synthetic_filtered.json", config::synthetic_preset(0.8));
  check("synthetic_baseline.json", config::synthetic_preset(1.0));
  check("synthetic_naive.json", config::synthetic_naive_preset());
  check("mnist.json", config::mnist_defaults());
}

TEST_CASE("synthetic data") {
  auto rng = derive_stream(1, StreamTag::kData);
  const auto d = datasets::generate_synthetic(8, 4, 1001, 0.3, rng);
  std::vector<int> counts(4, 0);
  for (int l : d.labels) ++counts[static_cast<std::size_t>(l)];
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  CHECK(*hi - *lo <= 1);
}

TEST_CASE("IDX reader") {
  std::vector<std::uint8_t> images;
  put_u32(images, datasets::kIdxImagesMagic);
  put_u32(images, 3);
  put_u32(images, 2);
  put_u32(images, 2);
  for (int i = 0; i < 12; ++i) images.push_back(static_cast<std::uint8_t>(i * 20));
  std::vector<std::uint8_t> labels;
  put_u32(labels, datasets::kIdxLabelsMagic);
  put_u32(labels, 3);
  labels.insert(labels.end(), {7, 1, 9});

  auto rng = derive_stream(1, StreamTag::kData);
  const auto d = datasets::parse_mnist_idx(images, labels, 10, rng);
  CHECK(d.size() == 3);
  CHECK(d.dim() == 4);
  CHECK(d.features.maxCoeff() <= 1.0);
  CHECK(std::multiset<int>(d.labels.begin(), d.labels.end()) == std::multiset<int>{1, 7, 9});

  CHECK_THROWS_AS(datasets::parse_mnist_idx(images, labels, 0, rng), FormatError);
  auto bad = images;
  bad[3] = 0x01;
  CHECK_THROWS_AS(datasets::parse_mnist_idx(bad, labels, 10, rng), FormatError);
  auto short_labels = labels;
  short_labels.pop_back();
  CHECK_THROWS_AS(datasets::parse_mnist_idx(images, short_labels, 10, rng), FormatError);
}

TEST_CASE("metrics files") {
  auto cfg = config::synthetic_preset(0.8);
  cfg.rounds = 3;
  cfg.data.synthetic_samples = 800;
  const auto data = experiment::load_data(cfg);
  const auto trials = experiment::run_trials(cfg, data);
  const fs::path dir = scratch("metrics");
  metrics::write_metrics(trials, config::to_json(cfg), cfg.seed, dir);

  const auto rows = metrics::read_global_csv(dir / "global.csv");
  CHECK(rows.size() == 3);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].cum_energy_j >= rows[i - 1].cum_energy_j);

  std::ifstream in(dir / "global.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == metrics::kGlobalHeader);
  CHECK(fs::exists(dir / "workers.csv"));
  CHECK(fs::exists(dir / "manifest.json"));
  fs::remove_all(dir);
}
