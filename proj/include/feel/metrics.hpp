#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "feel/federation.hpp"

namespace feel::metrics {

inline constexpr const char* kGlobalHeader =
    "round,test_loss,test_accuracy,inst_energy_j,cum_energy_j,excluded_fraction";
inline constexpr const char* kWorkersHeader =
    "trial,round,worker_id,kappa,e_cmp_j,e_up_j,t_cmp_s,t_up_s,f_cmp_hz,p_up_w,lambda,feasible";

struct GlobalRow {
  std::uint32_t round = 0;
  double test_loss = 0.0;
  double test_accuracy = 0.0;
  double inst_energy_j = 0.0;
  double cum_energy_j = 0.0;
  double excluded_fraction = 0.0;
};

struct WorkerRow {
  std::uint32_t trial = 0;
  std::uint32_t round = 0;
  std::uint32_t worker_id = 0;
  std::size_t kappa = 0;
  double e_cmp_j = 0.0;
  double e_up_j = 0.0;
  double t_cmp_s = 0.0;
  double t_up_s = 0.0;
  double f_cmp_hz = 0.0;
  double p_up_w = 0.0;
  double lambda = 0.0;
  bool feasible = false;
};

std::vector<GlobalRow> global_rows(const std::vector<RoundRecord>& records);
std::vector<WorkerRow> worker_rows(const std::vector<std::vector<RoundRecord>>& trials);

void write_global_csv(const std::vector<GlobalRow>& rows, const std::filesystem::path& path);
void write_workers_csv(const std::vector<WorkerRow>& rows, const std::filesystem::path& path);
std::vector<GlobalRow> read_global_csv(const std::filesystem::path& path);
std::vector<WorkerRow> read_workers_csv(const std::filesystem::path& path);

/// Writes global.csv (trial mean when there is more than one trial),
/// global_trial<k>.csv per trial when trials > 1, workers.csv and
/// manifest.json into `output_dir`.
void write_metrics(const std::vector<std::vector<RoundRecord>>& trials, const nlohmann::json& config_echo,
                   std::uint64_t seed, const std::filesystem::path& output_dir);

std::string code_version();

}  // namespace feel::metrics
