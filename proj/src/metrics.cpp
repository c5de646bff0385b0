#include "feel/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "feel/errors.hpp"

#ifndef FEEL_VERSION
#define FEEL_VERSION "dev"
#endif

namespace feel::metrics {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path, const char* header) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw FormatError(path.string() + ": unexpected header '" + line + "'");
  }
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

void check_close(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

}  // namespace

std::string code_version() { return FEEL_VERSION; }

std::vector<GlobalRow> global_rows(const std::vector<RoundRecord>& records) {
  std::vector<GlobalRow> rows;
  rows.reserve(records.size());
  for (const auto& r : records) {
    rows.push_back({r.round, r.test_loss, r.test_accuracy, r.instantaneous_energy, r.cumulative_energy,
                    r.excluded_fraction});
  }
  return rows;
}

std::vector<WorkerRow> worker_rows(const std::vector<std::vector<RoundRecord>>& trials) {
  std::vector<WorkerRow> rows;
  for (std::size_t t = 0; t < trials.size(); ++t) {
    for (const auto& r : trials[t]) {
      for (const auto& w : r.per_worker) {
        rows.push_back({static_cast<std::uint32_t>(t), r.round, w.id, w.kappa, w.e_cmp, w.e_up, w.t_cmp, w.t_up,
                        w.f_cmp, w.p_up, w.lambda, w.feasible()});
      }
    }
  }
  return rows;
}

void write_global_csv(const std::vector<GlobalRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kGlobalHeader << '\n';
  for (const auto& r : rows) {
    out << r.round << ',' << num(r.test_loss) << ',' << num(r.test_accuracy) << ',' << num(r.inst_energy_j) << ','
        << num(r.cum_energy_j) << ',' << num(r.excluded_fraction) << '\n';
  }
  check_close(out, path);
}

void write_workers_csv(const std::vector<WorkerRow>& rows, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << kWorkersHeader << '\n';
  for (const auto& r : rows) {
    out << r.trial << ',' << r.round << ',' << r.worker_id << ',' << r.kappa << ',' << num(r.e_cmp_j) << ','
        << num(r.e_up_j) << ',' << num(r.t_cmp_s) << ',' << num(r.t_up_s) << ',' << num(r.f_cmp_hz) << ','
        << num(r.p_up_w) << ',' << num(r.lambda) << ',' << (r.feasible ? 1 : 0) << '\n';
  }
  check_close(out, path);
}

std::vector<GlobalRow> read_global_csv(const std::filesystem::path& path) {
  std::vector<GlobalRow> rows;
  for (const auto& c : read_csv(path, kGlobalHeader)) {
    if (c.size() != 6) throw FormatError(path.string() + ": expected 6 columns");
    rows.push_back({static_cast<std::uint32_t>(std::stoul(c[0])), std::stod(c[1]), std::stod(c[2]), std::stod(c[3]),
                    std::stod(c[4]), std::stod(c[5])});
  }
  return rows;
}

std::vector<WorkerRow> read_workers_csv(const std::filesystem::path& path) {
  std::vector<WorkerRow> rows;
  for (const auto& c : read_csv(path, kWorkersHeader)) {
    if (c.size() != 12) throw FormatError(path.string() + ": expected 12 columns");
    rows.push_back({static_cast<std::uint32_t>(std::stoul(c[0])), static_cast<std::uint32_t>(std::stoul(c[1])),
                    static_cast<std::uint32_t>(std::stoul(c[2])), std::stoul(c[3]), std::stod(c[4]),
                    std::stod(c[5]), std::stod(c[6]), std::stod(c[7]), std::stod(c[8]), std::stod(c[9]),
                    std::stod(c[10]), c[11] == "1"});
  }
  return rows;
}

void write_metrics(const std::vector<std::vector<RoundRecord>>& trials, const nlohmann::json& config_echo,
                   std::uint64_t seed, const std::filesystem::path& output_dir) {
  std::error_code ec;
  std::filesystem::create_directories(output_dir, ec);
  if (ec) {
    throw IoError("cannot create " + output_dir.string() + ": " + ec.message());
  }
  if (trials.size() == 1) {
    write_global_csv(global_rows(trials.front()), output_dir / "global.csv");
  } else {
    write_global_csv(global_rows(federation::mean_curve(trials)), output_dir / "global.csv");
    for (std::size_t t = 0; t < trials.size(); ++t) {
      write_global_csv(global_rows(trials[t]), output_dir / ("global_trial" + std::to_string(t) + ".csv"));
    }
  }
  write_workers_csv(worker_rows(trials), output_dir / "workers.csv");

  nlohmann::json manifest;
  manifest["config"] = config_echo;
  manifest["seed"] = seed;
  manifest["trials"] = trials.size();
  manifest["code_version"] = code_version();
  std::vector<std::uint64_t> trial_seeds;
  for (std::size_t t = 0; t < trials.size(); ++t) {
    trial_seeds.push_back(federation::trial_seed(seed, static_cast<std::uint32_t>(t)));
  }
  manifest["trial_seeds"] = trial_seeds;
  if (!trials.empty() && !trials.front().empty()) {
    manifest["deadline_s"] = trials.front().front().deadline;
  }
  const auto path = output_dir / "manifest.json";
  auto out = open_out(path);
  out << manifest.dump(2) << '\n';
  check_close(out, path);
}

}  // namespace feel::metrics
