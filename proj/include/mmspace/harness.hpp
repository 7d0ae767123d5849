#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mmspace/io.hpp"

namespace mms {

inline constexpr const char* kReportSchema = "mmspace-report/1";

/// Per-index diagnostics of one experiment plus summary verdicts.
struct Report {
  std::string experiment;
  Json config;  // normalized: every default filled in
  std::uint64_t seed = 0;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::pair<std::string, bool>> flags;
  std::vector<std::pair<std::string, double>> summary;

  bool flag(const std::string& name) const;
  double summary_value(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
};

/// Comment header (schema, experiment, seed, config, flags, summary), then
/// one CSV header line and the rows.
std::string report_csv(const Report& report);
Json report_json(const Report& report);

/// Runs count tasks on up to `workers` threads; task i runs exactly once.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& task);

/// Final value below threshold and the last three values strictly
/// decreasing (or all of them zero up to 1e-12).
bool trend_passes(const std::vector<double>& values, double threshold);
bool strictly_decreasing(const std::vector<double>& values);

/// sup |F_a - F_b| of two weighted samples, each normalized to mass 1.
double ks_statistic(std::vector<std::pair<double, double>> a, std::vector<std::pair<double, double>> b);
/// Two-sample Kolmogorov-Smirnov critical value at level alpha.
double ks_critical(double alpha, std::size_t n, std::size_t m);

/// Dispatches on config["experiment"] in {sequence, cube, swap, kallenberg}.
Report run_experiment(const Json& config, std::size_t workers);
Report run_sequence(const Json& config, std::size_t workers);
Report run_cube(const Json& config, std::size_t workers);
Report run_measure_swap(const Json& config, std::size_t workers);
Report run_kallenberg(const Json& config, std::size_t workers);

/// Pitman-transformed Brownian endpoint vs Euler-Maruyama Bessel endpoint at
/// time 1; returns the KS statistic between the two samples.
double generator_agreement_ks(std::size_t samples, std::size_t n_grid, std::uint64_t seed, std::size_t workers);

/// Exact volume of the Euclidean ball of radius r in n dimensions.
double ball_volume(std::size_t n, double r);

}  // namespace mms
