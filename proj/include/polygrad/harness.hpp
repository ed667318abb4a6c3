#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "polygrad/recovery.hpp"

namespace polygrad {

// One experiment sweep: modes x theta x cost grid x trials.
struct ExperimentConfig {
  BasisFamily family = BasisFamily::legendre();
  DensityKind sampling = DensityKind::MatchOrthogonality;
  TestFunction function = TestFunction::F3;
  int d = 2;
  int s = 3;
  std::vector<SamplingMode> modes = {SamplingMode::unaugmented()};
  std::vector<double> thetas = {1.0};
  std::vector<int> cost_grid;  // target m-tilde values; empty -> geometric default
  int trials = 10;
  std::uint64_t master_seed = 0;
  double eta = 1e-12;
  SolverConfig solver;
  int error_grid = 0;  // points in the error grids; 0 -> 4 |Lambda|
  bool record_timing = false;
  std::string output = "results";
};

ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config_string(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);

Density make_density(DensityKind kind, const BasisFamily& family);

struct ResultRow {
  std::string family;
  std::string density;
  std::string function;
  int d = 0;
  int s = 0;
  std::string mode;
  double p = 0.0;
  double theta = 0.0;
  double eta = 0.0;
  int m_tilde_target = 0;
  int trial = 0;
  std::uint64_t seed = 0;
  int m = 0;
  int m_o = 0;
  int m_g = 0;
  int m_tilde = 0;
  double h1_error = 0.0;
  double linf_error = 0.0;
  std::string solver_status;
  int iterations = 0;
  double wall_time_s = 0.0;
};

std::string csv_header_rows();
std::string csv_header_aggregate();
void write_row(std::ostream& os, const ResultRow& row);

// Largest function-sample count whose total evaluation cost fits the target.
int samples_for_cost(const SamplingMode& mode, int cost);
// Default geometric cost grid spanning [N/4, 4N] with 8 points.
std::vector<int> default_cost_grid(int N);

struct RunOptions {
  int jobs = 1;
  std::string out_dir;  // empty: config/env default
};

struct RunOutput {
  std::string rows_path;
  std::string aggregate_path;
  int rows_written = 0;
};

// Execute the sweep and write the per-run and aggregate CSV files.
// Deterministic for a fixed config, regardless of the worker count.
RunOutput run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

std::string default_output_dir();  // $POLYGRAD_OUT when set, else "."

}  // namespace polygrad
