#include "polygrad/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace polygrad {

using nlohmann::json;

namespace {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

BasisFamily family_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "legendre") return BasisFamily::legendre();
    if (s == "chebyshev") return BasisFamily::chebyshev();
    if (s == "fourier") return BasisFamily::fourier();
    throw std::invalid_argument("config: unknown family '" + s + "'");
  }
  if (j.is_object() && j.contains("jacobi"))
    return BasisFamily::jacobi(j["jacobi"].value("alpha", 0.0), j["jacobi"].value("beta", 0.0));
  throw std::invalid_argument("config: malformed family entry");
}

json family_to_json(const BasisFamily& f) {
  if (f.is_fourier()) return "fourier";
  if (f.is_legendre()) return "legendre";
  if (f.is_chebyshev()) return "chebyshev";
  return json{{"jacobi", {{"alpha", f.alpha}, {"beta", f.beta}}}};
}

DensityKind density_from_string(const std::string& s) {
  if (s == "matching") return DensityKind::MatchOrthogonality;
  if (s == "uniform") return DensityKind::UniformOnTorus;
  if (s == "chebyshev") return DensityKind::ChebyshevArcsine;
  throw std::invalid_argument("config: unknown sampling density '" + s + "'");
}

SamplingMode mode_from_json(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "unaugmented") return SamplingMode::unaugmented();
    if (s == "full") return SamplingMode::full_gradient();
    if (s == "independent") return SamplingMode::independent();
    throw std::invalid_argument("config: unknown sampling mode '" + s + "'");
  }
  if (j.is_object() && j.contains("fractional")) {
    const auto& f = j["fractional"];
    if (f.is_number()) return SamplingMode::fractional(f.get<double>());
    return SamplingMode::fractional(f.value("p", 1.0), f.value("random_subset", false));
  }
  throw std::invalid_argument("config: malformed sampling mode entry");
}

json mode_to_json(const SamplingMode& m) {
  switch (m.kind) {
    case SamplingModeKind::Unaugmented:
      return "unaugmented";
    case SamplingModeKind::FullGradient:
      return "full";
    case SamplingModeKind::IndependentGradient:
      return "independent";
    case SamplingModeKind::FractionalGradient:
      return json{{"fractional", {{"p", m.fraction}, {"random_subset", m.random_subset}}}};
  }
  return nullptr;
}

}  // namespace

Density make_density(DensityKind kind, const BasisFamily& family) {
  switch (kind) {
    case DensityKind::MatchOrthogonality:
      return Density::matching(family);
    case DensityKind::ChebyshevArcsine:
      return Density::chebyshev();
    case DensityKind::UniformOnTorus:
      return Density::uniform();
  }
  return Density::uniform();
}

ExperimentConfig parse_config(std::istream& is) {
  json j;
  try {
    j = json::parse(is);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: JSON parse failure: ") + e.what());
  }

  ExperimentConfig cfg;
  cfg.family = family_from_json(j.at("family"));
  cfg.sampling = density_from_string(j.value("sampling", std::string("matching")));
  cfg.function = test_function_from_name(j.value("function", std::string("f3")));
  cfg.d = j.at("d").get<int>();
  cfg.s = j.at("s").get<int>();
  if (cfg.d < 1 || cfg.s < 1) throw std::invalid_argument("config: d and s must be positive");

  cfg.modes.clear();
  for (const auto& m : j.at("modes")) cfg.modes.push_back(mode_from_json(m));
  if (cfg.modes.empty()) throw std::invalid_argument("config: at least one mode required");

  cfg.thetas = j.value("theta", std::vector<double>{1.0});
  if (cfg.thetas.empty()) throw std::invalid_argument("config: at least one theta required");
  for (double t : cfg.thetas)
    if (t < 0.0) throw std::invalid_argument("config: theta must be nonnegative");

  cfg.cost_grid = j.value("m_tilde", std::vector<int>{});
  for (int c : cfg.cost_grid)
    if (c < 1) throw std::invalid_argument("config: cost grid entries must be positive");

  cfg.trials = j.value("trials", 10);
  if (cfg.trials < 1) throw std::invalid_argument("config: trials must be positive");
  cfg.master_seed = j.value("master_seed", std::uint64_t{0});
  cfg.eta = j.value("eta", 1e-12);
  if (cfg.eta < 0.0) throw std::invalid_argument("config: eta must be nonnegative");
  cfg.error_grid = j.value("error_grid", 0);
  cfg.record_timing = j.value("record_timing", false);
  cfg.output = j.value("output", std::string("results"));

  if (j.contains("solver")) {
    const auto& s = j["solver"];
    cfg.solver.max_iterations = s.value("max_iterations", cfg.solver.max_iterations);
    cfg.solver.feasibility_tol = s.value("feasibility_tol", cfg.solver.feasibility_tol);
    cfg.solver.optimality_tol = s.value("optimality_tol", cfg.solver.optimality_tol);
    cfg.solver.pareto_tol = s.value("pareto_tol", cfg.solver.pareto_tol);
  }
  return cfg;
}

ExperimentConfig parse_config_string(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["family"] = family_to_json(cfg.family);
  j["sampling"] = make_density(cfg.sampling, cfg.family).name();
  j["function"] = to_string(cfg.function);
  j["d"] = cfg.d;
  j["s"] = cfg.s;
  j["modes"] = json::array();
  for (const auto& m : cfg.modes) j["modes"].push_back(mode_to_json(m));
  j["theta"] = cfg.thetas;
  j["m_tilde"] = cfg.cost_grid;
  j["trials"] = cfg.trials;
  j["master_seed"] = cfg.master_seed;
  j["eta"] = cfg.eta;
  j["error_grid"] = cfg.error_grid;
  j["record_timing"] = cfg.record_timing;
  j["output"] = cfg.output;
  j["solver"] = {{"max_iterations", cfg.solver.max_iterations},
                 {"feasibility_tol", cfg.solver.feasibility_tol},
                 {"optimality_tol", cfg.solver.optimality_tol},
                 {"pareto_tol", cfg.solver.pareto_tol}};
  return j.dump(2);
}

int samples_for_cost(const SamplingMode& mode, int cost) {
  auto cost_of = [&](int m) {
    switch (mode.kind) {
      case SamplingModeKind::Unaugmented:
        return m;
      case SamplingModeKind::FullGradient:
      case SamplingModeKind::IndependentGradient:
        return 2 * m;
      case SamplingModeKind::FractionalGradient:
        return m + static_cast<int>(std::ceil(mode.fraction * m));
    }
    return m;
  };
  int m = std::max(1, cost);
  while (cost_of(m) > cost && m > 1) --m;
  return m;
}

std::vector<int> default_cost_grid(int N) {
  const double lo = std::max(4.0, N / 4.0);
  const double hi = 4.0 * N;
  std::vector<int> grid;
  for (int i = 0; i < 8; ++i) {
    const int v = static_cast<int>(std::lround(lo * std::pow(hi / lo, i / 7.0)));
    if (grid.empty() || v > grid.back()) grid.push_back(v);
  }
  return grid;
}

std::string csv_header_rows() {
  return "schema_version,family,density,function,d,s,mode,p,theta,eta,m_tilde_target,trial,"
         "seed,m,m_o,m_g,m_tilde,h1_error,linf_error,solver_status,iterations,wall_time_s";
}

std::string csv_header_aggregate() {
  return "schema_version,family,density,function,d,s,mode,p,theta,eta,m_tilde_target,m_tilde,"
         "trials,h1_median,h1_mean,linf_median,linf_mean";
}

void write_row(std::ostream& os, const ResultRow& r) {
  os << 1 << ',' << r.family << ',' << r.density << ',' << r.function << ',' << r.d << ',' << r.s
     << ',' << r.mode << ',' << fmt17(r.p) << ',' << fmt17(r.theta) << ',' << fmt17(r.eta) << ','
     << r.m_tilde_target << ',' << r.trial << ',' << r.seed << ',' << r.m << ',' << r.m_o << ','
     << r.m_g << ',' << r.m_tilde << ',' << fmt17(r.h1_error) << ',' << fmt17(r.linf_error)
     << ',' << r.solver_status << ',' << r.iterations << ',' << fmt17(r.wall_time_s) << '\n';
}

std::string default_output_dir() {
  const char* env = std::getenv("POLYGRAD_OUT");
  return env && *env ? env : ".";
}

namespace {

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n == 0) return 0.0;
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

RunOutput run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const FunctionOracle oracle = test_function(cfg.function, cfg.d);
  const Density mu = make_density(cfg.sampling, cfg.family);
  const IndexSet lambda = hyperbolic_cross(cfg.d, cfg.s);
  const int N = lambda.size();
  const std::vector<int> grid = cfg.cost_grid.empty() ? default_cost_grid(N) : cfg.cost_grid;
  const int error_grid = cfg.error_grid > 0 ? cfg.error_grid : 4 * N;

  // error grids are fixed per configuration, shared across trials and modes
  const std::uint64_t h1_seed = mix64(cfg.master_seed ^ fnv1a("error-grid-h1"));
  const std::uint64_t linf_seed = mix64(cfg.master_seed ^ fnv1a("error-grid-linf"));

  struct Task {
    SamplingMode mode;
    double theta;
    int cost;
    int trial;
  };
  std::vector<Task> tasks;
  for (const auto& mode : cfg.modes)
    for (double theta : cfg.thetas)
      for (int cost : grid)
        for (int t = 0; t < cfg.trials; ++t) tasks.push_back({mode, theta, cost, t});

  std::vector<ResultRow> rows(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::string failure;
  std::mutex failure_mu;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size() || failed.load()) break;
      const Task& task = tasks[i];
      try {
        ResultRow row;
        row.family = cfg.family.name();
        row.density = mu.name();
        row.function = to_string(cfg.function);
        row.d = cfg.d;
        row.s = cfg.s;
        row.mode = task.mode.name();
        row.p = task.mode.kind == SamplingModeKind::FractionalGradient ? task.mode.fraction
                : task.mode.has_gradient()                             ? 1.0
                                                                       : 0.0;
        row.theta = task.theta;
        row.eta = cfg.eta;
        row.m_tilde_target = task.cost;
        row.trial = task.trial;

        std::ostringstream label;
        label << task.mode.name() << ':' << task.mode.fraction << ':' << task.theta << ':'
              << task.cost << ':' << task.trial;
        row.seed = mix64(cfg.master_seed ^ fnv1a(label.str()));

        const int m = samples_for_cost(task.mode, task.cost);
        RecoveryOptions ropts;
        ropts.solver = cfg.solver;

        const auto t0 = std::chrono::steady_clock::now();
        const auto [approx, diag] = recover(oracle, cfg.family, mu, cfg.d, cfg.s, m, task.mode,
                                            task.theta, cfg.eta, row.seed, ropts);
        row.h1_error = h1_error(oracle, approx, mu, error_grid, h1_seed).value;
        row.linf_error = linf_error(oracle, approx, error_grid, linf_seed).value;
        const auto t1 = std::chrono::steady_clock::now();

        row.m = diag.m;
        row.m_o = diag.m_o;
        row.m_g = diag.m_g;
        row.m_tilde = diag.cost();
        row.solver_status = to_string(diag.status);
        row.iterations = diag.iterations;
        row.wall_time_s =
            cfg.record_timing ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
        rows[i] = std::move(row);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(failure_mu);
        failure = e.what();
        failed.store(true);
      }
    }
  };

  const int jobs = std::max(1, opts.jobs);
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  const std::string dir = !opts.out_dir.empty() ? opts.out_dir : default_output_dir();
  std::filesystem::create_directories(dir);
  RunOutput out;
  out.rows_path = dir + "/" + cfg.output + "_rows.csv";
  out.aggregate_path = dir + "/" + cfg.output + "_agg.csv";

  {
    std::ofstream os(out.rows_path);
    if (!os) throw std::runtime_error("cannot open " + out.rows_path);
    os << csv_header_rows() << '\n';
    for (const auto& row : rows) {
      if (row.family.empty()) break;  // partial flush when a task failed
      write_row(os, row);
      ++out.rows_written;
    }
  }
  if (failed.load()) throw std::runtime_error("experiment run failed: " + failure);

  {
    std::ofstream os(out.aggregate_path);
    os << csv_header_aggregate() << '\n';
    // aggregation in task declaration order over the trial axis
    for (const auto& mode : cfg.modes) {
      for (double theta : cfg.thetas) {
        for (int cost : grid) {
          std::vector<double> h1s, linfs;
          int m_tilde = 0;
          for (const auto& row : rows) {
            if (row.mode == mode.name() && row.theta == theta && row.m_tilde_target == cost &&
                (mode.kind != SamplingModeKind::FractionalGradient ||
                 row.p == mode.fraction)) {
              h1s.push_back(row.h1_error);
              linfs.push_back(row.linf_error);
              m_tilde = row.m_tilde;
            }
          }
          os << 1 << ',' << cfg.family.name() << ',' << mu.name() << ','
             << to_string(cfg.function) << ',' << cfg.d << ',' << cfg.s << ',' << mode.name()
             << ','
             << fmt17(mode.kind == SamplingModeKind::FractionalGradient ? mode.fraction
                      : mode.has_gradient()                             ? 1.0
                                                                        : 0.0)
             << ',' << fmt17(theta) << ',' << fmt17(cfg.eta) << ',' << cost << ',' << m_tilde
             << ',' << h1s.size() << ',' << fmt17(median_of(h1s)) << ',' << fmt17(mean_of(h1s))
             << ',' << fmt17(median_of(linfs)) << ',' << fmt17(mean_of(linfs)) << '\n';
        }
      }
    }
  }
  return out;
}

}  // namespace polygrad
