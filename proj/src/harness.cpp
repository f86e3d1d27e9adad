#include "qelift/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "qelift/io.hpp"
#include "qelift/rng.hpp"

namespace qelift {

namespace {

using nlohmann::json;

// Seed stream tags, kept distinct so every random draw in a sweep comes
// from its own deterministic child stream.
constexpr std::uint64_t kTagGroundTruth = 1;
constexpr std::uint64_t kTagMasks = 2;
constexpr std::uint64_t kTagNoiseBase = 3;

void check_keys(const json& j, const std::string& where,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const bool known =
        std::any_of(allowed.begin(), allowed.end(),
                    [&](const char* k) { return it.key() == k; });
    if (!known)
      throw InputError("unknown key '" + it.key() + "' in " + where);
  }
}

const json* find(const json& j, const char* key) {
  const auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

int get_int(const json& j, const char* key, int fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_integer()) throw InputError(std::string("'") + key + "' must be an integer");
  return v->get<int>();
}

std::uint64_t get_u64(const json& j, const char* key, std::uint64_t fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_number_unsigned() && !v->is_number_integer())
    throw InputError(std::string("'") + key + "' must be a non-negative integer");
  if (v->is_number_integer() && v->get<long long>() < 0)
    throw InputError(std::string("'") + key + "' must be a non-negative integer");
  return v->get<std::uint64_t>();
}

double get_double(const json& j, const char* key, double fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_number()) throw InputError(std::string("'") + key + "' must be a number");
  return v->get<double>();
}

bool get_bool(const json& j, const char* key, bool fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_boolean()) throw InputError(std::string("'") + key + "' must be a boolean");
  return v->get<bool>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  if (!v->is_string()) throw InputError(std::string("'") + key + "' must be a string");
  return v->get<std::string>();
}

// Accepts either a scalar or an array for list-valued fields.
template <typename T>
std::vector<T> get_list(const json& j, const char* key, std::vector<T> fallback,
                        bool (json::*is_elem)() const) {
  const json* v = find(j, key);
  if (v == nullptr) return fallback;
  std::vector<T> out;
  if (((*v).*is_elem)()) {
    out.push_back(v->get<T>());
    return out;
  }
  if (!v->is_array()) throw InputError(std::string("'") + key + "' must be a value or a list");
  for (const json& e : *v) {
    if (!(e.*is_elem)())
      throw InputError(std::string("'") + key + "' has an element of the wrong type");
    out.push_back(e.get<T>());
  }
  return out;
}

SolverConfig parse_solver(const json& j) {
  SolverConfig sc;
  check_keys(j, "solver",
             {"K", "gamma", "step", "iterations", "strict_gamma", "lambda", "delta",
              "outer_rounds", "early_exit", "early_exit_tol"});
  sc.K = get_int(j, "K", sc.K);
  sc.gamma = get_double(j, "gamma", sc.gamma);
  sc.step = get_double(j, "step", sc.step);
  sc.iterations = get_int(j, "iterations", sc.iterations);
  sc.strict_gamma = get_bool(j, "strict_gamma", sc.strict_gamma);
  sc.lambda = get_double(j, "lambda", sc.lambda);
  sc.delta = get_double(j, "delta", sc.delta);
  sc.outer_rounds = get_int(j, "outer_rounds", sc.outer_rounds);
  sc.early_exit = get_bool(j, "early_exit", sc.early_exit);
  sc.early_exit_tol = get_double(j, "early_exit_tol", sc.early_exit_tol);
  return sc;
}

std::string empty_cell() { return std::string(); }

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::qe:
      return "qe";
    case Method::nuclear:
      return "nuclear";
    case Method::reweighted:
      return "reweighted";
  }
  throw ParameterError("unknown method");
}

Method method_from_name(const std::string& name) {
  if (name == "qe") return Method::qe;
  if (name == "nuclear") return Method::nuclear;
  if (name == "reweighted") return Method::reweighted;
  throw InputError("unknown method '" + name + "' (expected qe, nuclear, or reweighted)");
}

std::string noise_mode_name(NoiseMode mode) {
  return mode == NoiseMode::absolute ? "absolute" : "nsr";
}

NoiseMode noise_mode_from_name(const std::string& name) {
  if (name == "absolute") return NoiseMode::absolute;
  if (name == "nsr") return NoiseMode::nsr;
  throw InputError("unknown noise mode '" + name + "' (expected absolute or nsr)");
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw InputError("config root must be a JSON object");

  ExperimentConfig cfg;
  try {
    check_keys(j, "config",
               {"n", "d", "m", "masks", "methods", "noise", "trials", "seed", "output_dir",
                "solver", "emit_timings"});
    cfg.n = get_int(j, "n", cfg.n);
    cfg.d = get_int(j, "d", cfg.d);
    cfg.m = get_list<int>(j, "m", {}, &json::is_number_integer);
    cfg.masks = get_int(j, "masks", cfg.masks);
    if (find(j, "methods") != nullptr) {
      cfg.methods.clear();
      for (const std::string& name :
           get_list<std::string>(j, "methods", {}, &json::is_string))
        cfg.methods.push_back(method_from_name(name));
    }
    if (const json* v = find(j, "noise")) {
      if (!v->is_object()) throw InputError("'noise' must be an object");
      check_keys(*v, "noise", {"mode", "levels"});
      cfg.noise_mode = noise_mode_from_name(get_string(*v, "mode", "absolute"));
      cfg.noise_levels = get_list<double>(*v, "levels", cfg.noise_levels, &json::is_number);
    }
    cfg.trials = get_int(j, "trials", cfg.trials);
    cfg.seed = get_u64(j, "seed", cfg.seed);
    cfg.output_dir = get_string(j, "output_dir", cfg.output_dir);
    if (const json* v = find(j, "solver")) {
      if (!v->is_object()) throw InputError("'solver' must be an object");
      cfg.solver = parse_solver(*v);
    }
    cfg.emit_timings = get_bool(j, "emit_timings", cfg.emit_timings);
  } catch (const json::exception& e) {
    throw InputError(std::string("config field error: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::vector<int> ExperimentConfig::grid_sizes() const {
  return m.empty() ? std::vector<int>{n} : m;
}

void ExperimentConfig::validate() const {
  if (n < 1) throw InputError("n must be >= 1");
  if (d < 1) throw InputError("d must be >= 1");
  for (const int mi : grid_sizes())
    if (mi < n) throw InputError("every grid size m must be >= n");
  if (masks < 0) throw InputError("masks must be >= 0");
  if (methods.empty()) throw InputError("at least one method is required");
  if (noise_levels.empty()) throw InputError("at least one noise level is required");
  for (const double level : noise_levels)
    if (!(level >= 0.0) || !std::isfinite(level))
      throw InputError("noise levels must be finite and >= 0");
  if (trials < 1) throw InputError("trials must be >= 1");
  if (output_dir.empty()) throw InputError("output_dir must be non-empty");
  if (solver.iterations < 1) throw InputError("solver iterations must be >= 1");
  if (solver.K < 1) throw InputError("solver K must be >= 1");
  if (solver.outer_rounds < 1) throw InputError("solver outer_rounds must be >= 1");
}

ComplexTensor generate_ground_truth(int n, int d, std::uint64_t seed) {
  ComplexTensor x(n, d);
  Rng rng(seed);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()(i) = rng.complex_normal();
  const double norm = x.data().norm();
  x.data() /= norm;
  return x;
}

MaskSet generate_masks(int n, int d, int n_masks, std::uint64_t seed) {
  if (n_masks < 0) throw InputError("mask count must be >= 0");
  const IndexBijection map(n, d);
  MaskSet set;
  Rng rng(seed);
  for (int i = 0; i < n_masks; ++i) {
    Eigen::VectorXd mask(map.size());
    do {
      for (Eigen::Index jj = 0; jj < mask.size(); ++jj)
        mask(jj) = rng.bernoulli() ? 1.0 : 0.0;
    } while (mask.maxCoeff() == 0.0);
    set.masks.push_back(std::move(mask));
  }
  return set;
}

MeasurementVector add_noise(const MeasurementVector& b, double target_norm,
                            std::uint64_t seed) {
  if (target_norm < 0.0) throw InputError("noise norm must be >= 0");
  if (target_norm == 0.0) return b;
  Rng rng(seed);
  Eigen::VectorXcd eps(b.values.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) eps(i) = rng.complex_normal();
  eps *= target_norm / eps.norm();
  MeasurementVector out = b;
  out.values += eps;
  return out;
}

TrialMetrics evaluate_trial(const ComplexTensor& x0, const ReconstructionResult& res,
                            double noise_norm, double clean_norm) {
  TrialMetrics m;
  const Eigen::VectorXcd v0 = vectorize(x0);
  m.phase_dist = res.x.has_value()
                     ? phase_distance(v0, vectorize(*res.x))
                     : std::numeric_limits<double>::quiet_NaN();
  m.frob_err = (res.X - v0 * v0.adjoint()).norm();
  m.residual = std::sqrt(2.0 * res.final_objective);
  m.nsr = clean_norm > 0.0 ? noise_norm / clean_norm : 0.0;
  m.rank_tight = numerical_rank(res.X, 1e-6);
  m.rank_loose = numerical_rank(res.X, 1e-3);
  m.top_eigs = eigen_table(res.X, int(std::min<Eigen::Index>(10, res.X.rows())));
  return m;
}

namespace {

struct SummaryAcc {
  int trials = 0;
  int ok = 0;
  double phase = 0.0;
  double frob = 0.0;
  double resid = 0.0;
  double rank6 = 0.0;
  double rank3 = 0.0;
};

std::vector<std::string> results_columns() {
  std::vector<std::string> cols = {"n",         "d",     "m",          "masks",
                                   "method",    "noise_mode", "noise_level", "trial",
                                   "seed",      "status",     "iterations",  "residual",
                                   "nsr",       "phase_dist", "frob_err",    "rank_1e6",
                                   "rank_1e3"};
  for (int i = 1; i <= 10; ++i) cols.push_back("eig" + std::to_string(i));
  return cols;
}

}  // namespace

SweepOutput run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(cfg.output_dir);
  const std::vector<int> ms = cfg.grid_sizes();

  SweepOutput out;
  out.results_path = (fs::path(cfg.output_dir) / "results.csv").string();
  out.summary_path = (fs::path(cfg.output_dir) / "summary.csv").string();
  CsvWriter results(out.results_path, "qelift-results-v1", results_columns());

  std::unique_ptr<CsvWriter> timings;
  if (cfg.emit_timings) {
    out.timings_path = (fs::path(cfg.output_dir) / "timings.csv").string();
    timings = std::make_unique<CsvWriter>(
        *out.timings_path, "qelift-timings-v1",
        std::vector<std::string>{"n", "d", "m", "masks", "method", "noise_mode",
                                 "noise_level", "trial", "seconds"});
  }

  const std::size_t groups = cfg.noise_levels.size() * ms.size() * cfg.methods.size();
  std::vector<SummaryAcc> acc(groups);
  const auto group_index = [&](std::size_t li, std::size_t mi, std::size_t me) {
    return (li * ms.size() + mi) * cfg.methods.size() + me;
  };

  for (std::size_t li = 0; li < cfg.noise_levels.size(); ++li) {
    const double level = cfg.noise_levels[li];
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::uint64_t instance_seed =
          Rng::mix(Rng::mix(cfg.seed, li), 1000 + std::uint64_t(trial));
      const ComplexTensor x0 =
          generate_ground_truth(cfg.n, cfg.d, Rng::mix(instance_seed, kTagGroundTruth));
      const MaskSet masks =
          generate_masks(cfg.n, cfg.d, cfg.masks, Rng::mix(instance_seed, kTagMasks));
      const Eigen::VectorXcd v0 = vectorize(x0);
      const Eigen::MatrixXcd X0 = v0 * v0.adjoint();

      for (std::size_t mi = 0; mi < ms.size(); ++mi) {
        const MeasurementOperator A(cfg.n, cfg.d, FrequencyGrid::regular(ms[mi], cfg.d),
                                    masks);
        const MeasurementVector b_clean = A.forward(X0);
        const double clean_norm = b_clean.values.norm();
        const double target =
            cfg.noise_mode == NoiseMode::absolute ? level : level * clean_norm;
        const MeasurementVector b =
            add_noise(b_clean, target, Rng::mix(instance_seed, kTagNoiseBase + mi));

        for (std::size_t me = 0; me < cfg.methods.size(); ++me) {
          SolverConfig sc = cfg.solver;
          sc.method = cfg.methods[me];
          sc.noise_norm = target;

          std::vector<std::string> row = {
              CsvWriter::cell(cfg.n),
              CsvWriter::cell(cfg.d),
              CsvWriter::cell(ms[mi]),
              CsvWriter::cell(cfg.masks),
              method_name(cfg.methods[me]),
              noise_mode_name(cfg.noise_mode),
              CsvWriter::cell(level),
              CsvWriter::cell(trial),
              CsvWriter::cell(std::uint64_t(cfg.seed)),
          };
          SummaryAcc& g = acc[group_index(li, mi, me)];
          g.trials += 1;

          const auto t0 = std::chrono::steady_clock::now();
          bool solved = false;
          ReconstructionResult res;
          try {
            res = solve(A, b, sc);
            solved = true;
          } catch (const DivergenceError& e) {
            out.diverged += 1;
            row.push_back("diverged");
            row.push_back(CsvWriter::cell(e.iteration));
            for (int i = 0; i < 6 + 10; ++i) row.push_back(empty_cell());
          }
          const double seconds =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

          if (solved) {
            const TrialMetrics tm = evaluate_trial(x0, res, target, clean_norm);
            row.push_back(res.x.has_value() ? "ok" : "degenerate");
            row.push_back(CsvWriter::cell(res.iterations_run));
            row.push_back(CsvWriter::cell(tm.residual));
            row.push_back(CsvWriter::cell(tm.nsr));
            row.push_back(res.x.has_value() ? CsvWriter::cell(tm.phase_dist) : empty_cell());
            row.push_back(CsvWriter::cell(tm.frob_err));
            row.push_back(CsvWriter::cell(tm.rank_tight));
            row.push_back(CsvWriter::cell(tm.rank_loose));
            for (int i = 0; i < 10; ++i)
              row.push_back(i < tm.top_eigs.size() ? CsvWriter::cell(tm.top_eigs(i))
                                                   : empty_cell());
            if (res.x.has_value()) {
              g.ok += 1;
              g.phase += tm.phase_dist;
              g.frob += tm.frob_err;
              g.resid += tm.residual;
              g.rank6 += tm.rank_tight;
              g.rank3 += tm.rank_loose;
            }
          }

          results.write_row(row);
          out.rows += 1;
          if (timings)
            timings->write_row({CsvWriter::cell(cfg.n), CsvWriter::cell(cfg.d),
                                CsvWriter::cell(ms[mi]), CsvWriter::cell(cfg.masks),
                                method_name(cfg.methods[me]),
                                noise_mode_name(cfg.noise_mode), CsvWriter::cell(level),
                                CsvWriter::cell(trial), CsvWriter::cell(seconds)});
        }
      }
    }
  }

  CsvWriter summary(out.summary_path, "qelift-summary-v1",
                    {"n", "d", "m", "masks", "method", "noise_mode", "noise_level",
                     "trials", "ok", "mean_phase_dist", "mean_frob_err", "mean_residual",
                     "mean_rank_1e6", "mean_rank_1e3"});
  for (std::size_t li = 0; li < cfg.noise_levels.size(); ++li)
    for (std::size_t mi = 0; mi < ms.size(); ++mi)
      for (std::size_t me = 0; me < cfg.methods.size(); ++me) {
        const SummaryAcc& g = acc[group_index(li, mi, me)];
        std::vector<std::string> row = {
            CsvWriter::cell(cfg.n),
            CsvWriter::cell(cfg.d),
            CsvWriter::cell(ms[mi]),
            CsvWriter::cell(cfg.masks),
            method_name(cfg.methods[me]),
            noise_mode_name(cfg.noise_mode),
            CsvWriter::cell(cfg.noise_levels[li]),
            CsvWriter::cell(g.trials),
            CsvWriter::cell(g.ok),
        };
        if (g.ok > 0) {
          const double inv = 1.0 / g.ok;
          row.push_back(CsvWriter::cell(g.phase * inv));
          row.push_back(CsvWriter::cell(g.frob * inv));
          row.push_back(CsvWriter::cell(g.resid * inv));
          row.push_back(CsvWriter::cell(g.rank6 * inv));
          row.push_back(CsvWriter::cell(g.rank3 * inv));
        } else {
          for (int i = 0; i < 5; ++i) row.push_back(empty_cell());
        }
        summary.write_row(row);
      }

  return out;
}

ImageReport reconstruct_image(const std::string& input_pgm, const std::string& output_pgm,
                              const std::string& metrics_csv, const ImageConfig& cfg) {
  if (cfg.masks < 0) throw InputError("masks must be >= 0");
  if (!(cfg.nsr >= 0.0) || !std::isfinite(cfg.nsr))
    throw InputError("nsr must be finite and >= 0");

  const PgmImage img = read_pgm(input_pgm);
  if (img.width != img.height)
    throw InputError("image must be square, got " + std::to_string(img.width) + "x" +
                     std::to_string(img.height));
  const int side = img.width;
  if (side > 32)
    throw InputError("image side " + std::to_string(side) +
                     " exceeds the supported maximum of 32");

  const Eigen::Index N = Eigen::Index(side) * side;
  Eigen::VectorXd p(N);
  for (Eigen::Index i = 0; i < N; ++i) p(i) = double(img.pixels[std::size_t(i)]);
  const double pnorm = p.norm();
  if (pnorm == 0.0) throw InputError("image is entirely black");

  const Eigen::VectorXcd v0 = (p / pnorm).cast<std::complex<double>>();
  const ComplexTensor x0 = tensorize(v0, side, 2);
  const Eigen::MatrixXcd X0 = v0 * v0.adjoint();

  const MaskSet masks =
      generate_masks(side, 2, cfg.masks, Rng::mix(cfg.seed, kTagMasks));
  const MeasurementOperator A(side, 2, FrequencyGrid::regular(side, 2), masks);
  const MeasurementVector b_clean = A.forward(X0);
  const double target = cfg.nsr * b_clean.values.norm();
  const MeasurementVector b =
      add_noise(b_clean, target, Rng::mix(cfg.seed, kTagNoiseBase));

  SolverConfig sc = cfg.solver;
  sc.noise_norm = target;
  const ReconstructionResult res = solve(A, b, sc);
  if (!res.x.has_value())
    throw DegenerateOutputError("reconstruction has no positive eigenvalue to render");
  const Eigen::VectorXcd xt = vectorize(*res.x);

  // The recovered signal is determined only up to a global phase; pick the
  // rotation that concentrates the most mass on the non-negative real axis.
  double best_mass = -1.0;
  double best_phase = 0.0;
  constexpr int kPhaseGrid = 3600;
  for (int tdx = 0; tdx < kPhaseGrid; ++tdx) {
    const double phi = 2.0 * std::numbers::pi * tdx / kPhaseGrid;
    const std::complex<double> rot = std::polar(1.0, phi);
    double mass = 0.0;
    for (Eigen::Index i = 0; i < xt.size(); ++i) {
      const double re = (rot * xt(i)).real();
      if (re > 0.0) mass += re * re;
    }
    if (mass > best_mass) {
      best_mass = mass;
      best_phase = phi;
    }
  }
  const std::complex<double> rot = std::polar(1.0, best_phase);
  Eigen::VectorXd y(N);
  for (Eigen::Index i = 0; i < N; ++i) y(i) = std::max((rot * xt(i)).real(), 0.0) * pnorm;

  ImageReport report;
  report.side = side;
  report.relative_error = (y - p).norm() / pnorm;
  report.residual = std::sqrt(2.0 * res.final_objective);
  report.rank_tight = numerical_rank(res.X, 1e-6);
  report.rank_loose = numerical_rank(res.X, 1e-3);
  report.iterations_run = res.iterations_run;

  PgmImage out_img;
  out_img.width = side;
  out_img.height = side;
  out_img.pixels.resize(std::size_t(N));
  for (Eigen::Index i = 0; i < N; ++i) {
    const double q = std::clamp(std::round(y(i)), 0.0, 255.0);
    out_img.pixels[std::size_t(i)] = static_cast<unsigned char>(q);
  }
  write_pgm(output_pgm, out_img);

  CsvWriter csv(metrics_csv, "qelift-image-v1",
                {"side", "masks", "nsr", "seed", "method", "iterations", "residual",
                 "relative_error", "rank_1e6", "rank_1e3"});
  csv.write_row({CsvWriter::cell(side), CsvWriter::cell(cfg.masks),
                 CsvWriter::cell(cfg.nsr), CsvWriter::cell(std::uint64_t(cfg.seed)),
                 method_name(sc.method), CsvWriter::cell(report.iterations_run),
                 CsvWriter::cell(report.residual), CsvWriter::cell(report.relative_error),
                 CsvWriter::cell(report.rank_tight), CsvWriter::cell(report.rank_loose)});
  return report;
}

}  // namespace qelift
